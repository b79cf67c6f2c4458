#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.h"
#include "random_scene.h"
#include "spatialkit/errors.h"
#include "spatialkit/geometry.h"
#include "spatialkit/qa_synth.h"
#include "spatialkit/sample_io.h"

namespace spatialkit {
namespace {

using nlohmann::json;
using testing::look_at_view;

Object3D obj(const std::string& id, const std::string& cat, Vec3 c, Vec3 size) {
  const Vec3 h = 0.5 * size;
  return {id, cat, c, c - h, c + h};
}

// Camera looking along world +y from the origin: u = 320 + 320 x / y.
CameraView forward_camera(const std::string& id = "v0", std::int64_t frame = 0, double x = 0.0) {
  CameraView v;
  v.id = id;
  v.frame_index = frame;
  v.rotation = {1, 0, 0, 0, 0, -1, 0, 1, 0};
  v.translation = {-x, 0, 0};
  v.fx = v.fy = 320;
  v.cx = 320;
  v.cy = 240;
  v.width = 640;
  v.height = 480;
  return v;
}

// One distant camera that sees a 10 m room whole.
CameraView overview(const std::string& id = "v0", std::int64_t frame = 0) {
  return look_at_view(id, frame, {5, -12, 9}, {5, 5, 0}, 640, 480, 250);
}

Scene room(std::vector<Object3D> objects, std::vector<CameraView> views = {overview()}) {
  Scene s;
  s.id = "room";
  s.objects = std::move(objects);
  s.views = std::move(views);
  EXPECT_TRUE(validate_scene(s).empty());
  return s;
}

std::vector<std::string> ids(const Scene& s) {
  std::vector<std::string> out;
  for (const auto& v : s.views) out.push_back(v.id);
  return out;
}

double numeric(const QASample& s) { return std::get<NumericAnswer>(s.answer).value; }

std::string chosen(const QASample& s) { return (*s.options)[std::get<ChoiceAnswer>(s.answer).letter - 'A']; }

TEST(Counting, CountsVisibleInstances) {
  const Scene s = room({obj("c1", "chair", {2, 2, 0.4}, {0.5, 0.5, 0.8}), obj("c2", "chair", {5, 5, 0.4}, {0.5, 0.5, 0.8}),
                        obj("c3", "chair", {8, 3, 0.4}, {0.5, 0.5, 0.8}), obj("t", "table", {5, 2, 0.4}, {1, 1, 0.8}),
                        obj("g", "ghost", {5, -40, 0.4}, {1, 1, 0.8}), obj("w", "wall", {5, 9, 1}, {8, 0.1, 2})});
  const auto g = gen_counting(s, ids(s), Modality::kMultiView, {});
  ASSERT_EQ(g.samples.size(), 2u);
  EXPECT_EQ(g.samples[0].question, "How many chair(s) appear?");
  EXPECT_EQ(numeric(g.samples[0]), 3.0);
  EXPECT_EQ(numeric(g.samples[1]), 1.0);
  EXPECT_EQ(g.tally.generated, 4);
  EXPECT_EQ(g.tally.rejected.at("visibility"), 1);
  EXPECT_EQ(g.tally.rejected.at("blacklist"), 1);
  EXPECT_TRUE(gen_counting(s, ids(s), Modality::kSingleImage, {}).samples.empty());
}

TEST(Counting, FixtureChairs) {
  std::ifstream f(std::string(SPATIALKIT_FIXTURES) + "/scenes/living_room.json");
  std::stringstream ss;
  ss << f.rdbuf();
  const Scene s = parse_scene(ss.str());
  const auto views = select_multiview_views(s, 8);
  ASSERT_EQ(views.size(), 8u);
  for (const auto& sample : gen_counting(s, views, Modality::kMultiView, {}).samples) {
    if (sample.provenance["categories"][0] == "chair") EXPECT_EQ(numeric(sample), 3.0);
  }
}

TEST(AbsDistance, ClosestPointAndFilter) {
  SynthConfig cfg;
  // Gap of 2.0 m along x; smaller box is 0.5 m.
  Scene s = room({obj("a", "lamp", {3, 5, 0.25}, {0.5, 0.5, 0.5}), obj("b", "table", {5.5, 5, 0.25}, {0.5, 0.5, 0.5})});
  auto g = gen_abs_distance(s, ids(s), Modality::kMultiView, cfg);
  ASSERT_EQ(g.samples.size(), 1u);
  EXPECT_DOUBLE_EQ(numeric(g.samples[0]), 2.0);
  EXPECT_EQ(g.samples[0].question,
            "Measuring from the closest point of each object, what is the distance between the lamp and the "
            "table (in meters)?");

  s = room({obj("a", "lamp", {3, 5, 0.25}, {0.5, 0.5, 0.5}), obj("b", "table", {3.9, 5, 0.25}, {0.5, 0.5, 0.5})});
  g = gen_abs_distance(s, ids(s), Modality::kMultiView, cfg);
  EXPECT_TRUE(g.samples.empty());
  EXPECT_EQ(g.tally.rejected.at("min_separation"), 1);
}

TEST(AbsDistance, CentroidMode) {
  SynthConfig cfg;
  cfg.abs_distance_mode = DistanceMode::kCentroid;
  const Scene s = room({obj("a", "lamp", {2, 2, 0.25}, {0.5, 0.5, 0.5}), obj("b", "table", {5, 6, 0.25}, {0.5, 0.5, 0.5})});
  const auto g = gen_abs_distance(s, ids(s), Modality::kVideo, cfg);
  ASSERT_EQ(g.samples.size(), 1u);
  EXPECT_DOUBLE_EQ(numeric(g.samples[0]), 5.0);
  EXPECT_EQ(g.samples[0].question.find("closest point"), std::string::npos);
}

TEST(AbsDistance, UniquenessAndVisibility) {
  const Scene s = room({obj("a", "chair", {2, 2, 0.25}, {0.5, 0.5, 0.5}), obj("b", "chair", {8, 8, 0.25}, {0.5, 0.5, 0.5}),
                        obj("c", "table", {5, 2, 0.25}, {0.5, 0.5, 0.5})});
  const auto g = gen_abs_distance(s, ids(s), Modality::kMultiView, {});
  EXPECT_TRUE(g.samples.empty());
  EXPECT_EQ(g.tally.rejected.at("not_unique"), 3);
}

TEST(ObjectSize, Examples) {
  const Scene s = room({obj("a", "box", {2, 2, 0.25}, {0.5, 0.5, 0.5}), obj("b", "rug", {5, 5, 0.05}, {5.0, 0.5, 0.1}),
                        obj("c", "bag", {8, 2, 0.2}, {0.30, 0.42, 0.27})});
  const auto g = gen_obj_size(s, ids(s), Modality::kSingleImage, {});
  ASSERT_EQ(g.samples.size(), 2u);
  EXPECT_EQ(numeric(g.samples[0]), 50.0);
  EXPECT_EQ(numeric(g.samples[1]), 42.0);
  EXPECT_EQ(std::get<NumericAnswer>(g.samples[0].answer).unit, "cm");
  EXPECT_EQ(g.tally.rejected.at("size_range"), 1);
}

TEST(RelDistance, RatioFilter) {
  SynthConfig cfg;
  cfg.abs_distance_mode = DistanceMode::kCentroid;
  auto make = [](double db) {
    return room({obj("t", "table", {2, 5, 0.1}, {0.2, 0.2, 0.2}), obj("a", "lamp", {3, 5, 0.1}, {0.2, 0.2, 0.2}),
                 obj("b", "sofa", {2 - db, 5, 0.1}, {0.2, 0.2, 0.2})});
  };
  Scene s = make(3.0);
  auto g = gen_rel_distance(s, ids(s), Modality::kVideo, cfg);
  std::vector<QASample> with_target;
  for (const auto& q : g.samples) {
    if (q.provenance["target"] == "t") with_target.push_back(q);
  }
  ASSERT_EQ(with_target.size(), 1u);
  EXPECT_EQ(chosen(with_target[0]), "lamp");
  EXPECT_DOUBLE_EQ(with_target[0].provenance["ratio"].get<double>(), 3.0);
  EXPECT_EQ(with_target[0].options->size(), 2u);

  s = make(1.5);
  g = gen_rel_distance(s, ids(s), Modality::kVideo, cfg);
  for (const auto& q : g.samples) EXPECT_NE(q.provenance["target"], "t");

  s = make(1.0);
  g = gen_rel_distance(s, ids(s), Modality::kVideo, cfg);
  for (const auto& q : g.samples) EXPECT_NE(q.provenance["target"], "t");
  EXPECT_GE(g.tally.rejected.at("distance_ratio"), 1);
}

TEST(RelDirection, SingleImageLeft) {
  // u_a = 100, u_b = 500 at equal depth 5.
  const Scene s = room({obj("a", "lamp", {-3.4375, 5, 0}, {0.2, 0.2, 0.2}), obj("b", "sofa", {2.8125, 5, 0}, {0.2, 0.2, 0.2})},
                       {forward_camera()});
  const auto g = gen_rel_direction(s, {"v0"}, Modality::kSingleImage, {});
  ASSERT_EQ(g.samples.size(), 1u);
  const auto& q = g.samples[0];
  EXPECT_EQ(chosen(q), "left");
  EXPECT_EQ(q.options->size(), 4u);
  EXPECT_NEAR(q.provenance["du"].get<double>(), -0.625, 1e-12);
  std::set<std::string> labels(q.options->begin(), q.options->end());
  EXPECT_EQ(labels.size(), 4u);
  for (const auto& l : labels) EXPECT_TRUE(direction_from_string(l));
}

TEST(RelDirection, MultiViewQuadrant) {
  const Scene s = room({obj("p", "bed", {2, 2, 0.2}, {0.2, 0.2, 0.2}), obj("o", "desk", {2, 4, 0.2}, {0.2, 0.2, 0.2}),
                        obj("q", "lamp", {4, 4, 0.2}, {0.2, 0.2, 0.2})});
  const auto g = gen_rel_direction(s, ids(s), Modality::kMultiView, {});
  bool found = false;
  for (const auto& q : g.samples) {
    const auto& roles = q.provenance["roles"];
    if (roles["positioning"] == "p" && roles["orienting"] == "o" && roles["querying"] == "q") {
      found = true;
      EXPECT_EQ(chosen(q), "front-right");
      EXPECT_NEAR(q.provenance["theta_deg"].get<double>(), 45.0, 1e-9);
      EXPECT_EQ(q.question.rfind("If I am standing by the bed and facing the desk, is the lamp to my", 0), 0u);
    }
    // Every emitted triple clears the margin.
    EXPECT_GE(q.provenance["axis_distance_deg"].get<double>(), 10.0);
  }
  EXPECT_TRUE(found);
}

TEST(RelDirection, OnAxisDropped) {
  const Scene s = room({obj("p", "bed", {2, 2, 0.2}, {0.2, 0.2, 0.2}), obj("o", "desk", {2, 4, 0.2}, {0.2, 0.2, 0.2}),
                        obj("q", "lamp", {2, 6, 0.2}, {0.2, 0.2, 0.2})});
  const auto g = gen_rel_direction(s, ids(s), Modality::kMultiView, {});
  EXPECT_TRUE(g.samples.empty());
  EXPECT_EQ(g.tally.rejected.at("direction_ambiguous"), 6);
}

Scene timeline(const std::vector<std::int64_t>& frames, const std::vector<std::string>& cats) {
  Scene s;
  s.id = "walk";
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const double x = 20.0 * k;
    s.objects.push_back(obj("o" + std::to_string(k), cats[k], {x, 5, 0}, {0.5, 0.5, 0.5}));
    s.views.push_back(forward_camera("v" + std::to_string(k), frames[k], x));
  }
  return s;
}

TEST(AppearanceOrder, ChronologicalAnswer) {
  const Scene s = timeline({3, 10, 20, 40}, {"zebra", "apple", "mango", "banana"});
  const auto g = gen_appearance_order(s, {});
  ASSERT_EQ(g.samples.size(), 1u);
  const auto& q = g.samples[0];
  EXPECT_EQ(chosen(q), "zebra, apple, mango, banana");
  EXPECT_EQ(q.options->size(), 4u);
  EXPECT_EQ(std::set<std::string>(q.options->begin(), q.options->end()).size(), 4u);
  EXPECT_EQ(q.modality, Modality::kVideo);
}

TEST(AppearanceOrder, TieWindowAndMinimum) {
  const Scene tie = timeline({3, 10, 12, 30, 40}, {"a", "b", "c", "d", "e"});
  const auto g = gen_appearance_order(tie, {});
  EXPECT_EQ(g.tally.generated, 5);
  EXPECT_EQ(g.samples.size(), 2u);
  EXPECT_EQ(g.tally.rejected.at("appearance_gap"), 3);

  EXPECT_TRUE(gen_appearance_order(timeline({3, 10, 20}, {"a", "b", "c"}), {}).samples.empty());
}

TEST(RoomSize, Examples) {
  Scene s = room({obj("a", "table", {2, 2, 0.5}, {1, 1, 1})});
  s.floor_extent = FloorExtent{0, 0, 4, 5};
  auto g = gen_room_size(s, {});
  ASSERT_EQ(g.samples.size(), 1u);
  EXPECT_DOUBLE_EQ(numeric(g.samples[0]), 20.0);
  EXPECT_EQ(std::get<NumericAnswer>(g.samples[0].answer).unit, "m²");

  s = room({obj("a", "table", {1, 1, 0.5}, {2, 2, 1}), obj("b", "sofa", {3.5, 3.5, 0.5}, {1, 1, 1})});
  g = gen_room_size(s, {});
  ASSERT_EQ(g.samples.size(), 1u);
  EXPECT_DOUBLE_EQ(numeric(g.samples[0]), 16.0);

  s.floor_extent = FloorExtent{0, 0, 0, 5};
  g = gen_room_size(s, {});
  EXPECT_TRUE(g.samples.empty());
  EXPECT_EQ(g.tally.rejected.at("degenerate_area"), 1);
}

TEST(RoomSize, DerivedThreeByThree) {
  Scene s = room({obj("a", "table", {4.5, 4.5, 0.5}, {1, 1, 1}), obj("b", "sofa", {6.5, 6.5, 0.5}, {1, 1, 1})});
  const auto g = gen_room_size(s, {});
  ASSERT_EQ(g.samples.size(), 1u);
  EXPECT_DOUBLE_EQ(numeric(g.samples[0]), 9.0);
  EXPECT_TRUE(g.samples[0].provenance["derived_extent"].get<bool>());
}

TEST(Localization, PairsWithSingleImage) {
  const Scene s = room({obj("t", "table", {3, 4, 0.4}, {1, 1, 0.8}), obj("l", "lamp", {7, 6, 0.6}, {0.3, 0.3, 1.2})});
  const auto g = gen_abs_distance(s, {"v0"}, Modality::kSingleImage, {});
  ASSERT_EQ(g.samples.size(), 1u);
  const QASample loc = gen_localization(g.samples[0], s, "v0", {});
  const auto& boxes = std::get<BoxesAnswer>(loc.answer).boxes;
  ASSERT_EQ(boxes.size(), 2u);
  EXPECT_EQ(boxes[0].label, "table");
  const auto expect = *project_bbox(s.views[0], s.objects[0]);
  EXPECT_EQ(boxes[0].box.x_min, std::round(expect.x_min));
  EXPECT_EQ(boxes[0].box.y_max, std::round(expect.y_max));
  EXPECT_EQ(loc.task, TaskFamily::kObjectLocalization);
  EXPECT_EQ(loc.id, g.samples[0].id + "/loc");
  EXPECT_EQ(loc.question.rfind(g.samples[0].question, 0), 0u);

  const auto sizes = gen_obj_size(s, {"v0"}, Modality::kSingleImage, {});
  ASSERT_FALSE(sizes.samples.empty());
  EXPECT_EQ(std::get<BoxesAnswer>(gen_localization(sizes.samples[0], s, "v0", {}).answer).boxes.size(), 1u);

  QASample mv = g.samples[0];
  mv.modality = Modality::kMultiView;
  EXPECT_THROW(gen_localization(mv, s, "v0", {}), StagePairingError);
}

TEST(Localization, DuplicateCategory) {
  const Scene s = room({obj("c1", "chair", {3, 4, 0.4}, {0.5, 0.5, 0.8}), obj("c2", "chair", {6, 4, 0.4}, {0.5, 0.5, 0.8})});
  QASample paired;
  paired.id = "x";
  paired.modality = Modality::kSingleImage;
  paired.task = TaskFamily::kObjectSize;
  paired.provenance = {{"object_ids", {"c1"}}};
  EXPECT_THROW(gen_localization(paired, s, "v0", {}), UniquenessViolation);
}

QASample quota_sample(int i, const std::string& category, TaskFamily task = TaskFamily::kObjectSize) {
  QASample s;
  s.id = "q" + std::to_string(i);
  s.scene_id = "room";
  s.task = task;
  s.answer = NumericAnswer{1, "cm"};
  s.provenance = {{"categories", {category}}, {"object_ids", json::array()}};
  return s;
}

TEST(Quotas, Caps) {
  std::vector<QASample> many;
  for (int i = 0; i < 30; ++i) many.push_back(quota_sample(i, "cat" + std::to_string(i)));
  auto r = apply_quotas(many, {});
  EXPECT_EQ(r.kept.size(), 20u);
  EXPECT_EQ(r.dropped.at("scene_cap"), 10);

  std::vector<QASample> chairs;
  for (int i = 0; i < 5; ++i) chairs.push_back(quota_sample(i, "chair"));
  r = apply_quotas(chairs, {});
  EXPECT_EQ(r.kept.size(), 2u);
  EXPECT_EQ(r.dropped.at("category_cap"), 3);
}

TEST(Quotas, DeterministicAndOrdered) {
  std::vector<QASample> many;
  for (int i = 0; i < 60; ++i) many.push_back(quota_sample(i, "c" + std::to_string(i % 13)));
  SynthConfig cfg;
  cfg.seed = 42;
  const auto a = apply_quotas(many, cfg), b = apply_quotas(many, cfg);
  ASSERT_EQ(a.kept.size(), b.kept.size());
  for (std::size_t i = 0; i < a.kept.size(); ++i) EXPECT_EQ(a.kept[i].id, b.kept[i].id);
  for (std::size_t i = 1; i < a.kept.size(); ++i) {
    EXPECT_LT(std::stoi(a.kept[i - 1].id.substr(1)), std::stoi(a.kept[i].id.substr(1)));
  }
  cfg.seed = 43;
  const auto c = apply_quotas(many, cfg);
  bool differs = false;
  for (std::size_t i = 0; i < c.kept.size(); ++i) differs |= c.kept[i].id != a.kept[i].id;
  EXPECT_TRUE(differs);
}

TEST(MultiviewViews, UniformSpacing) {
  Scene s;
  for (int i = 0; i < 16; ++i) s.views.push_back(forward_camera("v" + std::to_string(i), i * 3));
  const auto v = select_multiview_views(s, 4);
  EXPECT_EQ(v, (std::vector<std::string>{"v0", "v5", "v10", "v15"}));
  EXPECT_EQ(select_multiview_views(s, 1), (std::vector<std::string>{"v0"}));
  EXPECT_EQ(select_multiview_views(s, 20).size(), 16u);
}

std::vector<Scene> fixture_pack(const std::string& dir) {
  std::vector<Scene> out;
  for (const char* name : {"bedroom", "kitchen", "living_room"}) {
    std::ifstream f(std::string(SPATIALKIT_FIXTURES) + "/" + dir + "/" + name + ".json");
    std::stringstream ss;
    ss << f.rdbuf();
    out.push_back(parse_scene(ss.str()));
  }
  return out;
}

std::string dump(const DatasetBundle& b) {
  std::ostringstream out;
  write_dataset_jsonl(out, b.samples);
  return out.str() + b.stats.dump();
}

TEST(Synthesize, Deterministic) {
  const auto scenes = fixture_pack("scenes");
  SynthConfig cfg;
  cfg.seed = 42;
  const auto a = synthesize(scenes, cfg), b = synthesize(scenes, cfg);
  EXPECT_EQ(dump(a), dump(b));
  EXPECT_GT(a.samples.size(), 0u);
  cfg.seed = 7;
  EXPECT_NE(dump(synthesize(scenes, cfg)), dump(a));
}

TEST(Synthesize, ImpossibleVisibility) {
  SynthConfig cfg;
  cfg.min_visibility = 1.01;
  const auto b = synthesize(fixture_pack("scenes"), cfg);
  EXPECT_TRUE(b.samples.empty());
  EXPECT_GT(b.stats["generated"].get<std::int64_t>(), 0);
  const auto& rejected = b.stats["rejected"];
  ASSERT_EQ(rejected.size(), 1u);
  EXPECT_EQ(rejected["visibility"], b.stats["generated"]);
}

TEST(Synthesize, InvalidSceneRejected) {
  auto scenes = fixture_pack("scenes");
  scenes[1].views[0].rotation[0] = 2.0;
  EXPECT_THROW(synthesize(scenes, {}), InvariantError);
}

TEST(Synthesize, OutputInvariants) {
  const auto scenes = fixture_pack("scenes");
  SynthConfig cfg;
  const auto b = synthesize(scenes, cfg);
  std::set<std::string> seen;
  std::map<std::string, int> per_scene_task;
  for (std::size_t i = 0; i < b.samples.size(); ++i) {
    const auto& s = b.samples[i];
    EXPECT_TRUE(seen.insert(s.id).second) << s.id;
    EXPECT_TRUE(task_allowed(s.task, s.modality)) << s.id;
    if (auto* c = std::get_if<ChoiceAnswer>(&s.answer)) {
      ASSERT_TRUE(s.options);
      EXPECT_LT(static_cast<std::size_t>(c->letter - 'A'), s.options->size());
    } else {
      EXPECT_FALSE(s.options);
    }
    if (s.modality == Modality::kSingleImage && s.task != TaskFamily::kObjectLocalization) {
      ASSERT_LT(i + 1, b.samples.size());
      EXPECT_EQ(b.samples[i + 1].id, s.id + "/loc");
    }
    if (s.task != TaskFamily::kObjectLocalization) {
      EXPECT_LE(++per_scene_task[s.scene_id + "/" + std::string(to_string(s.task))], cfg.per_scene_cap);
    }
  }
  EXPECT_TRUE(testing::soundness_violations(scenes, b.samples, cfg).empty());
  EXPECT_EQ(b.stats["kept"].get<std::size_t>() + b.stats["localization"].get<std::size_t>(), b.samples.size());
}

TEST(Synthesize, AdversarialPackMostlyRejected) {
  std::vector<Scene> scenes;
  for (int i = 0; i < 3; ++i) {
    std::ifstream f(std::string(SPATIALKIT_FIXTURES) + "/adversarial/adversarial_" + std::to_string(i) + ".json");
    std::stringstream ss;
    ss << f.rdbuf();
    scenes.push_back(parse_scene(ss.str()));
  }
  const auto b = synthesize(scenes, {});
  const double kept = b.stats["kept"].get<double>();
  const double generated = b.stats["generated"].get<double>();
  EXPECT_LE(kept / generated, 0.5);
}

TEST(Synthesize, RandomScenesSound) {
  SplitMix64 rng(99);
  std::vector<Scene> scenes;
  for (int i = 0; i < 10; ++i) scenes.push_back(testing::random_scene(rng, "r" + std::to_string(i)));
  SynthConfig cfg;
  const auto b = synthesize(scenes, cfg);
  const auto violations = testing::soundness_violations(scenes, b.samples, cfg);
  EXPECT_TRUE(violations.empty()) << violations.front();
}

TEST(Names, RoundTrip) {
  for (auto t : {TaskFamily::kObjectCounting, TaskFamily::kAbsoluteDistance, TaskFamily::kObjectSize,
                 TaskFamily::kRoomSize, TaskFamily::kRelativeDistance, TaskFamily::kRelativeDirection,
                 TaskFamily::kAppearanceOrder, TaskFamily::kObjectLocalization}) {
    EXPECT_EQ(task_from_string(to_string(t)), t);
  }
  for (auto m : {Modality::kSingleImage, Modality::kMultiView, Modality::kVideo}) {
    EXPECT_EQ(modality_from_string(to_string(m)), m);
  }
  EXPECT_FALSE(task_from_string("route_plan"));
}

}  // namespace
}  // namespace spatialkit
