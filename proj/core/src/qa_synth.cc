#include "spatialkit/qa_synth.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <cstdio>
#include <set>

#include "spatialkit/errors.h"
#include "spatialkit/prompts.h"
#include "spatialkit/rng.h"

namespace spatialkit {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<TaskFamily, std::string_view>, 8> kTaskNames = {{
    {TaskFamily::kObjectCounting, "object_counting"},
    {TaskFamily::kAbsoluteDistance, "absolute_distance"},
    {TaskFamily::kObjectSize, "object_size"},
    {TaskFamily::kRoomSize, "room_size"},
    {TaskFamily::kRelativeDistance, "relative_distance"},
    {TaskFamily::kRelativeDirection, "relative_direction"},
    {TaskFamily::kAppearanceOrder, "appearance_order"},
    {TaskFamily::kObjectLocalization, "object_localization"},
}};

constexpr std::array<std::pair<Modality, std::string_view>, 3> kModalityNames = {{
    {Modality::kSingleImage, "single_image"},
    {Modality::kMultiView, "multi_view"},
    {Modality::kVideo, "video"},
}};

std::string_view short_name(Modality m) {
  switch (m) {
    case Modality::kSingleImage: return "si";
    case Modality::kMultiView: return "mv";
    case Modality::kVideo: return "video";
  }
  return "";
}

double round_to(double value, double step) { return std::round(value / step) * step; }
double round1(double value) { return std::round(value * 10.0) / 10.0; }

}  // namespace

std::string_view to_string(TaskFamily task) {
  for (const auto& [t, name] : kTaskNames) {
    if (t == task) return name;
  }
  return "";
}

std::string_view to_string(Modality modality) {
  for (const auto& [m, name] : kModalityNames) {
    if (m == modality) return name;
  }
  return "";
}

std::optional<TaskFamily> task_from_string(std::string_view text) {
  for (const auto& [t, name] : kTaskNames) {
    if (name == text) return t;
  }
  return std::nullopt;
}

std::optional<Modality> modality_from_string(std::string_view text) {
  for (const auto& [m, name] : kModalityNames) {
    if (name == text) return m;
  }
  return std::nullopt;
}

bool task_allowed(TaskFamily task, Modality modality) {
  switch (task) {
    case TaskFamily::kObjectCounting: return modality != Modality::kSingleImage;
    case TaskFamily::kAbsoluteDistance:
    case TaskFamily::kObjectSize:
    case TaskFamily::kRelativeDistance:
    case TaskFamily::kRelativeDirection: return true;
    case TaskFamily::kRoomSize:
    case TaskFamily::kAppearanceOrder: return modality == Modality::kVideo;
    case TaskFamily::kObjectLocalization: return modality == Modality::kSingleImage;
  }
  return false;
}

bool is_numeric_task(TaskFamily task) {
  return task == TaskFamily::kObjectCounting || task == TaskFamily::kAbsoluteDistance ||
         task == TaskFamily::kObjectSize || task == TaskFamily::kRoomSize;
}

AnswerKind answer_kind(const Answer& answer) {
  return static_cast<AnswerKind>(answer.index());
}

std::string_view to_string(AnswerKind kind) {
  switch (kind) {
    case AnswerKind::kNumeric: return "numeric";
    case AnswerKind::kChoice: return "choice";
    case AnswerKind::kBoxes: return "boxes";
  }
  return "";
}

Tally& Tally::operator+=(const Tally& other) {
  generated += other.generated;
  for (const auto& [reason, n] : other.rejected) rejected[reason] += n;
  return *this;
}

namespace {

// Per-call view of a scene restricted to a set of context views, with the
// visibility of every object precomputed.
struct Context {
  const Scene& scene;
  Modality modality;
  const SynthConfig& cfg;
  std::vector<const CameraView*> views;
  std::vector<double> vis;       // best ratio over the context views
  std::vector<bool> appears;     // ratio > 0 in at least one context view
  std::map<std::string, int> appearing_per_category;
  std::string id_prefix;
  std::vector<std::string> view_ids;

  Context(const Scene& s, const std::vector<std::string>& ids, Modality m, const SynthConfig& c)
      : scene(s), modality(m), cfg(c), view_ids(ids) {
    for (const auto& id : ids) {
      const CameraView* v = scene.find_view(id);
      if (!v) throw InvariantError(scene.id + ": unknown view id '" + id + "'");
      views.push_back(v);
    }
    vis.assign(scene.objects.size(), 0.0);
    appears.assign(scene.objects.size(), false);
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
      for (const CameraView* v : views) {
        const double r = visibility_ratio(*v, scene.objects[i]);
        vis[i] = std::max(vis[i], r);
        if (r > 0.0) appears[i] = true;
      }
      if (appears[i]) ++appearing_per_category[scene.objects[i].category];
    }
    id_prefix = scene.id + "/" + std::string(short_name(m));
    if (m == Modality::kSingleImage && ids.size() == 1) id_prefix += "/" + ids.front();
  }

  const Object3D& obj(std::size_t i) const { return scene.objects[i]; }

  bool visible(std::size_t i) const { return vis[i] >= cfg.min_visibility; }
  bool blacklisted(std::size_t i) const { return cfg.category_blacklist.count(obj(i).category) > 0; }

  // Unique when no other instance of the category shows up in the context.
  bool unique(std::size_t i) const {
    auto it = appearing_per_category.find(obj(i).category);
    const int count = it == appearing_per_category.end() ? 0 : it->second;
    return count - (appears[i] ? 1 : 0) == 0;
  }

  // First failing per-object filter, in fixed order.
  std::optional<std::string_view> object_filter(std::initializer_list<std::size_t> ids) const {
    for (auto i : ids) {
      if (!visible(i)) return reasons::kVisibility;
    }
    for (auto i : ids) {
      if (blacklisted(i)) return reasons::kBlacklist;
    }
    std::set<std::string> categories;
    for (auto i : ids) {
      if (!categories.insert(obj(i).category).second || !unique(i)) return reasons::kNotUnique;
    }
    return std::nullopt;
  }

  double distance(std::size_t a, std::size_t b) const {
    return cfg.abs_distance_mode == DistanceMode::kCentroid ? centroid_distance(obj(a), obj(b))
                                                            : closest_point_distance(obj(a), obj(b));
  }

  json visibility_json(std::initializer_list<std::size_t> ids) const {
    json out = json::object();
    for (auto i : ids) out[obj(i).id] = vis[i];
    return out;
  }

  json base_provenance(std::initializer_list<std::size_t> ids) const {
    json p = json::object();
    json object_ids = json::array();
    json categories = json::array();
    for (auto i : ids) {
      object_ids.push_back(obj(i).id);
      categories.push_back(obj(i).category);
    }
    p["object_ids"] = object_ids;
    p["categories"] = categories;
    p["visibility"] = visibility_json(ids);
    p["min_visibility"] = cfg.min_visibility;
    return p;
  }

  QASample make(TaskFamily task, std::size_t seq, std::string question, Answer answer,
                std::optional<std::vector<std::string>> options, json provenance) const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%05zu", seq);
    QASample s;
    s.id = id_prefix + "/" + std::string(to_string(task)) + "/" + buf;
    s.task = task;
    s.modality = modality;
    s.scene_id = scene.id;
    s.view_ids = view_ids;
    if (options) question = templates::with_options(std::move(question), *options);
    s.question = std::move(question);
    s.options = std::move(options);
    s.answer = std::move(answer);
    s.provenance = std::move(provenance);
    return s;
  }

  std::string sample_key(TaskFamily task, std::size_t seq) const {
    return id_prefix + "/" + std::string(to_string(task)) + "/" + std::to_string(seq);
  }
};

std::vector<std::string> categories_sorted(const Scene& scene) {
  std::set<std::string> cats;
  for (const auto& o : scene.objects) cats.insert(o.category);
  return {cats.begin(), cats.end()};
}

std::vector<std::string> all_view_ids(const Scene& scene) {
  std::vector<std::string> ids;
  for (const auto& v : scene.views) ids.push_back(v.id);
  return ids;
}

char letter_of(const std::vector<std::string>& options, const std::string& value) {
  auto it = std::find(options.begin(), options.end(), value);
  return static_cast<char>('A' + (it - options.begin()));
}

}  // namespace

Generated gen_counting(const Scene& scene, const std::vector<std::string>& view_ids,
                       Modality modality, const SynthConfig& cfg) {
  Generated out;
  if (view_ids.empty() || !task_allowed(TaskFamily::kObjectCounting, modality)) return out;
  const Context ctx(scene, view_ids, modality, cfg);
  for (const auto& category : categories_sorted(scene)) {
    ++out.tally.generated;
    json instance_ids = json::array();
    json visibility = json::object();
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
      if (scene.objects[i].category == category && ctx.visible(i)) {
        instance_ids.push_back(scene.objects[i].id);
        visibility[scene.objects[i].id] = ctx.vis[i];
      }
    }
    if (instance_ids.empty()) {
      out.tally.reject(reasons::kVisibility);
      continue;
    }
    if (cfg.category_blacklist.count(category)) {
      out.tally.reject(reasons::kBlacklist);
      continue;
    }
    json prov = {{"object_ids", instance_ids},
                 {"categories", json::array({category})},
                 {"visibility", visibility},
                 {"min_visibility", cfg.min_visibility}};
    const auto count = static_cast<double>(instance_ids.size());
    out.samples.push_back(ctx.make(TaskFamily::kObjectCounting, out.samples.size(),
                                   templates::counting(category), NumericAnswer{count, "count"},
                                   std::nullopt, std::move(prov)));
  }
  return out;
}

Generated gen_abs_distance(const Scene& scene, const std::vector<std::string>& view_ids,
                           Modality modality, const SynthConfig& cfg) {
  Generated out;
  if (view_ids.empty()) return out;
  const Context ctx(scene, view_ids, modality, cfg);
  const std::size_t n = scene.objects.size();
  const bool closest = cfg.abs_distance_mode == DistanceMode::kClosestPoint;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      ++out.tally.generated;
      if (auto reason = ctx.object_filter({a, b})) {
        out.tally.reject(*reason);
        continue;
      }
      const double dist = ctx.distance(a, b);
      const double size_a = max_dimension_cm(ctx.obj(a));
      const double size_b = max_dimension_cm(ctx.obj(b));
      const double min_size_m = std::min(size_a, size_b) / 100.0;
      const double answer = round1(dist);
      if (!(dist > min_size_m) || answer <= 0.0) {
        out.tally.reject(reasons::kMinSeparation);
        continue;
      }
      json prov = ctx.base_provenance({a, b});
      prov["distance_m"] = dist;
      prov["distance_mode"] = std::string(to_string(cfg.abs_distance_mode));
      prov["min_size_m"] = min_size_m;
      prov["sizes_cm"] = {size_a, size_b};
      out.samples.push_back(ctx.make(
          TaskFamily::kAbsoluteDistance, out.samples.size(),
          templates::absolute_distance(ctx.obj(a).category, ctx.obj(b).category, closest),
          NumericAnswer{answer, "m"}, std::nullopt, std::move(prov)));
    }
  }
  return out;
}

Generated gen_obj_size(const Scene& scene, const std::vector<std::string>& view_ids,
                       Modality modality, const SynthConfig& cfg) {
  Generated out;
  if (view_ids.empty()) return out;
  const Context ctx(scene, view_ids, modality, cfg);
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    ++out.tally.generated;
    if (auto reason = ctx.object_filter({i})) {
      out.tally.reject(*reason);
      continue;
    }
    const double size_cm = max_dimension_cm(ctx.obj(i));
    if (size_cm < cfg.size_min_cm || size_cm > cfg.size_max_cm) {
      out.tally.reject(reasons::kSizeRange);
      continue;
    }
    json prov = ctx.base_provenance({i});
    prov["size_cm"] = size_cm;
    prov["size_range_cm"] = {cfg.size_min_cm, cfg.size_max_cm};
    out.samples.push_back(ctx.make(TaskFamily::kObjectSize, out.samples.size(),
                                   templates::object_size(ctx.obj(i).category),
                                   NumericAnswer{round_to(size_cm, 1.0), "cm"}, std::nullopt,
                                   std::move(prov)));
  }
  return out;
}

Generated gen_rel_distance(const Scene& scene, const std::vector<std::string>& view_ids,
                           Modality modality, const SynthConfig& cfg) {
  Generated out;
  if (view_ids.empty()) return out;
  const Context ctx(scene, view_ids, modality, cfg);
  const std::size_t n = scene.objects.size();
  const bool closest = cfg.abs_distance_mode == DistanceMode::kClosestPoint;
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t a = 0; a < n; ++a) {
      if (a == t) continue;
      for (std::size_t b = a + 1; b < n; ++b) {
        if (b == t) continue;
        ++out.tally.generated;
        if (auto reason = ctx.object_filter({t, a, b})) {
          out.tally.reject(*reason);
          continue;
        }
        const double d_a = ctx.distance(t, a);
        const double d_b = ctx.distance(t, b);
        const double lo = std::min(d_a, d_b);
        const double hi = std::max(d_a, d_b);
        if (!(lo > 0.0)) {
          out.tally.reject(reasons::kZeroDistance);
          continue;
        }
        const double ratio = hi / lo;
        if (ratio < cfg.rel_dist_ratio) {
          out.tally.reject(reasons::kDistanceRatio);
          continue;
        }
        const std::size_t seq = out.samples.size();
        auto rng = derive_rng(cfg.seed, ctx.sample_key(TaskFamily::kRelativeDistance, seq));
        std::vector<std::string> options{ctx.obj(a).category, ctx.obj(b).category};
        rng.shuffle(options);
        const std::string& closer = d_a < d_b ? ctx.obj(a).category : ctx.obj(b).category;

        json prov = ctx.base_provenance({t, a, b});
        prov["target"] = ctx.obj(t).id;
        prov["candidates"] = {ctx.obj(a).id, ctx.obj(b).id};
        prov["distances_m"] = {d_a, d_b};
        prov["distance_mode"] = std::string(to_string(cfg.abs_distance_mode));
        prov["ratio"] = ratio;
        prov["rel_dist_ratio"] = cfg.rel_dist_ratio;
        std::string question = templates::relative_distance(options[0], options[1],
                                                             ctx.obj(t).category, closest);
        const char letter = letter_of(options, closer);
        out.samples.push_back(ctx.make(TaskFamily::kRelativeDistance, seq, std::move(question),
                                       ChoiceAnswer{letter}, std::move(options), std::move(prov)));
      }
    }
  }
  return out;
}

namespace {

std::vector<std::string> direction_options(DirectionLabel truth, std::span<const DirectionLabel> set,
                                           SplitMix64& rng) {
  std::vector<std::string> others;
  for (auto l : set) {
    if (l != truth) others.emplace_back(to_string(l));
  }
  rng.shuffle(others);
  std::vector<std::string> options{std::string(to_string(truth))};
  for (std::size_t i = 0; i < 3 && i < others.size(); ++i) options.push_back(others[i]);
  rng.shuffle(options);
  return options;
}

void gen_direction_single(const Context& ctx, Generated& out) {
  const CameraView& view = *ctx.views.front();
  const auto& m = ctx.cfg.margins;
  const std::size_t n = ctx.scene.objects.size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      ++out.tally.generated;
      if (auto reason = ctx.object_filter({a, b})) {
        out.tally.reject(*reason);
        continue;
      }
      auto offsets = single_image_offsets(view, ctx.obj(a), ctx.obj(b));
      if (!offsets) {
        out.tally.reject(reasons::kDegenerateGeometry);
        continue;
      }
      auto label = classify_single_image(*offsets, m);
      if (!label) {
        out.tally.reject(reasons::kDirectionAmbiguous);
        continue;
      }
      const std::size_t seq = out.samples.size();
      auto rng = derive_rng(ctx.cfg.seed, ctx.sample_key(TaskFamily::kRelativeDirection, seq));
      auto options = direction_options(*label, single_image_labels(), rng);
      json prov = ctx.base_provenance({a, b});
      prov["du"] = offsets->du;
      prov["dz"] = offsets->dz;
      prov["eps_x"] = m.eps_x;
      prov["eps_z"] = m.eps_z;
      prov["label"] = std::string(to_string(*label));
      std::string question = templates::direction_single(ctx.obj(a).category, ctx.obj(b).category, options);
      const char letter = letter_of(options, std::string(to_string(*label)));
      out.samples.push_back(ctx.make(TaskFamily::kRelativeDirection, seq, std::move(question),
                                     ChoiceAnswer{letter}, std::move(options), std::move(prov)));
    }
  }
}

void gen_direction_quadrant(const Context& ctx, Generated& out) {
  const double margin = ctx.cfg.margins.axis_margin_deg;
  const std::size_t n = ctx.scene.objects.size();
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t o = 0; o < n; ++o) {
      if (o == p) continue;
      for (std::size_t q = 0; q < n; ++q) {
        if (q == p || q == o) continue;
        ++out.tally.generated;
        if (auto reason = ctx.object_filter({p, o, q})) {
          out.tally.reject(*reason);
          continue;
        }
        std::optional<MultiviewDirection> dir;
        try {
          dir = relative_direction_multiview(ctx.obj(p), ctx.obj(o), ctx.obj(q), margin);
        } catch (const DegenerateGeometry&) {
          out.tally.reject(reasons::kDegenerateGeometry);
          continue;
        }
        if (!dir) {
          out.tally.reject(reasons::kDirectionAmbiguous);
          continue;
        }
        const auto& c = dir->computation;
        const std::size_t seq = out.samples.size();
        auto rng = derive_rng(ctx.cfg.seed, ctx.sample_key(TaskFamily::kRelativeDirection, seq));
        auto options = direction_options(dir->label, quadrant_labels(), rng);
        json prov = ctx.base_provenance({p, o, q});
        prov["roles"] = {{"positioning", ctx.obj(p).id},
                         {"orienting", ctx.obj(o).id},
                         {"querying", ctx.obj(q).id}};
        prov["vec_a"] = c.vec_a;
        prov["vec_b"] = c.vec_b;
        prov["theta_deg"] = c.theta_deg;
        prov["signed_phi_deg"] = c.signed_phi_deg;
        prov["x_rot"] = c.x_rot;
        prov["y_rot"] = c.y_rot;
        prov["axis_distance_deg"] = axis_distance_deg(c);
        prov["axis_margin_deg"] = margin;
        prov["label"] = std::string(to_string(dir->label));
        std::string question = templates::direction_quadrant(
            ctx.obj(p).category, ctx.obj(o).category, ctx.obj(q).category, options);
        const char letter = letter_of(options, std::string(to_string(dir->label)));
        out.samples.push_back(ctx.make(TaskFamily::kRelativeDirection, seq, std::move(question),
                                       ChoiceAnswer{letter}, std::move(options), std::move(prov)));
      }
    }
  }
}

}  // namespace

Generated gen_rel_direction(const Scene& scene, const std::vector<std::string>& view_ids,
                            Modality modality, const SynthConfig& cfg) {
  Generated out;
  if (view_ids.empty()) return out;
  const Context ctx(scene, view_ids, modality, cfg);
  if (modality == Modality::kSingleImage) {
    if (view_ids.size() != 1) throw InvariantError("single-image direction needs exactly one view");
    gen_direction_single(ctx, out);
  } else {
    gen_direction_quadrant(ctx, out);
  }
  return out;
}

Generated gen_appearance_order(const Scene& scene, const SynthConfig& cfg) {
  Generated out;
  const auto categories = categories_sorted(scene);
  if (categories.size() < 4 || scene.views.empty()) return out;
  const Context ctx(scene, all_view_ids(scene), Modality::kVideo, cfg);

  // First frame at which some instance of each category clears the
  // visibility threshold.
  std::map<std::string, std::int64_t> first_frame;
  for (const auto& view : scene.views) {
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
      const auto& o = scene.objects[i];
      if (first_frame.count(o.category) || ctx.vis[i] < cfg.min_visibility) continue;
      if (visibility_ratio(view, o) >= cfg.min_visibility) first_frame[o.category] = view.frame_index;
    }
  }

  const std::size_t k = categories.size();
  for (std::size_t i0 = 0; i0 < k; ++i0) {
    for (std::size_t i1 = i0 + 1; i1 < k; ++i1) {
      for (std::size_t i2 = i1 + 1; i2 < k; ++i2) {
        for (std::size_t i3 = i2 + 1; i3 < k; ++i3) {
          ++out.tally.generated;
          const std::vector<std::string> picked{categories[i0], categories[i1], categories[i2],
                                                categories[i3]};
          if (std::any_of(picked.begin(), picked.end(),
                          [&](const std::string& c) { return !first_frame.count(c); })) {
            out.tally.reject(reasons::kVisibility);
            continue;
          }
          if (std::any_of(picked.begin(), picked.end(),
                          [&](const std::string& c) { return cfg.category_blacklist.count(c) > 0; })) {
            out.tally.reject(reasons::kBlacklist);
            continue;
          }
          std::vector<std::string> order = picked;
          std::stable_sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
            return first_frame[a] < first_frame[b];
          });
          std::int64_t min_gap = std::numeric_limits<std::int64_t>::max();
          for (std::size_t j = 1; j < order.size(); ++j) {
            min_gap = std::min(min_gap, first_frame[order[j]] - first_frame[order[j - 1]]);
          }
          if (min_gap < cfg.appearance_gap_frames) {
            out.tally.reject(reasons::kAppearanceGap);
            continue;
          }

          const std::size_t seq = out.samples.size();
          auto rng = derive_rng(cfg.seed, ctx.sample_key(TaskFamily::kAppearanceOrder, seq));
          auto join = [](const std::vector<std::string>& v) {
            std::string s;
            for (std::size_t j = 0; j < v.size(); ++j) s += (j ? ", " : "") + v[j];
            return s;
          };
          const std::string correct = join(order);
          std::vector<std::string> options{correct};
          while (options.size() < 4) {
            auto perm = order;
            rng.shuffle(perm);
            const std::string text = join(perm);
            if (std::find(options.begin(), options.end(), text) == options.end()) options.push_back(text);
          }
          rng.shuffle(options);

          json prov = json::object();
          prov["categories"] = picked;
          prov["object_ids"] = json::array();
          json frames = json::object();
          for (const auto& c : picked) frames[c] = first_frame[c];
          prov["first_frames"] = frames;
          prov["min_gap_frames"] = min_gap;
          prov["gap_required"] = cfg.appearance_gap_frames;
          prov["min_visibility"] = cfg.min_visibility;
          prov["order"] = order;
          const char letter = letter_of(options, correct);
          out.samples.push_back(ctx.make(TaskFamily::kAppearanceOrder, seq,
                                         templates::appearance_order(picked), ChoiceAnswer{letter},
                                         std::move(options), std::move(prov)));
        }
      }
    }
  }
  return out;
}

Generated gen_room_size(const Scene& scene, const SynthConfig& cfg) {
  Generated out;
  if (scene.views.empty()) return out;
  const Context ctx(scene, all_view_ids(scene), Modality::kVideo, cfg);
  ++out.tally.generated;
  bool observed = false;
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    if (ctx.visible(i) && !ctx.blacklisted(i)) observed = true;
  }
  if (!observed) {
    out.tally.reject(reasons::kVisibility);
    return out;
  }
  auto extent = scene.effective_floor_extent();
  const double area = extent ? extent->area() : 0.0;
  if (!(area > 0.0) || round1(area) <= 0.0) {
    out.tally.reject(reasons::kDegenerateArea);
    return out;
  }
  json prov = json::object();
  prov["categories"] = json::array();
  prov["object_ids"] = json::array();
  prov["floor_extent"] = {extent->min_x, extent->min_y, extent->max_x, extent->max_y};
  prov["derived_extent"] = !scene.floor_extent.has_value();
  prov["area_m2"] = area;
  out.samples.push_back(ctx.make(TaskFamily::kRoomSize, 0, templates::room_size(),
                                 NumericAnswer{round1(area), "m²"}, std::nullopt, std::move(prov)));
  return out;
}

QASample gen_localization(const QASample& paired, const Scene& scene, const std::string& view_id,
                          const SynthConfig&) {
  if (paired.modality != Modality::kSingleImage) {
    throw StagePairingError("localization pairs only with single-image samples: " + paired.id);
  }
  const CameraView* view = scene.find_view(view_id);
  if (!view) throw InvariantError(scene.id + ": unknown view id '" + view_id + "'");

  BoxesAnswer answer;
  json object_ids = json::array();
  json categories = json::array();
  for (const auto& id_json : paired.provenance.at("object_ids")) {
    const auto id = id_json.get<std::string>();
    const Object3D* obj = scene.find_object(id);
    if (!obj) throw InvariantError(scene.id + ": unknown object id '" + id + "'");
    int appearing = 0;
    for (const auto& other : scene.objects) {
      if (other.category == obj->category && visibility_ratio(*view, other) > 0.0) ++appearing;
    }
    if (appearing > 1) {
      throw UniquenessViolation("category '" + obj->category + "' appears " +
                                std::to_string(appearing) + " times in view " + view_id);
    }
    auto box = project_bbox(*view, *obj);
    if (!box) throw DegenerateGeometry("object '" + id + "' is behind view " + view_id);
    answer.boxes.push_back({obj->category,
                            {std::round(box->x_min), std::round(box->y_min), std::round(box->x_max),
                             std::round(box->y_max)}});
    object_ids.push_back(id);
    categories.push_back(obj->category);
  }

  QASample s;
  s.id = paired.id + "/loc";
  s.task = TaskFamily::kObjectLocalization;
  s.modality = Modality::kSingleImage;
  s.scene_id = scene.id;
  s.view_ids = {view_id};
  s.question = templates::localization(paired.question);
  s.answer = std::move(answer);
  s.provenance = {{"paired_id", paired.id}, {"object_ids", object_ids}, {"categories", categories}};
  return s;
}

std::vector<std::string> select_multiview_views(const Scene& scene, int count) {
  const std::size_t n = scene.views.size();
  std::vector<std::string> ids;
  if (count <= 0) return ids;
  if (n <= static_cast<std::size_t>(count)) return all_view_ids(scene);
  if (count == 1) return {scene.views.front().id};
  for (int i = 0; i < count; ++i) {
    const double pos = static_cast<double>(i) * static_cast<double>(n - 1) / (count - 1);
    ids.push_back(scene.views[static_cast<std::size_t>(std::llround(pos))].id);
  }
  return ids;
}

namespace {

json tally_json(const Tally& t) {
  json rejected = json::object();
  for (const auto& [reason, n] : t.rejected) rejected[reason] = n;
  return {{"generated", t.generated}, {"rejected", rejected}};
}

}  // namespace

DatasetBundle synthesize(std::span<const Scene> scenes, const SynthConfig& cfg) {
  cfg.validate();
  std::vector<QASample> candidates;
  Tally total;
  std::map<std::string, Tally> per_cell;

  auto absorb = [&](Generated g, Modality m, TaskFamily t) {
    const std::string cell = std::string(to_string(m)) + "/" + std::string(to_string(t));
    per_cell[cell] += g.tally;
    total += g.tally;
    for (auto& s : g.samples) candidates.push_back(std::move(s));
  };

  for (const Scene& scene : scenes) {
    auto violations = validate_scene(scene);
    if (!violations.empty()) {
      const auto& v = violations.front();
      throw InvariantError(scene.id + ": " + v.entity_id + ": " + v.rule + " (" + v.detail + ")");
    }

    for (const auto& view : scene.views) {
      const std::vector<std::string> ids{view.id};
      absorb(gen_abs_distance(scene, ids, Modality::kSingleImage, cfg), Modality::kSingleImage,
             TaskFamily::kAbsoluteDistance);
      absorb(gen_obj_size(scene, ids, Modality::kSingleImage, cfg), Modality::kSingleImage,
             TaskFamily::kObjectSize);
      absorb(gen_rel_distance(scene, ids, Modality::kSingleImage, cfg), Modality::kSingleImage,
             TaskFamily::kRelativeDistance);
      absorb(gen_rel_direction(scene, ids, Modality::kSingleImage, cfg), Modality::kSingleImage,
             TaskFamily::kRelativeDirection);
    }

    const auto mv = select_multiview_views(scene, cfg.views_per_multiview);
    if (mv.size() >= 2) {
      absorb(gen_counting(scene, mv, Modality::kMultiView, cfg), Modality::kMultiView,
             TaskFamily::kObjectCounting);
      absorb(gen_abs_distance(scene, mv, Modality::kMultiView, cfg), Modality::kMultiView,
             TaskFamily::kAbsoluteDistance);
      absorb(gen_obj_size(scene, mv, Modality::kMultiView, cfg), Modality::kMultiView,
             TaskFamily::kObjectSize);
      absorb(gen_rel_distance(scene, mv, Modality::kMultiView, cfg), Modality::kMultiView,
             TaskFamily::kRelativeDistance);
      absorb(gen_rel_direction(scene, mv, Modality::kMultiView, cfg), Modality::kMultiView,
             TaskFamily::kRelativeDirection);
    }

    const auto timeline = all_view_ids(scene);
    if (!timeline.empty()) {
      absorb(gen_counting(scene, timeline, Modality::kVideo, cfg), Modality::kVideo,
             TaskFamily::kObjectCounting);
      absorb(gen_abs_distance(scene, timeline, Modality::kVideo, cfg), Modality::kVideo,
             TaskFamily::kAbsoluteDistance);
      absorb(gen_obj_size(scene, timeline, Modality::kVideo, cfg), Modality::kVideo,
             TaskFamily::kObjectSize);
      absorb(gen_room_size(scene, cfg), Modality::kVideo, TaskFamily::kRoomSize);
      absorb(gen_rel_distance(scene, timeline, Modality::kVideo, cfg), Modality::kVideo,
             TaskFamily::kRelativeDistance);
      absorb(gen_rel_direction(scene, timeline, Modality::kVideo, cfg), Modality::kVideo,
             TaskFamily::kRelativeDirection);
      absorb(gen_appearance_order(scene, cfg), Modality::kVideo, TaskFamily::kAppearanceOrder);
    }
  }

  const std::int64_t passed = static_cast<std::int64_t>(candidates.size());
  QuotaResult quota = apply_quotas(std::move(candidates), cfg);

  std::map<std::string, const Scene*> by_id;
  for (const Scene& s : scenes) by_id[s.id] = &s;

  DatasetBundle bundle;
  std::map<std::string, std::int64_t> kept_per_cell;
  std::int64_t localization = 0;
  for (auto& sample : quota.kept) {
    ++kept_per_cell[std::string(to_string(sample.modality)) + "/" + std::string(to_string(sample.task))];
    std::optional<QASample> loc;
    if (sample.modality == Modality::kSingleImage) {
      loc = gen_localization(sample, *by_id.at(sample.scene_id), sample.view_ids.front(), cfg);
    }
    bundle.samples.push_back(std::move(sample));
    if (loc) {
      bundle.samples.push_back(std::move(*loc));
      ++localization;
    }
  }

  json cells = json::object();
  for (const auto& [cell, tally] : per_cell) {
    json c = tally_json(tally);
    c["kept"] = kept_per_cell[cell];
    cells[cell] = c;
  }
  json dropped = json::object();
  for (const auto& [reason, n] : quota.dropped) dropped[reason] = n;

  const auto kept = static_cast<std::int64_t>(quota.kept.size());
  json stats = tally_json(total);
  stats["scenes"] = scenes.size();
  stats["passed_filters"] = passed;
  stats["dropped_by_quota"] = dropped;
  stats["kept"] = kept;
  stats["localization"] = localization;
  stats["kept_fraction"] = total.generated > 0 ? static_cast<double>(kept) / total.generated : 0.0;
  stats["per_cell"] = cells;
  bundle.stats = std::move(stats);
  return bundle;
}

}  // namespace spatialkit
