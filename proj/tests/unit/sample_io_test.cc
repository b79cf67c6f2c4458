#include <sstream>

#include <gtest/gtest.h>

#include "spatialkit/errors.h"
#include "spatialkit/prompts.h"
#include "spatialkit/sample_io.h"

namespace spatialkit {
namespace {

std::vector<QASample> samples() {
  QASample n;
  n.id = "s/absolute_distance/00000";
  n.task = TaskFamily::kAbsoluteDistance;
  n.modality = Modality::kVideo;
  n.scene_id = "s";
  n.view_ids = {"v0", "v1"};
  n.question = "How far?";
  n.answer = NumericAnswer{2.5, "m"};
  n.provenance = {{"object_ids", {"a", "b"}}, {"distance_m", 2.4999}};

  QASample c;
  c.id = "s/relative_direction/00001";
  c.task = TaskFamily::kRelativeDirection;
  c.modality = Modality::kSingleImage;
  c.scene_id = "s";
  c.view_ids = {"v0"};
  c.options = std::vector<std::string>{"left", "right", "above", "below"};
  c.question = templates::with_options("Where?", *c.options);
  c.answer = ChoiceAnswer{'C'};

  QASample l;
  l.id = c.id + "/loc";
  l.task = TaskFamily::kObjectLocalization;
  l.modality = Modality::kSingleImage;
  l.scene_id = "s";
  l.view_ids = {"v0"};
  l.question = templates::localization("Where?");
  l.answer = BoxesAnswer{{{"lamp", {1, 2, 30, 40}}, {"bed", {50, 60, 200, 300}}}};
  return {n, c, l};
}

TEST(SampleIo, RoundTrip) {
  const auto in = samples();
  std::stringstream buf;
  write_dataset_jsonl(buf, in);
  const auto text = buf.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  const auto out = read_dataset_jsonl(buf);
  ASSERT_EQ(out.size(), in.size());
  for (std::size_t i = 0; i < in.size(); ++i) EXPECT_EQ(out[i], in[i]) << i;
}

TEST(SampleIo, PromptsEmbedded) {
  const auto s = samples();
  const auto n = sample_to_json(s[0]);
  EXPECT_EQ(n["prompt_stage2"], assemble_prompt(s[0], 2));
  EXPECT_EQ(n["prompt_stage3"], assemble_prompt(s[0], 3));
  EXPECT_TRUE(n["options"].is_null());
  const auto l = sample_to_json(s[2]);
  EXPECT_TRUE(l["prompt_stage2"].is_null());
  EXPECT_EQ(l["answer"]["kind"], "boxes");
  EXPECT_EQ(sample_to_json(s[1])["answer"]["letter"], "C");
}

TEST(SampleIo, SchemaErrors) {
  auto doc = sample_to_json(samples()[0]);
  auto bad = doc;
  bad["task"] = "juggling";
  EXPECT_THROW(sample_from_json(bad), SchemaError);
  bad = doc;
  bad.erase("answer");
  EXPECT_THROW(sample_from_json(bad), SchemaError);
  bad = doc;
  bad["answer"] = {{"kind", "essay"}};
  EXPECT_THROW(sample_from_json(bad), SchemaError);
  std::stringstream garbage("{not json}\n");
  EXPECT_THROW(read_dataset_jsonl(garbage), InputError);
}

}  // namespace
}  // namespace spatialkit
