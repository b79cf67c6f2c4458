#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "spatialkit/config.h"
#include "spatialkit/geometry.h"
#include "spatialkit/scene.h"

namespace spatialkit {

enum class TaskFamily {
  kObjectCounting,
  kAbsoluteDistance,
  kObjectSize,
  kRoomSize,
  kRelativeDistance,
  kRelativeDirection,
  kAppearanceOrder,
  kObjectLocalization,
};

enum class Modality { kSingleImage, kMultiView, kVideo };

std::string_view to_string(TaskFamily task);
std::string_view to_string(Modality modality);
std::optional<TaskFamily> task_from_string(std::string_view text);
std::optional<Modality> modality_from_string(std::string_view text);

// True for the task/modality cells populated in the released dataset
// statistics (plus single-image localization).
bool task_allowed(TaskFamily task, Modality modality);

// Numerical-answer tasks; the rest except localization are multiple choice.
bool is_numeric_task(TaskFamily task);

struct LabeledBox {
  std::string label;
  BBox2D box;

  friend bool operator==(const LabeledBox&, const LabeledBox&) = default;
};

struct NumericAnswer {
  double value = 0.0;
  std::string unit;  // "m", "cm", "count" or "m²"

  friend bool operator==(const NumericAnswer&, const NumericAnswer&) = default;
};

struct ChoiceAnswer {
  char letter = 'A';

  friend bool operator==(const ChoiceAnswer&, const ChoiceAnswer&) = default;
};

struct BoxesAnswer {
  std::vector<LabeledBox> boxes;

  friend bool operator==(const BoxesAnswer&, const BoxesAnswer&) = default;
};

using Answer = std::variant<NumericAnswer, ChoiceAnswer, BoxesAnswer>;

enum class AnswerKind { kNumeric, kChoice, kBoxes };

AnswerKind answer_kind(const Answer& answer);
std::string_view to_string(AnswerKind kind);

struct QASample {
  std::string id;
  TaskFamily task = TaskFamily::kObjectCounting;
  Modality modality = Modality::kSingleImage;
  std::string scene_id;
  std::vector<std::string> view_ids;
  std::string question;
  std::optional<std::vector<std::string>> options;  // present iff the answer is a choice
  Answer answer;
  nlohmann::json provenance = nlohmann::json::object();

  friend bool operator==(const QASample&, const QASample&) = default;
};

// Rejection reasons reported in tallies and stats.
namespace reasons {
inline constexpr std::string_view kVisibility = "visibility";
inline constexpr std::string_view kBlacklist = "blacklist";
inline constexpr std::string_view kNotUnique = "not_unique";
inline constexpr std::string_view kMinSeparation = "min_separation";
inline constexpr std::string_view kSizeRange = "size_range";
inline constexpr std::string_view kZeroDistance = "zero_distance";
inline constexpr std::string_view kDistanceRatio = "distance_ratio";
inline constexpr std::string_view kDegenerateGeometry = "degenerate_geometry";
inline constexpr std::string_view kDirectionAmbiguous = "direction_ambiguous";
inline constexpr std::string_view kAppearanceGap = "appearance_gap";
inline constexpr std::string_view kDegenerateArea = "degenerate_area";
inline constexpr std::string_view kSceneCap = "scene_cap";
inline constexpr std::string_view kCategoryCap = "category_cap";
}  // namespace reasons

struct Tally {
  std::int64_t generated = 0;
  std::map<std::string, std::int64_t> rejected;

  void reject(std::string_view reason) { ++rejected[std::string(reason)]; }
  Tally& operator+=(const Tally& other);
};

struct Generated {
  std::vector<QASample> samples;
  Tally tally;
};

// Generators. `view_ids` names the views that make up the visual context:
// one view for single-image, a uniformly spaced subset for multi-view and
// the full timeline for video. Visibility of an object in a multi-view or
// video context is its best ratio over the listed views.
Generated gen_counting(const Scene& scene, const std::vector<std::string>& view_ids,
                       Modality modality, const SynthConfig& cfg);
Generated gen_abs_distance(const Scene& scene, const std::vector<std::string>& view_ids,
                           Modality modality, const SynthConfig& cfg);
Generated gen_obj_size(const Scene& scene, const std::vector<std::string>& view_ids,
                       Modality modality, const SynthConfig& cfg);
Generated gen_rel_distance(const Scene& scene, const std::vector<std::string>& view_ids,
                           Modality modality, const SynthConfig& cfg);
// Single-image uses the camera-relative classifier; multi-view and video
// use the standing/facing quadrant formulation.
Generated gen_rel_direction(const Scene& scene, const std::vector<std::string>& view_ids,
                            Modality modality, const SynthConfig& cfg);
Generated gen_appearance_order(const Scene& scene, const SynthConfig& cfg);
Generated gen_room_size(const Scene& scene, const SynthConfig& cfg);

// Builds the object-localization companion of a single-image sample.
// Throws UniquenessViolation when a referenced category has more than one
// instance appearing in the view.
QASample gen_localization(const QASample& paired, const Scene& scene, const std::string& view_id,
                          const SynthConfig& cfg);

struct QuotaResult {
  std::vector<QASample> kept;
  std::map<std::string, std::int64_t> dropped;
};

// Seeded selection enforcing per_scene_cap per (scene, task) and
// per_scene_category_cap per (scene, task, category). Kept samples retain
// their input order. Localization samples pass through untouched.
QuotaResult apply_quotas(std::vector<QASample> samples, const SynthConfig& cfg);

// Uniformly spaced views (by timeline position) for a multi-view context.
std::vector<std::string> select_multiview_views(const Scene& scene, int count);

struct DatasetBundle {
  std::vector<QASample> samples;
  nlohmann::json stats;
};

// Runs every generator over every modality, filters, applies quotas and
// pairs each kept single-image sample with a localization sample. Pure in
// (scenes, cfg). Throws InvariantError for an invalid scene.
DatasetBundle synthesize(std::span<const Scene> scenes, const SynthConfig& cfg);

}  // namespace spatialkit
