#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spatialkit/geometry.h"
#include "spatialkit/qa_synth.h"
#include "spatialkit/reward.h"

namespace spatialkit {

// Entropy (natural log) of the partition of `rewards` into exact-equality
// clusters. Throws std::invalid_argument on an empty set.
double semantic_entropy(std::span<const double> rewards);

struct AttentionMap {
  int grid_w = 0;
  int grid_h = 0;
  std::vector<double> weights;  // row-major, grid_w * grid_h, non-negative

  // Throws InputError when the shape or weights are invalid.
  void validate() const;
};

// Share of min-max normalized attention mass on grid cells whose patch
// centre lies inside `box`. A constant map normalizes to all ones. Throws
// EmptyBox when the box contains no patch centre.
double attention_iou(const AttentionMap& map, const BBox2D& box, double image_w, double image_h);

struct AttentionEntropy {
  double raw = 0.0;         // nats
  double normalized = 0.0;  // raw / ln(cells), in [0, 1]
};

AttentionEntropy attention_entropy(const AttentionMap& map);

// Per-response outcome fed to the benchmark aggregator.
struct ScoredPrediction {
  std::string id;
  RewardBreakdown reward;
  std::optional<double> localization_iou;  // set for localization samples
};

struct BenchmarkCell {
  double accuracy = 0.0;
  std::size_t count = 0;
};

// Accuracies for one slice of the benchmark (everything, or one modality).
struct BenchmarkSummary {
  std::map<std::string, BenchmarkCell> per_task;  // keyed by task name
  BenchmarkCell nq;    // mean numerical reward over numeric samples
  BenchmarkCell mcq;   // mean exact match over choice samples
  double avg = 0.0;    // unweighted mean of numeric and choice task accuracies
};

struct BenchmarkReport {
  BenchmarkSummary overall;
  std::map<std::string, BenchmarkSummary> per_modality;
  std::size_t samples = 0;
  std::size_t predictions = 0;
  double coverage = 0.0;  // fraction of samples with a prediction
  std::vector<std::string> warnings;
};

// Numeric and choice samples are scored by reward accuracy, localization
// samples by localization_iou. Missing predictions count as zero. Throws
// UnknownId when a prediction names no sample.
BenchmarkReport aggregate_benchmark(std::span<const QASample> samples,
                                    std::span<const ScoredPrediction> predictions);

nlohmann::json report_to_json(const BenchmarkReport& report);

// Aligned text table: one row per modality plus an "Overall" row, one
// column per task, then NQ, MCQ and Avg. Values in percent.
std::string render_report_table(const BenchmarkReport& report);

}  // namespace spatialkit
