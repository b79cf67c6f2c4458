#include "spatialkit/analysis.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "spatialkit/errors.h"

namespace spatialkit {

using nlohmann::json;

double semantic_entropy(std::span<const double> rewards) {
  if (rewards.empty()) throw std::invalid_argument("semantic_entropy needs at least one reward");
  std::map<double, std::size_t> clusters;
  for (double r : rewards) ++clusters[r];
  const double n = static_cast<double>(rewards.size());
  double h = 0.0;
  for (const auto& [_, size] : clusters) {
    const double p = static_cast<double>(size) / n;
    h -= p * std::log(p);
  }
  return std::max(0.0, h);
}

void AttentionMap::validate() const {
  if (grid_w <= 0 || grid_h <= 0) throw InputError("InvalidAttention", "grid dimensions must be positive");
  if (weights.size() != static_cast<std::size_t>(grid_w) * static_cast<std::size_t>(grid_h)) {
    throw InputError("InvalidAttention", "weights length " + std::to_string(weights.size()) +
                                             " does not match grid " + std::to_string(grid_w) + "x" +
                                             std::to_string(grid_h));
  }
  bool positive = false;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw InputError("InvalidAttention", "weights must be finite and >= 0");
    if (w > 0.0) positive = true;
  }
  if (!positive) throw InputError("InvalidAttention", "attention map has no positive weight");
}

double attention_iou(const AttentionMap& map, const BBox2D& box, double image_w, double image_h) {
  map.validate();
  const auto [lo, hi] = std::minmax_element(map.weights.begin(), map.weights.end());
  const double range = *hi - *lo;
  const double patch_w = image_w / map.grid_w;
  const double patch_h = image_h / map.grid_h;

  double inside = 0.0;
  double total = 0.0;
  int cells_inside = 0;
  for (int row = 0; row < map.grid_h; ++row) {
    const double cy = (row + 0.5) * patch_h;
    for (int col = 0; col < map.grid_w; ++col) {
      const double cx = (col + 0.5) * patch_w;
      const double w = map.weights[static_cast<std::size_t>(row) * map.grid_w + col];
      const double normalized = range > 0.0 ? (w - *lo) / range : 1.0;
      total += normalized;
      if (cx >= box.x_min && cx <= box.x_max && cy >= box.y_min && cy <= box.y_max) {
        inside += normalized;
        ++cells_inside;
      }
    }
  }
  if (cells_inside == 0) throw EmptyBox("box covers no patch centre");
  return inside / total;
}

AttentionEntropy attention_entropy(const AttentionMap& map) {
  map.validate();
  double sum = 0.0;
  for (double w : map.weights) sum += w;
  AttentionEntropy out;
  for (double w : map.weights) {
    if (w <= 0.0) continue;
    const double p = w / sum;
    out.raw -= p * std::log(p);
  }
  out.raw = std::max(0.0, out.raw);
  const double cells = static_cast<double>(map.weights.size());
  out.normalized = cells > 1.0 ? std::clamp(out.raw / std::log(cells), 0.0, 1.0) : 0.0;
  return out;
}

namespace {

struct Accumulator {
  double sum = 0.0;
  std::size_t count = 0;

  void add(double v) {
    sum += v;
    ++count;
  }
  BenchmarkCell cell() const { return {count ? sum / static_cast<double>(count) : 0.0, count}; }
};

struct SliceAccumulator {
  std::map<TaskFamily, Accumulator> per_task;
  Accumulator nq;
  Accumulator mcq;

  void add(TaskFamily task, AnswerKind kind, double value) {
    per_task[task].add(value);
    if (kind == AnswerKind::kNumeric) nq.add(value);
    if (kind == AnswerKind::kChoice) mcq.add(value);
  }

  BenchmarkSummary summary() const {
    BenchmarkSummary s;
    double task_sum = 0.0;
    std::size_t task_count = 0;
    for (const auto& [task, acc] : per_task) {
      s.per_task[std::string(to_string(task))] = acc.cell();
      if (task != TaskFamily::kObjectLocalization) {
        task_sum += acc.cell().accuracy;
        ++task_count;
      }
    }
    s.nq = nq.cell();
    s.mcq = mcq.cell();
    s.avg = task_count ? task_sum / static_cast<double>(task_count) : 0.0;
    return s;
  }
};

}  // namespace

BenchmarkReport aggregate_benchmark(std::span<const QASample> samples,
                                    std::span<const ScoredPrediction> predictions) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < samples.size(); ++i) index.emplace(samples[i].id, i);

  std::vector<double> sum(samples.size(), 0.0);
  std::vector<std::size_t> seen(samples.size(), 0);
  std::vector<std::string> unknown;
  for (const auto& p : predictions) {
    auto it = index.find(p.id);
    if (it == index.end()) {
      unknown.push_back(p.id);
      continue;
    }
    const QASample& s = samples[it->second];
    const double value = answer_kind(s.answer) == AnswerKind::kBoxes ? p.localization_iou.value_or(0.0)
                                                                     : p.reward.accuracy;
    sum[it->second] += value;
    ++seen[it->second];
  }
  if (!unknown.empty()) {
    std::string list;
    for (std::size_t i = 0; i < unknown.size() && i < 10; ++i) list += (i ? ", " : "") + unknown[i];
    throw UnknownId(std::to_string(unknown.size()) + " prediction id(s) match no sample: " + list);
  }

  BenchmarkReport report;
  report.samples = samples.size();
  report.predictions = predictions.size();
  SliceAccumulator all;
  std::map<Modality, SliceAccumulator> by_modality;
  std::size_t covered = 0;
  std::size_t duplicated = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const QASample& s = samples[i];
    double value = 0.0;
    if (seen[i] > 0) {
      ++covered;
      // Duplicates are averaged so the result does not depend on input order.
      value = sum[i] / static_cast<double>(seen[i]);
      if (seen[i] > 1) ++duplicated;
    }
    const AnswerKind kind = answer_kind(s.answer);
    all.add(s.task, kind, value);
    by_modality[s.modality].add(s.task, kind, value);
  }
  report.overall = all.summary();
  for (const auto& [m, acc] : by_modality) report.per_modality[std::string(to_string(m))] = acc.summary();
  report.coverage = samples.empty() ? 0.0 : static_cast<double>(covered) / static_cast<double>(samples.size());
  if (covered < samples.size()) {
    report.warnings.push_back(std::to_string(samples.size() - covered) + " of " +
                              std::to_string(samples.size()) +
                              " samples have no prediction and score 0");
  }
  if (duplicated) {
    report.warnings.push_back(std::to_string(duplicated) + " samples have duplicate predictions (averaged)");
  }
  return report;
}

namespace {

json cell_json(const BenchmarkCell& c) { return {{"accuracy", c.accuracy}, {"count", c.count}}; }

json summary_json(const BenchmarkSummary& s) {
  json tasks = json::object();
  for (const auto& [task, cell] : s.per_task) tasks[task] = cell_json(cell);
  return {{"per_task", tasks}, {"nq", cell_json(s.nq)}, {"mcq", cell_json(s.mcq)}, {"avg", s.avg}};
}

std::string short_task_name(TaskFamily t) {
  switch (t) {
    case TaskFamily::kObjectCounting: return "Obj.Cnt.";
    case TaskFamily::kAbsoluteDistance: return "Abs.Dist.";
    case TaskFamily::kObjectSize: return "Obj.Size";
    case TaskFamily::kRoomSize: return "Room Size";
    case TaskFamily::kRelativeDistance: return "Rel.Dist.";
    case TaskFamily::kRelativeDirection: return "Rel.Dir.";
    case TaskFamily::kAppearanceOrder: return "Appr.Order";
    case TaskFamily::kObjectLocalization: return "Loc.IoU";
  }
  return "";
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * v);
  return buf;
}

}  // namespace

json report_to_json(const BenchmarkReport& report) {
  json modalities = json::object();
  for (const auto& [m, s] : report.per_modality) modalities[m] = summary_json(s);
  return {{"overall", summary_json(report.overall)},
          {"per_modality", modalities},
          {"samples", report.samples},
          {"predictions", report.predictions},
          {"coverage", report.coverage},
          {"warnings", report.warnings}};
}

std::string render_report_table(const BenchmarkReport& report) {
  std::vector<TaskFamily> tasks;
  for (int t = 0; t <= static_cast<int>(TaskFamily::kObjectLocalization); ++t) {
    const auto task = static_cast<TaskFamily>(t);
    if (report.overall.per_task.count(std::string(to_string(task)))) tasks.push_back(task);
  }

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"Modality"};
  for (auto t : tasks) header.push_back(short_task_name(t));
  header.insert(header.end(), {"NQ", "MCQ", "Avg"});
  rows.push_back(header);

  auto row_for = [&](const std::string& name, const BenchmarkSummary& s) {
    std::vector<std::string> row{name};
    for (auto t : tasks) {
      auto it = s.per_task.find(std::string(to_string(t)));
      row.push_back(it == s.per_task.end() ? "-" : percent(it->second.accuracy));
    }
    row.push_back(s.nq.count ? percent(s.nq.accuracy) : "-");
    row.push_back(s.mcq.count ? percent(s.mcq.accuracy) : "-");
    row.push_back(percent(s.avg));
    return row;
  };
  for (const auto& [m, s] : report.per_modality) rows.push_back(row_for(m, s));
  rows.push_back(row_for("Overall", report.overall));

  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  std::ostringstream out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (c == 0) out << std::left << std::setw(static_cast<int>(widths[c])) << rows[r][c];
      else out << "  " << std::right << std::setw(static_cast<int>(widths[c])) << rows[r][c];
    }
    out << '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : widths) total += w;
      out << std::string(total + 2 * (widths.size() - 1), '-') << '\n';
    }
  }
  return out.str();
}

}  // namespace spatialkit
