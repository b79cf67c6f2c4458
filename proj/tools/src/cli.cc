#include "cli.h"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "spatialkit/analysis.h"
#include "spatialkit/config.h"
#include "spatialkit/errors.h"
#include "spatialkit/grpo.h"
#include "spatialkit/qa_synth.h"
#include "spatialkit/reward.h"
#include "spatialkit/sample_io.h"
#include "spatialkit/scene.h"

namespace spatialkit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError("IoError", "cannot open " + tmp.string() + " for writing");
    f << content;
    f.flush();
    if (!f) throw InputError("IoError", "write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::vector<fs::path> collect_scene_files(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& input : inputs) {
    const fs::path p(input);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(p)) {
      files.push_back(p);
    } else {
      throw InputError("IoError", "no such file or directory: " + input);
    }
  }
  return files;
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("IoError", "cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::pair<std::string, std::string>> parse_overrides(const std::vector<std::string>& sets) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + s + "'");
    out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return out;
}

struct ConfigFlags {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* cmd, bool with_seed) {
    cmd->add_option("--config", config_path, "JSON config with synth/reward/grpo sections");
    cmd->add_option("--set", sets, "Override a config key, e.g. --set synth.min_visibility=0.5");
    if (with_seed) cmd->add_option("--seed", seed, "Override synth.seed");
  }

  RunConfig load() const {
    auto overrides = parse_overrides(sets);
    if (seed) overrides.emplace_back("synth.seed", std::to_string(*seed));
    std::optional<fs::path> path;
    if (!config_path.empty()) path = config_path;
    return load_run_config(path, overrides);
  }
};

// Each non-blank line of a JSON-Lines file with its 1-based line number.
std::vector<std::pair<std::size_t, std::string>> jsonl_lines(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::pair<std::size_t, std::string>> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.emplace_back(n, line);
  }
  return out;
}

json parse_line(std::size_t lineno, const std::string& line) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw SchemaError("line " + std::to_string(lineno) + ": malformed JSON: " + e.what());
  }
}

std::vector<double> number_list(const json& doc, const char* key, std::size_t lineno, bool required) {
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) {
    if (required) throw SchemaError("line " + std::to_string(lineno) + ": missing '" + key + "'");
    return {};
  }
  if (!it->is_array()) throw SchemaError("line " + std::to_string(lineno) + ": '" + key + "' must be an array");
  std::vector<double> out;
  for (const auto& v : *it) {
    if (!v.is_number()) {
      throw SchemaError("line " + std::to_string(lineno) + ": '" + key + "' must hold numbers");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

void emit(const std::string& out_path, const std::string& content, std::ostream& out) {
  if (out_path.empty() || out_path == "-") {
    out << content;
  } else {
    write_file_atomic(out_path, content);
  }
}

// ---------------------------------------------------------------- validate

int cmd_validate(const std::vector<std::string>& inputs, std::ostream& out, std::ostream& err) {
  const auto files = collect_scene_files(inputs);
  if (files.empty()) {
    err << "error: no scenes found\n";
    return kExitInput;
  }
  std::size_t bad = 0;
  for (const auto& file : files) {
    std::vector<std::string> problems;
    std::string scene_id;
    try {
      json doc;
      try {
        doc = json::parse(read_file(file));
      } catch (const json::parse_error& e) {
        throw SchemaError(std::string("$: malformed JSON: ") + e.what());
      }
      const Scene scene = scene_from_json_unchecked(doc);
      scene_id = scene.id;
      for (const auto& v : validate_scene(scene)) {
        problems.push_back(v.entity_id + ": " + v.rule + " (" + v.detail + ")");
      }
    } catch (const InputError& e) {
      problems.push_back(e.kind() + ": " + e.what());
    }
    if (problems.empty()) {
      out << "ok    " << file.string() << " (" << scene_id << ")\n";
    } else {
      ++bad;
      out << "FAIL  " << file.string() << '\n';
      for (const auto& p : problems) out << "      " << p << '\n';
    }
  }
  out << files.size() << " scene(s) checked, " << bad << " invalid\n";
  return bad == 0 ? kExitOk : kExitInput;
}

// ------------------------------------------------------------------- synth

std::vector<Scene> load_scenes(const std::vector<std::string>& inputs) {
  const auto files = collect_scene_files(inputs);
  if (files.empty()) throw InputError("IoError", "no scenes found");
  std::vector<Scene> scenes;
  for (const auto& file : files) {
    try {
      scenes.push_back(parse_scene(read_file(file)));
    } catch (const InputError& e) {
      throw InputError(e.kind(), file.string() + ": " + e.what());
    }
  }
  return scenes;
}

int cmd_synth(const std::vector<std::string>& inputs, const ConfigFlags& flags, const std::string& out_dir,
              std::ostream& out) {
  const RunConfig cfg = flags.load();
  const auto scenes = load_scenes(inputs);
  const DatasetBundle bundle = synthesize(scenes, cfg.synth);

  std::ostringstream dataset;
  write_dataset_jsonl(dataset, bundle.samples);
  json stats = bundle.stats;
  stats["config"] = run_config_to_json(cfg)["synth"];

  const fs::path dir(out_dir);
  write_file_atomic(dir / "dataset.jsonl", dataset.str());
  write_file_atomic(dir / "stats.json", stats.dump(2) + "\n");
  out << "wrote " << bundle.samples.size() << " sample(s) from " << scenes.size() << " scene(s) to "
      << dir.string() << '\n';
  return kExitOk;
}

// ------------------------------------------------------------------- score

struct Prediction {
  std::size_t line = 0;
  std::string id;
  std::string response;
};

int cmd_score(const std::string& dataset_path, const std::string& predictions_path, const ConfigFlags& flags,
              const std::string& out_dir, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = flags.load();
  std::vector<QASample> samples;
  {
    std::istringstream in(read_file(dataset_path));
    samples = read_dataset_jsonl(in);
  }
  std::map<std::string, const QASample*> by_id;
  for (const auto& s : samples) by_id.emplace(s.id, &s);

  std::vector<Prediction> predictions;
  std::size_t malformed = 0;
  std::vector<std::string> unknown;
  for (const auto& [lineno, line] : jsonl_lines(predictions_path)) {
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error&) {
      ++malformed;
      continue;
    }
    if (!doc.is_object() || !doc.contains("id") || !doc["id"].is_string() || !doc.contains("response") ||
        !doc["response"].is_string()) {
      ++malformed;
      continue;
    }
    Prediction p{lineno, doc["id"].get<std::string>(), doc["response"].get<std::string>()};
    if (!by_id.count(p.id)) {
      unknown.push_back("line " + std::to_string(lineno) + ": " + p.id);
      continue;
    }
    predictions.push_back(std::move(p));
  }
  if (malformed > 0) err << "warning: skipped " << malformed << " malformed prediction line(s)\n";
  if (!unknown.empty()) {
    for (const auto& u : unknown) err << "unknown id: " << u << '\n';
    throw UnknownId(std::to_string(unknown.size()) + " prediction(s) name no dataset sample");
  }

  std::ostringstream scored_lines;
  std::vector<ScoredPrediction> scored;
  scored.reserve(predictions.size());
  for (const auto& p : predictions) {
    const QASample& sample = *by_id.at(p.id);
    ScoredPrediction sp;
    sp.id = p.id;
    json parsed_answer;
    if (const auto* boxes = std::get_if<BoxesAnswer>(&sample.answer)) {
      sp.reward.format = format_reward(parse_response(p.response));
      try {
        const LocalizationParse loc = parse_localization(p.response);
        sp.reward.accuracy = localization_score(loc.boxes, boxes->boxes);
        parsed_answer = answer_to_json(BoxesAnswer{loc.boxes})["boxes"];
      } catch (const NoJsonFound&) {
        sp.reward.accuracy = 0.0;
      }
      sp.reward.total = sp.reward.format + sp.reward.accuracy;
      sp.localization_iou = sp.reward.accuracy;
    } else {
      const ParsedResponse parsed = parse_response(p.response, hint_for(sample.answer));
      sp.reward = total_reward(parsed, sample.answer, cfg.reward);
      if (parsed.answer_text) parsed_answer = *parsed.answer_text;
    }
    scored_lines << json{{"id", sp.id},
                         {"format", sp.reward.format},
                         {"accuracy", sp.reward.accuracy},
                         {"total", sp.reward.total},
                         {"parsed_answer", parsed_answer}}
                        .dump()
                 << '\n';
    scored.push_back(std::move(sp));
  }

  const BenchmarkReport report = aggregate_benchmark(samples, scored);
  json report_json = report_to_json(report);
  report_json["malformed_prediction_lines"] = malformed;
  const std::string table = render_report_table(report);

  const fs::path dir(out_dir);
  write_file_atomic(dir / "scored.jsonl", scored_lines.str());
  write_file_atomic(dir / "report.json", report_json.dump(2) + "\n");
  write_file_atomic(dir / "report.txt", table);
  out << table;
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';
  return kExitOk;
}

// --------------------------------------------------------------- advantage

int cmd_advantage(const std::string& input, const ConfigFlags& flags, const std::string& out_path,
                  std::ostream& out) {
  const RunConfig cfg = flags.load();
  std::ostringstream lines;
  for (const auto& [lineno, line] : jsonl_lines(input)) {
    try {
      const json doc = parse_line(lineno, line);
      if (!doc.is_object()) throw SchemaError("expected a JSON object");
      PolicyGroup g;
      g.rewards = number_list(doc, "rewards", lineno, true);
      g.logp_new = number_list(doc, "logp_new", lineno, false);
      g.logp_old = number_list(doc, "logp_old", lineno, false);
      g.logp_ref = number_list(doc, "logp_ref", lineno, false);
      // Absent log-probabilities mean "policy equals old and reference".
      for (auto* v : {&g.logp_new, &g.logp_old, &g.logp_ref}) {
        if (v->empty()) v->assign(g.rewards.size(), 0.0);
      }
      const auto adv = group_advantages(g.rewards, cfg.grpo);
      const double objective = grpo_objective(g, adv, cfg.grpo);
      json row{{"advantages", adv}, {"objective", objective}};
      if (doc.contains("id")) row["id"] = doc["id"];
      lines << row.dump() << '\n';
    } catch (const InputError& e) {
      const std::string msg = e.what();
      const std::string prefix = "line " + std::to_string(lineno) + ":";
      throw InputError(e.kind(), msg.rfind(prefix, 0) == 0 ? msg : prefix + " " + msg);
    }
  }
  emit(out_path, lines.str(), out);
  return kExitOk;
}

// ----------------------------------------------------------------- analyze

json analyze_entropy(const json& doc, std::size_t lineno) {
  const auto rewards = number_list(doc, "rewards", lineno, true);
  if (rewards.empty()) throw SchemaError("line " + std::to_string(lineno) + ": 'rewards' is empty");
  json row;
  if (doc.contains("question_id")) row["question_id"] = doc["question_id"];
  row["n"] = rewards.size();
  row["semantic_entropy"] = semantic_entropy(rewards);
  return row;
}

json analyze_attention(const json& doc, std::size_t lineno) {
  const std::string where = "line " + std::to_string(lineno);
  const auto grid = number_list(doc, "grid", lineno, true);
  if (grid.size() != 2) throw SchemaError(where + ": 'grid' must be [w, h]");
  AttentionMap map;
  map.grid_w = static_cast<int>(grid[0]);
  map.grid_h = static_cast<int>(grid[1]);
  if (map.grid_w != grid[0] || map.grid_h != grid[1]) throw SchemaError(where + ": 'grid' must hold integers");
  map.weights = number_list(doc, "weights", lineno, true);
  map.validate();

  json row;
  if (doc.contains("id")) row["id"] = doc["id"];
  const AttentionEntropy h = attention_entropy(map);
  row["attention_entropy"] = h.normalized;
  row["attention_entropy_raw"] = h.raw;
  if (doc.contains("box") && !doc["box"].is_null()) {
    const auto box = number_list(doc, "box", lineno, true);
    if (box.size() != 4) throw SchemaError(where + ": 'box' must be [x_min, y_min, x_max, y_max]");
    double image_w = map.grid_w;
    double image_h = map.grid_h;
    if (doc.contains("image_size")) {
      const auto size = number_list(doc, "image_size", lineno, true);
      if (size.size() != 2 || !(size[0] > 0) || !(size[1] > 0)) {
        throw SchemaError(where + ": 'image_size' must be positive [w, h]");
      }
      image_w = size[0];
      image_h = size[1];
    }
    row["attention_iou"] = attention_iou(map, BBox2D{box[0], box[1], box[2], box[3]}, image_w, image_h);
  }
  return row;
}

int cmd_analyze(const std::string& input, const std::string& mode, const std::string& out_path,
                std::ostream& out) {
  std::ostringstream lines;
  for (const auto& [lineno, line] : jsonl_lines(input)) {
    try {
      const json doc = parse_line(lineno, line);
      if (!doc.is_object()) throw SchemaError("expected a JSON object");
      lines << (mode == "entropy" ? analyze_entropy(doc, lineno) : analyze_attention(doc, lineno)).dump()
            << '\n';
    } catch (const InputError& e) {
      const std::string msg = e.what();
      const std::string prefix = "line " + std::to_string(lineno) + ":";
      throw InputError(e.kind(), msg.rfind(prefix, 0) == 0 ? msg : prefix + " " + msg);
    }
  }
  emit(out_path, lines.str(), out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spatial QA synthesis, reward scoring and analysis toolkit", "spatialkit"};
  app.require_subcommand(1);

  std::vector<std::string> scene_inputs;
  std::string out_path;
  std::string dataset_path;
  std::string predictions_path;
  std::string input_path;
  std::string mode;
  ConfigFlags synth_cfg;
  ConfigFlags score_cfg;
  ConfigFlags adv_cfg;

  auto* validate = app.add_subcommand("validate", "Check scene files against the schema and invariants");
  validate->add_option("--scenes,scenes", scene_inputs, "Scene files or directories")->required();

  auto* synth = app.add_subcommand("synth", "Generate a QA dataset from scenes");
  synth->add_option("--scenes,scenes", scene_inputs, "Scene files or directories")->required();
  synth->add_option("--out", out_path, "Output directory")->required();
  synth_cfg.attach(synth, true);

  auto* score = app.add_subcommand("score", "Score model responses against a dataset");
  score->add_option("--dataset", dataset_path, "dataset.jsonl from synth")->required();
  score->add_option("--predictions", predictions_path, "JSONL of {id, response}")->required();
  score->add_option("--out", out_path, "Output directory")->required();
  score_cfg.attach(score, false);

  auto* advantage = app.add_subcommand("advantage", "Group advantages and objective per JSONL group");
  advantage->add_option("--input,input", input_path, "JSONL of groups")->required();
  advantage->add_option("--out", out_path, "Output file (default: stdout)");
  adv_cfg.attach(advantage, false);

  auto* analyze = app.add_subcommand("analyze", "Semantic entropy or attention metrics per JSONL line");
  analyze->add_option("--input,input", input_path, "JSONL input")->required();
  analyze->add_option("--mode", mode, "entropy | attention")
      ->required()
      ->check(CLI::IsMember({"entropy", "attention"}));
  analyze->add_option("--out", out_path, "Output file (default: stdout)");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*validate) return cmd_validate(scene_inputs, out, err);
    if (*synth) return cmd_synth(scene_inputs, synth_cfg, out_path, out);
    if (*score) return cmd_score(dataset_path, predictions_path, score_cfg, out_path, out, err);
    if (*advantage) return cmd_advantage(input_path, adv_cfg, out_path, out);
    if (*analyze) return cmd_analyze(input_path, mode, out_path, out);
  } catch (const InputError& e) {
    err << "error: " << e.kind() << ": " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace spatialkit::cli
