#include "spatialkit/sample_io.h"

#include <istream>
#include <ostream>

#include "spatialkit/errors.h"
#include "spatialkit/prompts.h"

namespace spatialkit {

using nlohmann::json;

json answer_to_json(const Answer& answer) {
  return std::visit(
      [](const auto& a) -> json {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, NumericAnswer>) {
          return {{"kind", "numeric"}, {"value", a.value}, {"unit", a.unit}};
        } else if constexpr (std::is_same_v<T, ChoiceAnswer>) {
          return {{"kind", "choice"}, {"letter", std::string(1, a.letter)}};
        } else {
          json boxes = json::array();
          for (const auto& b : a.boxes) {
            boxes.push_back({{"label", b.label},
                             {"bbox", {b.box.x_min, b.box.y_min, b.box.x_max, b.box.y_max}}});
          }
          return {{"kind", "boxes"}, {"boxes", boxes}};
        }
      },
      answer);
}

Answer answer_from_json(const json& doc) {
  try {
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "numeric") {
      return NumericAnswer{doc.at("value").get<double>(), doc.value("unit", std::string{})};
    }
    if (kind == "choice") {
      const auto letter = doc.at("letter").get<std::string>();
      if (letter.size() != 1) throw SchemaError("answer.letter: expected a single letter");
      return ChoiceAnswer{letter[0]};
    }
    if (kind == "boxes") {
      BoxesAnswer out;
      for (const auto& b : doc.at("boxes")) {
        const auto& c = b.at("bbox");
        out.boxes.push_back({b.at("label").get<std::string>(),
                             {c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>(),
                              c.at(3).get<double>()}});
      }
      return out;
    }
    throw SchemaError("answer.kind: unknown kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw SchemaError(std::string("answer: ") + e.what());
  }
}

json sample_to_json(const QASample& s) {
  json line;
  line["id"] = s.id;
  line["task"] = std::string(to_string(s.task));
  line["modality"] = std::string(to_string(s.modality));
  line["scene_id"] = s.scene_id;
  line["view_ids"] = s.view_ids;
  line["question"] = s.question;
  if (answer_kind(s.answer) == AnswerKind::kBoxes) {
    line["prompt_stage2"] = nullptr;
    line["prompt_stage3"] = nullptr;
  } else {
    line["prompt_stage2"] = assemble_prompt(s, 2);
    line["prompt_stage3"] = assemble_prompt(s, 3);
  }
  line["options"] = s.options ? json(*s.options) : json(nullptr);
  line["answer"] = answer_to_json(s.answer);
  line["provenance"] = s.provenance;
  return line;
}

QASample sample_from_json(const json& line) {
  QASample s;
  try {
    s.id = line.at("id").get<std::string>();
    const auto task = task_from_string(line.at("task").get<std::string>());
    if (!task) throw SchemaError(s.id + ": unknown task");
    s.task = *task;
    const auto modality = modality_from_string(line.at("modality").get<std::string>());
    if (!modality) throw SchemaError(s.id + ": unknown modality");
    s.modality = *modality;
    s.scene_id = line.at("scene_id").get<std::string>();
    s.view_ids = line.at("view_ids").get<std::vector<std::string>>();
    s.question = line.at("question").get<std::string>();
    if (auto it = line.find("options"); it != line.end() && !it->is_null()) {
      s.options = it->get<std::vector<std::string>>();
    }
    s.answer = answer_from_json(line.at("answer"));
    s.provenance = line.value("provenance", json::object());
  } catch (const json::exception& e) {
    throw SchemaError("dataset line " + s.id + ": " + e.what());
  }
  return s;
}

void write_dataset_jsonl(std::ostream& out, const std::vector<QASample>& samples) {
  for (const auto& s : samples) out << sample_to_json(s).dump() << '\n';
}

std::vector<QASample> read_dataset_jsonl(std::istream& in) {
  std::vector<QASample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaError("dataset line " + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(sample_from_json(doc));
  }
  return out;
}

}  // namespace spatialkit
