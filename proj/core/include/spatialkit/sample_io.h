#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spatialkit/qa_synth.h"

namespace spatialkit {

// One dataset line. Includes the stage 2 and stage 3 prompts, which are
// null for localization samples.
nlohmann::json sample_to_json(const QASample& sample);

// Inverse of sample_to_json (prompt fields are ignored). Throws SchemaError.
QASample sample_from_json(const nlohmann::json& line);

nlohmann::json answer_to_json(const Answer& answer);
Answer answer_from_json(const nlohmann::json& doc);

void write_dataset_jsonl(std::ostream& out, const std::vector<QASample>& samples);
std::vector<QASample> read_dataset_jsonl(std::istream& in);

}  // namespace spatialkit
