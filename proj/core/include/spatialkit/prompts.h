#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spatialkit/qa_synth.h"

namespace spatialkit {

namespace prompts {

inline constexpr std::string_view kSystem = "You are a helpful assistant.";

inline constexpr std::string_view kLocalizationSuffix =
    "Please carefully observe the image first to identify the object(s) referred to in the "
    "question. Note that each object type appears only once in the image. Then provide the 2D "
    "bounding box coordinates and labels of the related objects in JSON format.";

inline constexpr std::string_view kStage2Choice =
    "Please answer with the option's letter from the given choices (e.g., A, B, etc.) directly.";

inline constexpr std::string_view kStage2Numeric =
    "Please answer the question using a numerical value (e.g., 42 or 3.1) directly.";

inline constexpr std::string_view kStage3Thinking =
    "Please think about this question as if you were a human pondering deeply. Engage in an "
    "internal dialogue using expressions such as 'let me think', 'wait', 'Hmm', 'oh, I see', "
    "'let's break it down', etc, or other natural language thought expressions. It's encouraged "
    "to include self-reflection or verification in the reasoning process.";

inline constexpr std::string_view kStage3Choice =
    "Please provide your detailed reasoning between the <think> </think> tags, and then answer "
    "the question with the option's letter from the given choices (e.g., A, B, etc.) within the "
    "<answer> </answer> tags.";

inline constexpr std::string_view kStage3Numeric =
    "Please provide your detailed reasoning between the <think> </think> tags, and then answer "
    "the question with a numerical value (e.g., 42 or 3.1) within the <answer> </answer> tags.";

}  // namespace prompts

// Question templates. `closest_point` selects the wording that tells the
// reader distances are measured between the nearest points of the objects.
namespace templates {

std::string counting(std::string_view category);
std::string absolute_distance(std::string_view object1, std::string_view object2, bool closest_point);
std::string object_size(std::string_view object);
std::string relative_distance(std::string_view choice_a, std::string_view choice_b,
                              std::string_view category, bool closest_point);
std::string direction_single(std::string_view object1, std::string_view object2,
                             const std::vector<std::string>& choices);
std::string direction_quadrant(std::string_view positioning, std::string_view orienting,
                               std::string_view querying, const std::vector<std::string>& choices);
std::string appearance_order(const std::vector<std::string>& categories);
std::string room_size();

// "question\nOptions:\nA. first\nB. second..."
std::string with_options(std::string question, const std::vector<std::string>& options);

std::string localization(std::string_view paired_question);

}  // namespace templates

// User prompt for a training stage. Stage 1 accepts only localization
// samples (whose question already carries the localization instruction);
// stages 2 and 3 accept only numeric or choice samples. Throws
// StagePairingError otherwise.
std::string assemble_prompt(const QASample& sample, int stage);

}  // namespace spatialkit
