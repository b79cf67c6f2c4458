#include "spatialkit/prompts.h"

#include "spatialkit/errors.h"

namespace spatialkit {

namespace templates {

namespace {

constexpr std::string_view kClosestPointPrefix = "Measuring from the closest point of each object, ";

std::string four_choices(const std::vector<std::string>& c) {
  return c.at(0) + ", " + c.at(1) + ", " + c.at(2) + " or " + c.at(3);
}

}  // namespace

std::string counting(std::string_view category) {
  return "How many " + std::string(category) + "(s) appear?";
}

std::string absolute_distance(std::string_view object1, std::string_view object2, bool closest_point) {
  std::string body = "the distance between the " + std::string(object1) + " and the " +
                     std::string(object2) + " (in meters)?";
  return closest_point ? std::string(kClosestPointPrefix) + "what is " + body : "What is " + body;
}

std::string object_size(std::string_view object) {
  return "What is the length of the longest dimension (length, width, or height) of the " +
         std::string(object) + ", measured in centimeters?";
}

std::string relative_distance(std::string_view choice_a, std::string_view choice_b,
                              std::string_view category, bool closest_point) {
  std::string body = "hich of these two objects (" + std::string(choice_a) + ", " +
                     std::string(choice_b) + ") is closer to the " + std::string(category) + "?";
  return closest_point ? std::string(kClosestPointPrefix) + "w" + body : "W" + body;
}

std::string direction_single(std::string_view object1, std::string_view object2,
                             const std::vector<std::string>& choices) {
  return "From the camera's perspective, is the " + std::string(object1) + " to the " +
         std::string(object2) + "'s " + four_choices(choices) + "?";
}

std::string direction_quadrant(std::string_view positioning, std::string_view orienting,
                               std::string_view querying, const std::vector<std::string>& choices) {
  return "If I am standing by the " + std::string(positioning) + " and facing the " +
         std::string(orienting) + ", is the " + std::string(querying) + " to my " +
         four_choices(choices) +
         "? The directions refer to the quadrants of a Cartesian plane (if I am standing at the "
         "origin and facing along the positive y-axis).";
}

std::string appearance_order(const std::vector<std::string>& categories) {
  std::string list;
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (i) list += ", ";
    list += categories[i];
  }
  return "What will be the first-time appearance order of the following categories in the video: " +
         list + "?";
}

std::string room_size() {
  return "What is the size of this room (in square meters)? If multiple rooms are shown, "
         "estimate the size of the combined space.";
}

std::string with_options(std::string question, const std::vector<std::string>& options) {
  question += "\nOptions:";
  for (std::size_t i = 0; i < options.size(); ++i) {
    question += "\n";
    question += static_cast<char>('A' + i);
    question += ". " + options[i];
  }
  return question;
}

std::string localization(std::string_view paired_question) {
  return std::string(paired_question) + " " + std::string(prompts::kLocalizationSuffix);
}

}  // namespace templates

std::string assemble_prompt(const QASample& sample, int stage) {
  const AnswerKind kind = answer_kind(sample.answer);
  const bool localization = sample.task == TaskFamily::kObjectLocalization;
  switch (stage) {
    case 1:
      if (!localization || kind != AnswerKind::kBoxes) {
        throw StagePairingError("stage 1 prompts require a localization sample, got " +
                                std::string(to_string(sample.task)));
      }
      return sample.question;
    case 2:
    case 3: {
      if (kind == AnswerKind::kBoxes) {
        throw StagePairingError("stage " + std::to_string(stage) +
                                " prompts require a numeric or choice sample");
      }
      const bool choice = kind == AnswerKind::kChoice;
      if (stage == 2) {
        return sample.question + "\n" +
               std::string(choice ? prompts::kStage2Choice : prompts::kStage2Numeric);
      }
      return sample.question + "\n" + std::string(prompts::kStage3Thinking) + "\n" +
             std::string(choice ? prompts::kStage3Choice : prompts::kStage3Numeric);
    }
    default:
      throw StagePairingError("unknown stage " + std::to_string(stage));
  }
}

}  // namespace spatialkit
