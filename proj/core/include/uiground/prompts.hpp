#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "uiground/geometry.hpp"

namespace uiground::prompts {

// Bumped whenever prompt wording changes; part of every cache key.
inline constexpr std::string_view kPromptVersion = "v1";

inline constexpr std::string_view kCaptionHeader =
    "You are describing one interactive element of a graphical user interface.";
inline constexpr std::string_view kInstructionHeader =
    "You are writing user instructions for one interactive element of a graphical user interface.";
inline constexpr std::string_view kInstructionReask =
    "Your previous answer did not contain three distinct numbered instructions. Answer again with "
    "exactly three different instructions, one per line, formatted as '1. ...', '2. ...', '3. ...'.";
inline constexpr std::string_view kNoHtmlText = "no HTML text available";

inline constexpr std::string_view kGroundingTemplate =
    "Given a GUI image, what are the relative (0-1000) pixel point coordinates for the element "
    "corresponding to the following instruction or description: ";
inline constexpr std::string_view kVisualCot =
    "Think step-by-step with visual clues before giving the answer.";

inline constexpr std::string_view kPlannerHeader =
    "You are planning the next action of an agent operating a graphical user interface.";

// "top left" ... "bottom right" over a 3x3 grid of the normalized center.
std::string position_descriptor(const NormPoint& center);

std::string caption_prompt(std::string_view html_text, const NormPoint& center);
std::string instruction_prompt(std::string_view caption, bool reask);

// Template + query, with the CoT sentence first when requested.
std::string grounding_prompt(std::string_view query, bool visual_cot);

// Task + prior action lines; the model must answer with one action line.
std::string planner_prompt(std::string_view task, const std::vector<std::string>& history);

// Pulls a line starting with `key` ("HTML text: ") out of a prompt. Empty if absent.
std::string prompt_field(std::string_view prompt, std::string_view key);

}  // namespace uiground::prompts
