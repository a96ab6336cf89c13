#include "uiground/prompts.hpp"

#include <sstream>

namespace uiground::prompts {

namespace {

// 0..333 -> 0, 334..667 -> 1, 668..1000 -> 2
int third(int v) { return v * 3 / (kNormMax + 1); }

}  // namespace

std::string position_descriptor(const NormPoint& center) {
  static constexpr const char* kRows[] = {"top", "middle", "bottom"};
  static constexpr const char* kCols[] = {"left", "center", "right"};
  return std::string(kRows[third(center.y)]) + " " + kCols[third(center.x)];
}

std::string caption_prompt(std::string_view html_text, const NormPoint& center) {
  std::ostringstream os;
  os << kCaptionHeader << "\n"
     << "Image 1 is an isolated crop of the element. Image 2 is a zoomed-out view of its "
        "surroundings in which the element is outlined by a red rectangle.\n"
     << "HTML text: " << (html_text.empty() ? kNoHtmlText : html_text) << "\n"
     << "Screen position: " << position_descriptor(center) << " (center at " << center.x << ", "
     << center.y << " on a 0-1000 scale)\n"
     << "Write one detailed caption of the element. Cover its visual properties (shape, colors, "
        "icons, text), its functionality (what happens when it is used), its positional "
        "relationships to nearby elements, and any other distinctive attributes. Answer with the "
        "caption only.";
  return os.str();
}

std::string instruction_prompt(std::string_view caption, bool reask) {
  std::ostringstream os;
  os << kInstructionHeader << "\n"
     << "Caption: " << caption << "\n"
     << "Write three different natural instructions a user might give when they want to interact "
        "with this element. Vary the wording and the level of detail. Do not mention coordinates. "
        "Answer as a numbered list:\n1. ...\n2. ...\n3. ...";
  if (reask) os << "\n" << kInstructionReask;
  return os.str();
}

std::string grounding_prompt(std::string_view query, bool visual_cot) {
  std::string out;
  if (visual_cot) {
    out += kVisualCot;
    out += "\n";
  }
  out += kGroundingTemplate;
  out += query;
  return out;
}

std::string planner_prompt(std::string_view task, const std::vector<std::string>& history) {
  std::ostringstream os;
  os << kPlannerHeader << "\n"
     << "Task: " << task << "\n"
     << "Previous actions:\n";
  if (history.empty()) os << "(none)\n";
  for (std::size_t i = 0; i < history.size(); ++i) os << i + 1 << ". " << history[i] << "\n";
  os << "Answer with exactly one line in one of these forms:\n"
        "click: <instruction describing the element to click>\n"
        "type: <text>\n"
        "swipe: <up|down|left|right>\n"
        "enter\nback\nhome\nopen_app: <name>\nwait";
  return os.str();
}

std::string prompt_field(std::string_view prompt, std::string_view key) {
  std::size_t pos = 0;
  while (pos <= prompt.size()) {
    const std::size_t eol = std::min(prompt.find('\n', pos), prompt.size());
    const std::string_view line = prompt.substr(pos, eol - pos);
    if (line.substr(0, key.size()) == key) return std::string(line.substr(key.size()));
    pos = eol + 1;
  }
  return {};
}

}  // namespace uiground::prompts
