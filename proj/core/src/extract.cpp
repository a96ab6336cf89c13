#include "uiground/extract.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "uiground/error.hpp"

namespace uiground {

std::string_view to_string(ElementKind k) noexcept {
  return k == ElementKind::Graphical ? "graphical" : "textual";
}

std::string_view to_string(FilterReason r) noexcept {
  switch (r) {
    case FilterReason::Kept: return "kept";
    case FilterReason::TooFewElements: return "too_few_elements";
    case FilterReason::Harmful: return "harmful";
    case FilterReason::Malformed: return "malformed";
  }
  return "malformed";
}

namespace {

constexpr std::string_view kInteractiveTags[] = {"a",        "button", "input",  "select",
                                                 "textarea", "summary", "option"};
constexpr std::string_view kInteractiveRoles[] = {"button", "link",     "checkbox",
                                                  "radio",  "tab",      "menuitem",
                                                  "switch", "combobox", "slider"};
constexpr std::string_view kClickHandlers[] = {"onclick",     "onmousedown",   "onmouseup",
                                               "onpointerdown", "onpointerup", "ng-click",
                                               "v-on:click",  "@click",        "data-has-click-listener"};
constexpr std::string_view kGraphicalTags[] = {"img", "svg", "canvas", "picture"};
constexpr std::string_view kGraphicalFlags[] = {"has-image", "has-background-image", "has-svg",
                                                "has-canvas"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

template <std::size_t N>
bool contains(const std::string_view (&set)[N], std::string_view v) {
  return std::find(std::begin(set), std::end(set), v) != std::end(set);
}

bool truthy(const std::string& v) {
  const std::string l = lower(v);
  return l != "false" && l != "0" && l != "no";
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

const std::string* find_attr(const UiElement& e, std::string_view key) {
  auto it = e.attributes.find(std::string(key));
  return it == e.attributes.end() ? nullptr : &it->second;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::vector<std::string> tokenize_words(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

KeywordBlocklist::KeywordBlocklist(std::vector<std::string> terms) {
  for (auto& t : terms) {
    // Store the canonical word sequence so "Foo  Bar" and "foo bar" agree.
    const auto words = tokenize_words(t);
    if (words.empty()) continue;
    std::string joined;
    for (const auto& w : words) {
      if (!joined.empty()) joined.push_back(' ');
      joined += w;
    }
    terms_.push_back(std::move(joined));
  }
  std::sort(terms_.begin(), terms_.end());
  terms_.erase(std::unique(terms_.begin(), terms_.end()), terms_.end());
}

KeywordBlocklist KeywordBlocklist::load(const std::string& path) {
  std::vector<std::string> terms;
  for (auto& line : read_lines(path)) {
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    terms.push_back(t);
  }
  return KeywordBlocklist(std::move(terms));
}

bool KeywordBlocklist::is_harmful(std::string_view page_text) const {
  if (terms_.empty()) return false;
  const auto words = tokenize_words(page_text);
  std::string padded = " ";
  for (const auto& w : words) {
    padded += w;
    padded.push_back(' ');
  }
  return std::any_of(terms_.begin(), terms_.end(), [&](const std::string& t) {
    return padded.find(" " + t + " ") != std::string::npos;
  });
}

LinearNgramClassifier::LinearNgramClassifier(double bias, double threshold,
                                             std::map<std::string, double> weights)
    : bias_(bias), threshold_(threshold), weights_(weights.begin(), weights.end()) {}

LinearNgramClassifier LinearNgramClassifier::load(const std::string& path) {
  double bias = 0.0;
  double threshold = 0.5;
  std::map<std::string, double> weights;
  std::size_t lineno = 0;
  for (const auto& raw : read_lines(path)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) {
      throw InputError(path + ":" + std::to_string(lineno) + ": expected '<ngram>\\t<weight>'");
    }
    const std::string key = trim(line.substr(0, tab));
    const std::string num = trim(line.substr(tab + 1));
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(num, &used);
      if (used != num.size()) throw std::invalid_argument(num);
    } catch (const std::exception&) {
      throw InputError(path + ":" + std::to_string(lineno) + ": bad number '" + num + "'");
    }
    if (key == "bias") {
      bias = value;
    } else if (key == "threshold") {
      threshold = value;
    } else {
      const auto words = tokenize_words(key);
      if (words.empty() || words.size() > 2) {
        throw InputError(path + ":" + std::to_string(lineno) + ": n-gram must be 1 or 2 words");
      }
      weights[words.size() == 1 ? words[0] : words[0] + " " + words[1]] = value;
    }
  }
  return LinearNgramClassifier(bias, threshold, std::move(weights));
}

double LinearNgramClassifier::probability(std::string_view page_text) const {
  const auto words = tokenize_words(page_text);
  std::set<std::string> present;
  for (std::size_t i = 0; i < words.size(); ++i) {
    present.insert(words[i]);
    if (i + 1 < words.size()) present.insert(words[i] + " " + words[i + 1]);
  }
  double score = bias_;
  for (const auto& g : present) {
    if (auto it = weights_.find(g); it != weights_.end()) score += it->second;
  }
  return 1.0 / (1.0 + std::exp(-score));
}

bool LinearNgramClassifier::is_harmful(std::string_view page_text) const {
  return probability(page_text) >= threshold_;
}

AnyOfHarmFilter::AnyOfHarmFilter(std::vector<std::shared_ptr<const HarmFilter>> members)
    : members_(std::move(members)) {}

bool AnyOfHarmFilter::is_harmful(std::string_view page_text) const {
  return std::any_of(members_.begin(), members_.end(),
                     [&](const auto& m) { return m && m->is_harmful(page_text); });
}

bool classify_interactive(const UiElement& e) {
  if (contains(kInteractiveTags, lower(e.tag))) return true;
  if (contains(kInteractiveRoles, lower(e.role))) return true;
  for (auto handler : kClickHandlers) {
    if (find_attr(e, handler) != nullptr) return true;
  }
  if (const auto* tab = find_attr(e, "tabindex")) {
    const std::string t = trim(*tab);
    int value = -1;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec == std::errc() && ptr == t.data() + t.size() && value >= 0) return true;
  }
  if (const auto* ce = find_attr(e, "contenteditable")) {
    if (lower(trim(*ce)) != "false") return true;
  }
  return false;
}

bool is_valid_element(const UiElement& e, const Viewport& v) {
  return e.interactive && e.visible && e.bbox.inside(v) && e.bbox.w >= kMinElementSide &&
         e.bbox.h >= kMinElementSide;
}

ElementKind classify_kind(const UiElement& e) {
  if (contains(kGraphicalTags, lower(e.tag))) return ElementKind::Graphical;
  for (auto flag : kGraphicalFlags) {
    if (const auto* v = find_attr(e, flag); v != nullptr && truthy(*v)) {
      return ElementKind::Graphical;
    }
  }
  return is_blank(e.text) ? ElementKind::Graphical : ElementKind::Textual;
}

void classify_elements(PageSnapshot& s) {
  for (auto& e : s.elements) {
    e.interactive = e.visible && classify_interactive(e);
    e.kind = e.interactive ? std::optional(classify_kind(e)) : std::nullopt;
  }
}

std::size_t count_valid_elements(const PageSnapshot& s) {
  return static_cast<std::size_t>(std::count_if(
      s.elements.begin(), s.elements.end(),
      [&](const UiElement& e) { return is_valid_element(e, s.viewport); }));
}

std::string check_snapshot(const PageSnapshot& s) {
  if (s.page_id.empty()) return "empty page_id";
  if (!s.viewport.valid()) {
    return "invalid viewport " + std::to_string(s.viewport.width) + "x" +
           std::to_string(s.viewport.height);
  }
  std::unordered_set<std::string> ids;
  for (const auto& e : s.elements) {
    if (e.id.empty()) return "element with empty id";
    if (!ids.insert(e.id).second) return "duplicate element id '" + e.id + "'";
    if (!e.bbox.inside(s.viewport)) return "element '" + e.id + "' box outside viewport";
    if (e.interactive && !e.visible) return "element '" + e.id + "' interactive but not visible";
  }
  return {};
}

FilterVerdict filter_page(const PageSnapshot& s, const HarmFilter& harm) {
  FilterVerdict v;
  if (auto problem = check_snapshot(s); !problem.empty()) {
    v.reason = FilterReason::Malformed;
    v.detail = std::move(problem);
    return v;
  }
  v.valid_count = count_valid_elements(s);
  if (harm.is_harmful(s.page_text)) {
    v.reason = FilterReason::Harmful;
  } else if (v.valid_count <= kMinValidElementsExclusive) {
    v.reason = FilterReason::TooFewElements;
  } else {
    v.kept = true;
    v.reason = FilterReason::Kept;
  }
  return v;
}

std::vector<UiElement> prioritize_elements(const std::vector<UiElement>& elems, std::size_t cap) {
  std::vector<UiElement> out;
  out.reserve(std::min(cap, elems.size()));
  for (ElementKind pass : {ElementKind::Graphical, ElementKind::Textual}) {
    for (const auto& e : elems) {
      if (out.size() >= cap) return out;
      const ElementKind k = e.kind.value_or(classify_kind(e));
      if (k == pass) out.push_back(e);
    }
  }
  return out;
}

std::vector<UiElement> valid_elements(const PageSnapshot& s) {
  std::vector<UiElement> out;
  for (const auto& e : s.elements) {
    if (is_valid_element(e, s.viewport)) out.push_back(e);
  }
  return out;
}

}  // namespace uiground
