#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uiground/geometry.hpp"

namespace uiground {

enum class ElementKind { Graphical, Textual };

std::string_view to_string(ElementKind k) noexcept;

struct UiElement {
  std::string id;
  std::string tag;
  std::string role;
  std::map<std::string, std::string> attributes;
  std::string text;
  BBox bbox;
  bool visible = false;
  bool interactive = false;
  // Set only for interactive elements.
  std::optional<ElementKind> kind;

  friend bool operator==(const UiElement&, const UiElement&) = default;
};

struct PageSnapshot {
  std::string page_id;
  std::string url;
  Platform platform = Platform::Web;
  Viewport viewport;
  std::string screenshot_ref;
  std::vector<UiElement> elements;
  std::string page_text;

  friend bool operator==(const PageSnapshot&, const PageSnapshot&) = default;
};

enum class FilterReason { Kept, TooFewElements, Harmful, Malformed };

std::string_view to_string(FilterReason r) noexcept;

struct FilterVerdict {
  bool kept = false;
  FilterReason reason = FilterReason::Malformed;
  std::size_t valid_count = 0;
  std::string detail;
};

// Pages with more valid elements than this are kept.
inline constexpr std::size_t kMinValidElementsExclusive = 20;
// Minimum side of a valid element, device pixels.
inline constexpr int kMinElementSide = 8;

// Harmful-content check over a page's visible text. Implementations must be
// safe to share read-only across threads.
class HarmFilter {
 public:
  virtual ~HarmFilter() = default;
  virtual bool is_harmful(std::string_view page_text) const = 0;
};

// Never flags anything.
class NullHarmFilter final : public HarmFilter {
 public:
  bool is_harmful(std::string_view) const override { return false; }
};

// Whole-word (or whole-phrase) match against lowercase terms.
class KeywordBlocklist final : public HarmFilter {
 public:
  explicit KeywordBlocklist(std::vector<std::string> terms);
  // One lowercase term per line, UTF-8. Blank lines and '#' comments skipped.
  static KeywordBlocklist load(const std::string& path);

  bool is_harmful(std::string_view page_text) const override;
  std::size_t size() const noexcept { return terms_.size(); }

 private:
  std::vector<std::string> terms_;
};

// Linear model over word unigrams and bigrams:
// p = sigmoid(bias + sum of weights of n-grams present); harmful iff p >= threshold.
//
// File format, one entry per line, tab separated:
//   bias<TAB>-2.5
//   threshold<TAB>0.5
//   ngram<TAB>weight      (bigrams are two words separated by one space)
class LinearNgramClassifier final : public HarmFilter {
 public:
  LinearNgramClassifier(double bias, double threshold, std::map<std::string, double> weights);
  static LinearNgramClassifier load(const std::string& path);

  double probability(std::string_view page_text) const;
  bool is_harmful(std::string_view page_text) const override;

 private:
  double bias_;
  double threshold_;
  std::map<std::string, double, std::less<>> weights_;
};

// Flags a page when any member does.
class AnyOfHarmFilter final : public HarmFilter {
 public:
  explicit AnyOfHarmFilter(std::vector<std::shared_ptr<const HarmFilter>> members);
  bool is_harmful(std::string_view page_text) const override;

 private:
  std::vector<std::shared_ptr<const HarmFilter>> members_;
};

// Lowercased words of ASCII letters/digits; other bytes separate words.
std::vector<std::string> tokenize_words(std::string_view text);

bool classify_interactive(const UiElement& e);
bool is_valid_element(const UiElement& e, const Viewport& v);
ElementKind classify_kind(const UiElement& e);

// Recomputes interactive and kind for every element from tags and attributes.
void classify_elements(PageSnapshot& s);

std::size_t count_valid_elements(const PageSnapshot& s);

// Checks ids are unique, the viewport is valid and every box fits.
// Returns an empty string when well formed, else the first problem found.
std::string check_snapshot(const PageSnapshot& s);

FilterVerdict filter_page(const PageSnapshot& s, const HarmFilter& harm);

// Stable partition Graphical-before-Textual, then truncate to cap.
std::vector<UiElement> prioritize_elements(const std::vector<UiElement>& elems, std::size_t cap);

// Valid elements of s in document order.
std::vector<UiElement> valid_elements(const PageSnapshot& s);

}  // namespace uiground
