#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uiground/extract.hpp"
#include "uiground/imaging.hpp"
#include "uiground/model_client.hpp"

namespace uiground {

struct ElementCaption {
  std::string element_id;
  std::string caption;
  std::string source_model;
  std::string prompt_hash;

  friend bool operator==(const ElementCaption&, const ElementCaption&) = default;
};

inline constexpr std::size_t kInstructionsPerElement = 3;

struct InstructionSet {
  std::string element_id;
  std::vector<std::string> instructions;  // exactly kInstructionsPerElement, pairwise distinct
  std::string source_model;

  friend bool operator==(const InstructionSet&, const InstructionSet&) = default;
};

// Either a value or the reason the element was dropped.
template <class T>
struct Outcome {
  std::optional<T> value;
  std::string skip_reason;

  bool ok() const noexcept { return value.has_value(); }
  static Outcome skipped(std::string why) { return {std::nullopt, std::move(why)}; }
};

// Content-addressed store of raw model responses, keyed by
// sha256(stage, prompt, image digests). With a directory, entries persist as
// {dir}/{stage}/{key}.json; writes go through a temp file and rename, so
// concurrent writers of one key race benignly (identical values).
class AnnotationCache {
 public:
  AnnotationCache() = default;
  explicit AnnotationCache(std::filesystem::path dir);

  static std::string make_key(std::string_view stage, std::string_view prompt,
                              const std::vector<std::string>& image_digests);

  std::optional<std::string> get(std::string_view stage, const std::string& key);
  void put(std::string_view stage, const std::string& key, std::string_view model,
           std::string_view response);

  std::size_t hits() const noexcept { return hits_.load(); }
  std::size_t misses() const noexcept { return misses_.load(); }

 private:
  std::filesystem::path path_for(std::string_view stage, const std::string& key) const;

  std::optional<std::filesystem::path> dir_;
  std::mutex mu_;
  std::map<std::string, std::string> memory_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
};

inline constexpr std::string_view kCaptionStage = "caption";
inline constexpr std::string_view kInstructionStage = "instruction";

struct AnnotationContext {
  ModelClient& captioner;
  ModelClient& instructor;
  AnnotationCache& cache;
  RetryPolicy retry;
  double zoom_factor = kDefaultZoomFactor;
};

// Tag, descriptive attributes and text rendered as a short HTML fragment.
// Empty when the element carries no text of any kind.
std::string element_html_text(const UiElement& e);

ModelRequest build_caption_prompt(const UiElement& e, const CropPair& crops, const Viewport& v);

Outcome<ElementCaption> caption_element(const UiElement& e, const CropPair& crops,
                                        const Viewport& v, AnnotationContext& ctx);

// Items of a "1. ..." / "2) ..." list, in order, with markers stripped.
std::vector<std::string> parse_numbered_list(std::string_view response);

// Lowercased with runs of whitespace collapsed and ends trimmed.
std::string fold_for_distinctness(std::string_view s);

// First kInstructionsPerElement pairwise-distinct items, or fewer if not available.
std::vector<std::string> distinct_instructions(const std::vector<std::string>& items);

Outcome<InstructionSet> generate_instructions(const ElementCaption& caption,
                                              AnnotationContext& ctx);

struct AnnotatedElement {
  UiElement element;
  ElementCaption caption;
  InstructionSet instructions;
};

struct SkipRecord {
  std::string element_id;
  std::string stage;
  std::string reason;
};

struct AnnotatedPage {
  std::vector<AnnotatedElement> elements;
  std::vector<SkipRecord> skipped;
};

// Valid elements -> prioritize_elements(cap) -> caption -> instructions.
// Runs up to `workers` elements at once; output order follows priority order.
AnnotatedPage annotate_snapshot(const PageSnapshot& s, const Image& screenshot,
                                AnnotationContext& ctx, std::size_t cap, std::size_t workers = 1);

}  // namespace uiground
