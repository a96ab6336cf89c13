#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "uiground/annotate.hpp"
#include "uiground/sample.hpp"

namespace uiground {

struct SampleFlags {
  // Adds one sample whose query is the element caption.
  bool caption_supervision = true;
  // When off, only the caption sample is produced.
  bool diversified_instructions = true;
};

struct SampleOrigin {
  std::string page_id;
  std::string image_ref;
  Platform platform = Platform::Web;
  std::string source;
};

// Per element: one Instruction sample per instruction, plus one ReferCaption
// sample when caption supervision is on. All share the element's normalized
// box and its center as target.
std::vector<GroundingSample> make_samples(const UiElement& e, const ElementCaption& caption,
                                          const InstructionSet& instructions, const Viewport& v,
                                          const SampleOrigin& origin, const SampleFlags& flags = {});

struct ChatTurn {
  std::string role;  // "user" | "assistant"
  std::string content;
  std::vector<std::string> image_refs;

  friend bool operator==(const ChatTurn&, const ChatTurn&) = default;
};

struct Conversation {
  std::string conversation_id;
  std::vector<std::string> image_refs;
  std::vector<ChatTurn> turns;
  // Samples in turn order.
  std::vector<std::string> sample_ids;

  friend bool operator==(const Conversation&, const Conversation&) = default;
};

// "(x, y)"
std::string format_answer(const NormPoint& p);

// The user turn for a sample, grounding template plus query.
std::string grounding_user_turn(const GroundingSample& s);

// Samples sharing one image, shuffled by a substream of `seed` named after the
// image, as alternating user/assistant turns. Throws InputError when the samples
// do not share an image or the list is empty.
Conversation group_conversations(const std::vector<GroundingSample>& samples, std::uint64_t seed);

// Groups every sample by current image; conversations sorted by image ref.
std::vector<Conversation> group_all(const std::vector<GroundingSample>& samples, std::uint64_t seed);

// One conversation per context-aware sample: task and history first, then the query.
Conversation context_conversation(const GroundingSample& s);

inline constexpr double kDefaultMixRatio = 0.20;

// All context samples plus round(ratio * |context|) single-step samples drawn
// without replacement, shuffled. Throws InputError naming the shortfall when
// the pool is too small.
std::vector<GroundingSample> compose_phase2(const std::vector<GroundingSample>& context_samples,
                                            const std::vector<GroundingSample>& single_step_pool,
                                            std::uint64_t seed, double ratio = kDefaultMixRatio);

std::size_t phase2_mix_count(std::size_t context_count, double ratio) noexcept;

using CountKey = std::tuple<Platform, std::string, QueryKind, Phase>;

struct CorpusManifest {
  std::uint64_t seed = 0;
  double val_ratio = 0.0;
  std::map<CountKey, std::size_t> counts;
  std::map<std::string, std::size_t> split_counts;
  // file name -> (line count, sha256)
  std::map<std::string, std::pair<std::size_t, std::string>> files;

  std::size_t total() const noexcept;
};

struct Corpus {
  std::vector<GroundingSample> samples;
  std::vector<Conversation> conversations;
};

inline constexpr const char* kSamplesFile = "samples.jsonl";
inline constexpr const char* kConversationsFile = "conversations.jsonl";
inline constexpr const char* kManifestFile = "manifest.json";

// Writes samples.jsonl, conversations.jsonl and manifest.json into dir.
// Conversations are assigned to "train"/"val" by a seeded draw of
// round(val_ratio * n) conversations. Returns the manifest written.
CorpusManifest serialize(const Corpus& corpus, const std::filesystem::path& dir, std::uint64_t seed,
                         double val_ratio = 0.0);

// Re-reads a corpus directory, checking digests and line counts against the
// manifest. Throws InvariantError on mismatch.
CorpusManifest validate_corpus(const std::filesystem::path& dir);

Corpus read_corpus(const std::filesystem::path& dir);

}  // namespace uiground
