#include "uiground/assemble.hpp"

#include <algorithm>
#include <fstream>
#include <cmath>
#include <map>
#include <set>

#include "uiground/digest.hpp"
#include "uiground/error.hpp"
#include "uiground/json_io.hpp"
#include "uiground/prompts.hpp"
#include "uiground/random.hpp"

namespace uiground {

namespace fs = std::filesystem;

std::vector<GroundingSample> make_samples(const UiElement& e, const ElementCaption& caption,
                                          const InstructionSet& instructions, const Viewport& v,
                                          const SampleOrigin& origin, const SampleFlags& flags) {
  const NormBBox box = normalize_bbox(e.bbox, v);
  const NormPoint center = normalized_center(e.bbox, v);
  const std::string base = origin.page_id + "/" + e.id;

  auto sample = [&](std::string id, std::string query, QueryKind kind) {
    GroundingSample s;
    s.sample_id = std::move(id);
    s.platform = origin.platform;
    s.image_refs = {origin.image_ref};
    s.query = std::move(query);
    s.query_kind = kind;
    s.target_point = center;
    s.target_box = box;
    s.source = origin.source;
    s.phase = Phase::SingleStep;
    return s;
  };

  std::vector<GroundingSample> out;
  if (flags.diversified_instructions) {
    for (std::size_t i = 0; i < instructions.instructions.size(); ++i) {
      out.push_back(sample(base + "/ins" + std::to_string(i), instructions.instructions[i],
                           QueryKind::Instruction));
    }
  }
  if (flags.caption_supervision || !flags.diversified_instructions) {
    out.push_back(sample(base + "/cap", caption.caption, QueryKind::ReferCaption));
  }
  return out;
}

std::string format_answer(const NormPoint& p) {
  return "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
}

std::string grounding_user_turn(const GroundingSample& s) {
  return std::string(prompts::kGroundingTemplate) + s.query;
}

Conversation group_conversations(const std::vector<GroundingSample>& samples, std::uint64_t seed) {
  if (samples.empty()) throw InputError("cannot group an empty sample list");
  const std::string& image = samples.front().current_image();
  for (const auto& s : samples) {
    if (s.current_image() != image) {
      throw InputError("sample '" + s.sample_id + "' is not on image '" + image + "'");
    }
  }
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng = Rng::substream(seed, "assemble.group/" + image);
  rng.shuffle(order);

  Conversation c;
  c.conversation_id = "img:" + image;
  c.image_refs = {image};
  c.turns.reserve(samples.size() * 2);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& s = samples[order[k]];
    ChatTurn user{"user", grounding_user_turn(s), {}};
    if (k == 0) user.image_refs = {image};
    c.turns.push_back(std::move(user));
    c.turns.push_back({"assistant", format_answer(s.target_point), {}});
    c.sample_ids.push_back(s.sample_id);
  }
  return c;
}

std::vector<Conversation> group_all(const std::vector<GroundingSample>& samples, std::uint64_t seed) {
  std::map<std::string, std::vector<GroundingSample>> by_image;
  for (const auto& s : samples) by_image[s.current_image()].push_back(s);
  std::vector<Conversation> out;
  out.reserve(by_image.size());
  for (const auto& [image, group] : by_image) out.push_back(group_conversations(group, seed));
  return out;
}

Conversation context_conversation(const GroundingSample& s) {
  Conversation c;
  c.conversation_id = "ctx:" + s.sample_id;
  c.image_refs = s.image_refs;
  std::string preamble = "Task: " + s.task;
  c.turns.push_back({"user", preamble, {}});
  if (s.history) {
    // Prior actions are replayed as assistant turns so the model sees them as
    // its own history; attached screenshots ride on the turn that produced them.
    for (const auto& turn : *s.history) {
      ChatTurn t{"assistant", turn.text, {}};
      if (turn.image_ref) t.image_refs = {*turn.image_ref};
      c.turns.push_back(std::move(t));
      c.turns.push_back({"user", "Continue.", {}});
    }
  }
  // Merge the trailing user turn with the grounding query.
  ChatTurn& last = c.turns.back();
  last.content = (last.content == "Continue." ? std::string() : last.content + "\n") +
                 grounding_user_turn(s);
  last.image_refs.push_back(s.current_image());
  c.turns.push_back({"assistant", format_answer(s.target_point), {}});
  c.sample_ids = {s.sample_id};
  return c;
}

std::size_t phase2_mix_count(std::size_t context_count, double ratio) noexcept {
  return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(context_count)));
}

std::vector<GroundingSample> compose_phase2(const std::vector<GroundingSample>& context_samples,
                                            const std::vector<GroundingSample>& single_step_pool,
                                            std::uint64_t seed, double ratio) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw ConfigError("mix ratio must be in [0, 1]");
  const std::size_t need = phase2_mix_count(context_samples.size(), ratio);
  if (single_step_pool.size() < need) {
    throw InputError("phase-2 mix needs " + std::to_string(need) + " single-step samples, pool has " +
                     std::to_string(single_step_pool.size()) + " (short by " +
                     std::to_string(need - single_step_pool.size()) + ")");
  }
  std::vector<GroundingSample> out = context_samples;
  Rng draw = Rng::substream(seed, "assemble.phase2.draw");
  for (std::size_t idx : draw.sample_without_replacement(single_step_pool.size(), need)) {
    out.push_back(single_step_pool[idx]);
  }
  Rng order = Rng::substream(seed, "assemble.phase2.shuffle");
  order.shuffle(out);
  return out;
}

std::size_t CorpusManifest::total() const noexcept {
  std::size_t n = 0;
  for (const auto& [key, count] : counts) n += count;
  return n;
}

namespace {

Json manifest_to_json(const CorpusManifest& m) {
  Json counts = Json::array();
  for (const auto& [key, n] : m.counts) {
    const auto& [platform, source, kind, phase] = key;
    counts.push_back({{"platform", platform},
                      {"source", source},
                      {"query_kind", kind},
                      {"phase", phase},
                      {"count", n}});
  }
  Json files = Json::object();
  for (const auto& [name, info] : m.files) {
    files[name] = {{"lines", info.first}, {"sha256", info.second}};
  }
  return Json{{"seed", m.seed},
              {"split_ratios", {{"train", 1.0 - m.val_ratio}, {"val", m.val_ratio}}},
              {"split_counts", m.split_counts},
              {"counts", counts},
              {"total_samples", m.total()},
              {"files", files}};
}

CorpusManifest manifest_from_json(const Json& j) {
  CorpusManifest m;
  j.at("seed").get_to(m.seed);
  j.at("split_ratios").at("val").get_to(m.val_ratio);
  j.at("split_counts").get_to(m.split_counts);
  for (const auto& c : j.at("counts")) {
    m.counts[{c.at("platform").get<Platform>(), c.at("source").get<std::string>(),
              c.at("query_kind").get<QueryKind>(), c.at("phase").get<Phase>()}] =
        c.at("count").get<std::size_t>();
  }
  for (const auto& [name, info] : j.at("files").items()) {
    m.files[name] = {info.at("lines").get<std::size_t>(), info.at("sha256").get<std::string>()};
  }
  return m;
}

}  // namespace

CorpusManifest serialize(const Corpus& corpus, const fs::path& dir, std::uint64_t seed,
                         double val_ratio) {
  if (!(val_ratio >= 0.0 && val_ratio <= 1.0)) throw ConfigError("val ratio must be in [0, 1]");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create " + dir.string() + ": " + ec.message());

  for (const auto& s : corpus.samples) {
    if (auto problem = check_sample(s); !problem.empty()) throw InvariantError(problem);
  }

  // Split by conversation so grouped samples stay together.
  std::map<std::string, std::string> split_of_sample;
  {
    const std::size_t n = corpus.conversations.size();
    const std::size_t n_val = static_cast<std::size_t>(std::llround(val_ratio * static_cast<double>(n)));
    Rng rng = Rng::substream(seed, "assemble.split");
    std::set<std::size_t> val;
    for (std::size_t idx : rng.sample_without_replacement(n, n_val)) val.insert(idx);
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& id : corpus.conversations[i].sample_ids) {
        split_of_sample[id] = val.count(i) ? "val" : "train";
      }
    }
  }

  CorpusManifest m;
  m.seed = seed;
  m.val_ratio = val_ratio;
  std::map<std::string, std::string> conversation_of;
  for (const auto& c : corpus.conversations) {
    for (const auto& id : c.sample_ids) conversation_of[id] = c.conversation_id;
  }

  std::vector<Json> sample_lines;
  sample_lines.reserve(corpus.samples.size());
  for (const auto& s : corpus.samples) {
    Json j = s;
    auto conv = conversation_of.find(s.sample_id);
    j["conversation_id"] = conv == conversation_of.end() ? Json(nullptr) : Json(conv->second);
    auto split = split_of_sample.find(s.sample_id);
    const std::string split_name = split == split_of_sample.end() ? "train" : split->second;
    j["split"] = split_name;
    sample_lines.push_back(std::move(j));
    ++m.counts[{s.platform, s.source, s.query_kind, s.phase}];
    ++m.split_counts[split_name];
  }
  std::vector<Json> conv_lines(corpus.conversations.begin(), corpus.conversations.end());

  const fs::path samples_path = dir / kSamplesFile;
  const fs::path conv_path = dir / kConversationsFile;
  m.files[kSamplesFile] = {write_jsonl(samples_path, sample_lines), file_sha256_hex(samples_path.string())};
  m.files[kConversationsFile] = {write_jsonl(conv_path, conv_lines), file_sha256_hex(conv_path.string())};
  write_json_file(dir / kManifestFile, manifest_to_json(m));
  return m;
}

namespace {

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot read " + p.string());
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace

CorpusManifest validate_corpus(const fs::path& dir) {
  const Json j = read_json_file(dir / kManifestFile);
  CorpusManifest m;
  try {
    m = manifest_from_json(j);
  } catch (const Json::exception& e) {
    throw InputError((dir / kManifestFile).string() + ": " + e.what());
  }
  for (const auto& [name, info] : m.files) {
    const fs::path p = dir / name;
    const std::string digest = file_sha256_hex(p.string());
    if (digest != info.second) {
      throw InvariantError("digest mismatch for " + p.string() + ": manifest " + info.second +
                           ", file " + digest);
    }
    const std::size_t lines = count_lines(p);
    if (lines != info.first) {
      throw InvariantError("line count mismatch for " + p.string() + ": manifest " +
                           std::to_string(info.first) + ", file " + std::to_string(lines));
    }
  }
  auto it = m.files.find(kSamplesFile);
  if (it == m.files.end()) throw InvariantError("manifest lists no " + std::string(kSamplesFile));
  if (it->second.first != m.total()) {
    throw InvariantError("manifest counts sum to " + std::to_string(m.total()) + " but " +
                         kSamplesFile + " has " + std::to_string(it->second.first) + " lines");
  }
  return m;
}

Corpus read_corpus(const fs::path& dir) {
  Corpus c;
  try {
    for (const auto& j : read_jsonl(dir / kSamplesFile)) c.samples.push_back(j.get<GroundingSample>());
    for (const auto& j : read_jsonl(dir / kConversationsFile)) {
      c.conversations.push_back(j.get<Conversation>());
    }
  } catch (const Json::exception& e) {
    throw InputError(dir.string() + ": " + e.what());
  }
  return c;
}

}  // namespace uiground
