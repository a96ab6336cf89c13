#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uiground/geometry.hpp"

namespace uiground {

enum class QueryKind { Instruction, ReferCaption };
enum class Phase { SingleStep, ContextAware };

std::string_view to_string(QueryKind k) noexcept;
std::string_view to_string(Phase p) noexcept;

struct HistoryTurn {
  std::string text;
  std::optional<std::string> image_ref;

  friend bool operator==(const HistoryTurn&, const HistoryTurn&) = default;
};

struct GroundingSample {
  std::string sample_id;
  Platform platform = Platform::Web;
  // History screenshots in chronological order, current image last.
  std::vector<std::string> image_refs;
  std::string query;
  QueryKind query_kind = QueryKind::Instruction;
  // Ultimate task of the trajectory; context-aware samples only.
  std::string task;
  std::optional<std::vector<HistoryTurn>> history;
  NormPoint target_point;
  std::optional<NormBBox> target_box;
  std::string source;
  Phase phase = Phase::SingleStep;

  const std::string& current_image() const { return image_refs.back(); }

  friend bool operator==(const GroundingSample&, const GroundingSample&) = default;
};

// Empty when well formed, else the first violated invariant.
std::string check_sample(const GroundingSample& s);

}  // namespace uiground
