#pragma once

// JSON mappings for the on-disk formats (see docs/formats.md). Objects are
// nlohmann::json with sorted keys, so dumps are byte-stable.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "uiground/annotate.hpp"
#include "uiground/assemble.hpp"
#include "uiground/extract.hpp"
#include "uiground/model_client.hpp"
#include "uiground/sample.hpp"
#include "uiground/trajectory.hpp"

namespace uiground {

using Json = nlohmann::json;

void to_json(Json& j, const Viewport& v);
void from_json(const Json& j, Viewport& v);
void to_json(Json& j, const PixelPoint& p);
void from_json(const Json& j, PixelPoint& p);
void to_json(Json& j, const NormPoint& p);
void from_json(const Json& j, NormPoint& p);
void to_json(Json& j, const BBox& b);
void from_json(const Json& j, BBox& b);
void to_json(Json& j, const NormBBox& b);
void from_json(const Json& j, NormBBox& b);
void to_json(Json& j, const Platform& p);
void from_json(const Json& j, Platform& p);

void to_json(Json& j, const UiElement& e);
void from_json(const Json& j, UiElement& e);
void to_json(Json& j, const PageSnapshot& s);
void from_json(const Json& j, PageSnapshot& s);

void to_json(Json& j, const ElementCaption& c);
void from_json(const Json& j, ElementCaption& c);
void to_json(Json& j, const InstructionSet& s);
void from_json(const Json& j, InstructionSet& s);

void to_json(Json& j, const Action& a);
void from_json(const Json& j, Action& a);
void to_json(Json& j, const TrajectoryStep& s);
void from_json(const Json& j, TrajectoryStep& s);
void to_json(Json& j, const Trajectory& t);
void from_json(const Json& j, Trajectory& t);

void to_json(Json& j, const QueryKind& k);
void from_json(const Json& j, QueryKind& k);
void to_json(Json& j, const Phase& p);
void from_json(const Json& j, Phase& p);
void to_json(Json& j, const HistoryTurn& t);
void from_json(const Json& j, HistoryTurn& t);
void to_json(Json& j, const GroundingSample& s);
void from_json(const Json& j, GroundingSample& s);
void to_json(Json& j, const ChatTurn& t);
void from_json(const Json& j, ChatTurn& t);
void to_json(Json& j, const Conversation& c);
void from_json(const Json& j, Conversation& c);

void to_json(Json& j, const ClientConfig& c);
void from_json(const Json& j, ClientConfig& c);

// File helpers. Parse failures become InputError naming the file (and line).
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);
std::vector<Json> read_jsonl(const std::filesystem::path& path);
// One compact record per line; returns the number of lines written.
std::size_t write_jsonl(const std::filesystem::path& path, const std::vector<Json>& records);

// {dir}/snapshot.json. Boxes are clamped to the viewport; elements left with
// no area are dropped. Throws InputError on unreadable or malformed input.
PageSnapshot load_snapshot(const std::filesystem::path& dir);
void save_snapshot(const PageSnapshot& s, const std::filesystem::path& dir);

Trajectory load_trajectory(const std::filesystem::path& file);
void save_trajectory(const Trajectory& t, const std::filesystem::path& file);

}  // namespace uiground

// Action is a std::variant alias, out of reach of ADL.
template <>
struct nlohmann::adl_serializer<uiground::Action> {
  static void to_json(uiground::Json& j, const uiground::Action& a) { uiground::to_json(j, a); }
  static void from_json(const uiground::Json& j, uiground::Action& a) { uiground::from_json(j, a); }
};
