#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"
#include "langnav/world.hpp"

namespace langnav {

// Map files (schema "langnav-map/1"):
//   resolution, origin [x, y], width, height,
//   rows: top row first; each row is ASCII ('.' free, '#' obstacle,
//         '?' unknown) or run-length encoded ("12.3#" = 12 free, 3 obstacle),
//   start {x, y, heading}, locations [{name, x, y}],
//   objects [{id, label, x, y, radius, motion: {type: "static"} |
//             {type: "loop", speed, waypoints: [[x, y], ...]}}].
// Violated invariants are reported together in one Error(InvariantViolation).
SemanticMap parse_map(const nlohmann::json& doc);
SemanticMap load_map(const std::filesystem::path& path);
nlohmann::json map_to_json(const SemanticMap& map);

// Decodes one grid row (ASCII or RLE). Throws Error(Parse).
std::vector<Cell> decode_row(const std::string& row);
std::string encode_row(const std::vector<Cell>& row);

}  // namespace langnav
