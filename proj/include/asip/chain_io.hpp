#pragma once

#include "asip/chain.hpp"

#include <json.hpp>

#include <filesystem>

namespace asip {

/// Builds a validated chain from a chain document:
///
///   {
///     "states": 2,                          // optional; int or per-time list
///     "d": 1,                               // optional; checked against tables
///     "L": 1.0,                             // optional; defaults to max |f|
///     "initial": [0.5, 0.5],
///     "kernels": [K1, K2, ...]              // explicit, finite horizon
///              | {"periodic": [K1, ...]}
///              | {"mixture": {"components": [K1, K2],
///                             "weights": {"kind": "sine", "period": 8, "amplitude": 0.3}}},
///     "observable": T                       // one table for every time
///                 | {"periodic": [T1, ...]} | {"table": [T1, ..., Tn]}
///   }
///
/// A table lists one entry per state: a number when d = 1, else a d-vector.
ChainSpec parse_chain(const nlohmann::json& doc);

ChainSpec load_chain(const std::filesystem::path& path);

/// Reads a file into a JSON document, throwing InputError naming the path.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace asip
