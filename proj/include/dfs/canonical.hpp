#pragma once

#include <string>

#include "json.hpp"

namespace dfs {

using json = nlohmann::json;

// Deterministic byte encoding used everywhere bytes must be reproducible
// (checksums, stored documents, machine output): object members in
// code-point order of their keys, no insignificant whitespace, UTF-8 kept
// raw, strings minimally escaped, integers without leading zeros.
//
// nlohmann::json already stores object members sorted (std::map with
// byte-wise key comparison, which is code-point order for UTF-8), so a
// compact dump satisfies the contract; this wrapper pins it in one place.
std::string canonical_bytes(const json& value);

}  // namespace dfs
