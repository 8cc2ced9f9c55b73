#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dfs/metafile.hpp"

namespace dfs {

enum class BumpKind { meta_only, file_change };

struct VersionBump {
    BumpKind kind = BumpKind::meta_only;
    std::vector<std::string> changed_file_local_ids;  // non-empty iff file_change
};

// "sha256:" + hex SHA-256 of the canonical bytes of m.meta. The top-level
// checksum field is not part of its own input.
std::string compute_meta_checksum(const Metafile& m);

// Returns a new metafile with meta_version + 1, modified = now, the listed
// files' versions incremented (file_change), and the checksum recomputed.
// created and id are never touched. Throws UnknownFileError, ClockError,
// UsageError (malformed VersionBump).
Metafile bump(const Metafile& m, const VersionBump& change, std::int64_t now);

// Immutable citation identifier "<id>@v<meta_version>".
std::string cite(const Metafile& m);

}  // namespace dfs
