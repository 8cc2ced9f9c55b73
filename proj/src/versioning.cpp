#include "dfs/versioning.hpp"

#include <algorithm>
#include <set>

#include "dfs/checksum.hpp"

namespace dfs {

std::string compute_meta_checksum(const Metafile& m) {
    return "sha256:" + sha256_hex(canonical_bytes(m.meta));
}

Metafile bump(const Metafile& m, const VersionBump& change, std::int64_t now) {
    auto modified = parse_timestamp(m.modified);
    if (modified && now < *modified) {
        throw ClockError("new modified time " + format_timestamp(now) +
                         " is earlier than current modified time " + m.modified);
    }

    if (change.kind == BumpKind::meta_only) {
        if (!change.changed_file_local_ids.empty()) {
            throw UsageError("meta-only bump must not list changed files");
        }
    } else {
        if (change.changed_file_local_ids.empty()) {
            throw UsageError("file-change bump needs at least one file local id");
        }
        std::set<std::string> seen;
        for (const auto& id : change.changed_file_local_ids) {
            if (!seen.insert(id).second) {
                throw UsageError("duplicate file local id in bump: \"" + id + "\"");
            }
        }
    }

    Metafile next = m;
    if (change.kind == BumpKind::file_change) {
        for (const auto& id : change.changed_file_local_ids) {
            auto it = std::find_if(next.meta.files.begin(), next.meta.files.end(),
                                   [&id](const DataFileEntry& f) { return f.local_id == id; });
            if (it == next.meta.files.end()) {
                throw UnknownFileError("no data file with local id \"" + id + "\"");
            }
            it->version += 1;
        }
    }
    next.meta_version = m.meta_version + 1;
    next.modified = format_timestamp(now);
    next.checksum = compute_meta_checksum(next);
    return next;
}

std::string cite(const Metafile& m) {
    return m.ref().str();
}

}  // namespace dfs
