#pragma once

namespace dfs::cli {

// Exit codes: 0 success, 1 validation failure, 2 usage error, 3 integrity
// failure, 4 aggregation incompatibility (gate or no-match).
//
// DFS_REPO overrides the repository root; DFS_NOW (ISO-8601 UTC) and
// DFS_UUID_SEED (integer) pin the clock and UUID source for reproducible
// runs.
int run(int argc, const char* const* argv);

}  // namespace dfs::cli
