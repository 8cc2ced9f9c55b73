#include "dfs/canonical.hpp"

namespace dfs {

std::string canonical_bytes(const json& value) {
    return value.dump();
}

}  // namespace dfs
