#include "dfs/cli.hpp"

int main(int argc, char** argv) {
    return dfs::cli::run(argc, argv);
}
