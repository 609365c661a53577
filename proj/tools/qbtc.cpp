#include <string>
#include <vector>

#include "qbtc/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return qbtc::cli::run(args);
}
