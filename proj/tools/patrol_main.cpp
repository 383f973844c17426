#include <string>
#include <vector>

#include "patrol/harness.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return patrol::cli(args);
}
