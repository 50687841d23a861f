#include <string>
#include <vector>

#include "ovnet/cli.hpp"

int main(int argc, char** argv) {
    return ovnet::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
