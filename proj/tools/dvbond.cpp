#include <iostream>
#include <string>
#include <vector>

#include "dvb/commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return dvb::run_cli(args, std::cout, std::cerr);
}
