#include <iostream>
#include <string>
#include <vector>

#include "philap/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return philap::run(args, std::cout, std::cerr);
}
