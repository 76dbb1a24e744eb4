#include <iostream>
#include <string>
#include <vector>

#include <fvgrad/cli.hpp>

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return fvgrad::run_cli(args, std::cout, std::cerr);
}
