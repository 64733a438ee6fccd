#include <iostream>

#include "dgpenalty/cli/app.hpp"

int main(int argc, char** argv)
{
    return dgp::cli::run_cli(argc, argv, std::cout, std::cerr);
}
