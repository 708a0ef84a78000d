#include <iostream>

#include "capbem/cli.hpp"

int main(int argc, char** argv)
{
    return capbem::cli::run(argc, argv, std::cout, std::cerr);
}
