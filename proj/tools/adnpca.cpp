#include <iostream>

#include "adnpca/cli.hpp"

int main(int argc, char** argv) {
    return adnpca::cli::run(argc, argv, std::cout, std::cerr);
}
