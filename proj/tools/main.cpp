#include <iostream>

#include "freelab/cli.hpp"

int main(int argc, char** argv) { return freelab::cli::run(argc, argv, std::cout, std::cerr); }
