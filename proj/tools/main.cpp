#include <iostream>

#include "filippov/cli.hpp"

int main(int argc, char** argv) { return filippov::cli::run(argc, argv, std::cerr); }
