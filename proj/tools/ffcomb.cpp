#include <iostream>

#include "ffcomb/cli.hpp"

int main(int argc, char** argv) { return ffcomb::cli::dispatch(argc, argv, std::cout, std::cerr); }
