#include <iostream>

#include "moodtag/cli.hpp"

int main(int argc, char** argv) { return moodtag::cli::run(argc, argv, std::cout, std::cerr); }
