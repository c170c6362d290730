#include "fouest/cli.hpp"

int main(int argc, char** argv) { return fouest::cli::run(argc, argv); }
