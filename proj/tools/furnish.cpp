#include "furnish/cli.hpp"

int main(int argc, char** argv) { return furnish::cli::main(argc, argv); }
