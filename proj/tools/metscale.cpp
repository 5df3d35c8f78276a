#include "metscale/cli.hpp"

int main(int argc, char** argv) { return metscale::cli::main_entry(argc, argv); }
