#include "mixht_cli/cli.hpp"

int main(int argc, char** argv) { return mixht::cli::main_entry(argc, argv); }
