#include "otrank/cli.hpp"

int main(int argc, char** argv) { return otrank::cli::main_entry(argc, argv); }
