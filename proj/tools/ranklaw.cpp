#include "ranklaw/cli.hpp"

int main(int argc, char** argv) { return ranklaw::cli::main_entry(argc, argv); }
