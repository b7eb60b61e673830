#include "stark_cli.hpp"

int main(int argc, char** argv) { return stark::cli::main_entry(argc, argv); }
