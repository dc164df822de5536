#include "opial/cli.hpp"

int main(int argc, char** argv) { return opial::cli::main_entry(argc, argv); }
