#include "rawcode_cli.hpp"

int main(int argc, char** argv) { return rawcode::cli::run_cli(argc, argv); }
