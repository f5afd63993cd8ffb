#include "cli.hpp"

int main(int argc, char** argv) { return xmes::cli::run_cli(argc, argv); }
