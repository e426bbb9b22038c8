#include "cli/cli.hpp"

int main(int argc, char** argv) { return tgw::cli::run_cli(argc, argv); }
