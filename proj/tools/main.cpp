#include "percdet/cli.hpp"

int main(int argc, char** argv) { return percdet::cli::run_cli(argc, argv); }
