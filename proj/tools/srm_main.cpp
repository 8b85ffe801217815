#include "srm/cli.hpp"

int main(int argc, char** argv) { return srm::cli::run_cli(argc, argv); }
