#include "cli/commands.hpp"

int main(int argc, char** argv) { return hmotor::cli::run_cli(argc, argv); }
