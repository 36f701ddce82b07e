#include "eitsim/cli.hpp"

int main(int argc, char** argv) { return eitsim::run_cli(argc, argv); }
