#include "gm/cli.hpp"

int main(int argc, char** argv) { return gm::run_cli(argc, argv); }
