#include "am2r/cli.hpp"

int main(int argc, char** argv) { return am2r::run_cli(argc, argv); }
