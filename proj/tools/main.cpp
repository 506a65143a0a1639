#include "pdmp/cli.hpp"

int main(int argc, char** argv) { return pdmp::run_cli(argc, argv); }
