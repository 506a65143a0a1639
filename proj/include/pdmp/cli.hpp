#pragma once

#include <string>
#include <vector>

namespace pdmp {

// Command-line entry point. Exit code 0 on success, 1 on validation or
// I/O errors, 2 when a checked bound was flagged as violated.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace pdmp
