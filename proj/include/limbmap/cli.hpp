#pragma once

#include <string>
#include <vector>

namespace limbmap {

/// Exit status: 0 success, 1 usage error, 2 data or model error.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace limbmap
