#pragma once

#include <ostream>

namespace d2ke {

// Exit codes: 0 success, 1 configuration or usage error, 2 runtime failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace d2ke
