#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cotlab {

// Exit codes: 0 success, 1 usage or validation error, 2 verification failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitVerify = 2;

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cotlab
