#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace kdl {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitIntegrity = 2;

/// Runs one command line (args excludes the program name). Returns the exit
/// status: 0 success, 1 usage or input error, 2 experiment-integrity error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kdl
