#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rassoc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

inline constexpr const char* kToolkitVersion = "0.1.0";

// Runs one command line (without the program name). Exit codes: 0 success,
// 1 usage or configuration error, 2 data or model error.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace rassoc::cli
