#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace eml::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalidFlags = 2;
inline constexpr int kExitUnwritablePath = 3;
inline constexpr int kExitMalformedRecord = 4;
inline constexpr int kExitPortBusy = 5;

/// Runs one `eml` invocation. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eml::cli
