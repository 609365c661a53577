#pragma once

#include <string>
#include <vector>

namespace qbtc::cli {

// Exit code taxonomy; every termination path maps to one of these.
inline constexpr int kOk = 0;          // success / verification accepted
inline constexpr int kInternal = 1;    // unexpected internal failure
inline constexpr int kConfigError = 2; // invalid configuration or usage
inline constexpr int kIoError = 3;     // unreadable, unparsable or missing files
inline constexpr int kRejected = 4;    // verification rejected (staged diagnostics)
inline constexpr int kResource = 5;    // supply cap reached or mining stalled

// Runs one CLI invocation; args excludes the program name. The binary in
// tools/ is a thin trampoline onto this, and tests drive it in-process.
int run(const std::vector<std::string>& args);

} // namespace qbtc::cli
