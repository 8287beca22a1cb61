#pragma once

// Command-line front end. Exit codes: 0 success, 1 validation failure,
// 2 runtime or fit failure.

#include <iosfwd>
#include <string>
#include <vector>

namespace biphoton::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitRuntime = 2;

/// Environment variable naming the default output root.
inline constexpr const char* kOutputRootEnv = "BIPHOTON_OUT";

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace biphoton::cli
