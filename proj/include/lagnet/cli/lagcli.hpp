#pragma once

// lagcli: gen, train, eval and rollout as file-based commands.
//
// Exit codes: 0 ok, 2 usage or validation error, 3 I/O failure, 4 numeric
// divergence.

#include <ostream>
#include <string>
#include <vector>

namespace lagnet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitDiverged = 4;

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lagnet::cli
