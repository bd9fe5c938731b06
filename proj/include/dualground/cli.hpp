// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dualground::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitBackend = 3;
inline constexpr int kExitUsage = 64;

/// Runs one command line (program name excluded) and returns its exit
/// code. Nothing is written to the process streams other than `out` and
/// `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dualground::cli
