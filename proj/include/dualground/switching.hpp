// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#pragma once

#include <stdexcept>
#include <string_view>

namespace dualground {

class InvalidDistribution : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Probability mass the model puts on each mode-deciding first token.
/// `p_other` is whatever is left for every other token.
struct FirstTokenDist {
  double p_summary = 0.0;
  double p_ground = 0.0;
  double p_other = 0.0;

  static constexpr double kSumTolerance = 1e-9;

  /// Throws InvalidDistribution on a field outside [0,1] or a total mass
  /// above 1 + kSumTolerance.
  void validate() const;

  friend bool operator==(const FirstTokenDist&, const FirstTokenDist&) =
      default;
};

enum class Mode { kFast, kSlow };

std::string_view to_string(Mode mode);

inline constexpr double kDefaultAlpha = 0.6;

struct SwitchPolicy {
  double alpha = kDefaultAlpha;
  /// Mode returned when both adjusted probabilities are equal and nonzero.
  Mode tie_break = Mode::kFast;

  /// Throws std::invalid_argument when alpha is outside [0,1].
  void validate() const;
};

struct ModeDecision {
  Mode mode = Mode::kFast;
  double p_fast_adj = 0.0;
  double p_slow_adj = 0.0;
  /// Set when neither marker carried any adjusted mass.
  bool fallback_used = false;

  friend bool operator==(const ModeDecision&, const ModeDecision&) = default;
};

// Scales the raw first-token probabilities (no renormalization):
//   slow = alpha * p_summary, fast = (1 - alpha) * p_ground
// and activates the larger one.
ModeDecision select_mode(const FirstTokenDist& dist, const SwitchPolicy& policy);

}  // namespace dualground
