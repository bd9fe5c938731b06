// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#include "dualground/switching.hpp"

#include <fmt/format.h>

namespace dualground {
namespace {

bool unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

void FirstTokenDist::validate() const {
  if (!unit(p_summary) || !unit(p_ground) || !unit(p_other)) {
    throw InvalidDistribution(
        fmt::format("first-token probabilities ({}, {}, {}) outside [0,1]",
                    p_summary, p_ground, p_other));
  }
  if (p_summary + p_ground + p_other > 1.0 + kSumTolerance) {
    throw InvalidDistribution(fmt::format(
        "first-token mass {} exceeds 1", p_summary + p_ground + p_other));
  }
}

std::string_view to_string(Mode mode) {
  return mode == Mode::kSlow ? "slow" : "fast";
}

void SwitchPolicy::validate() const {
  if (!unit(alpha)) {
    throw std::invalid_argument(fmt::format("alpha {} outside [0,1]", alpha));
  }
}

ModeDecision select_mode(const FirstTokenDist& dist, const SwitchPolicy& policy) {
  dist.validate();
  policy.validate();
  ModeDecision d;
  d.p_slow_adj = policy.alpha * dist.p_summary;
  d.p_fast_adj = (1.0 - policy.alpha) * dist.p_ground;
  if (d.p_slow_adj == 0.0 && d.p_fast_adj == 0.0) {
    d.mode = Mode::kFast;
    d.fallback_used = true;
  } else if (d.p_slow_adj > d.p_fast_adj) {
    d.mode = Mode::kSlow;
  } else if (d.p_fast_adj > d.p_slow_adj) {
    d.mode = Mode::kFast;
  } else {
    d.mode = policy.tie_break;
  }
  return d;
}

}  // namespace dualground
