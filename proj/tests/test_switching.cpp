// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#include <gtest/gtest.h>

#include "dualground/switching.hpp"

namespace dualground {
namespace {

ModeDecision decide(double alpha, double ps, double pg) {
  return select_mode({ps, pg, 1.0 - ps - pg}, SwitchPolicy{alpha});
}

TEST(SelectMode, HandEvaluatedExample) {
  const auto d = decide(0.6, 0.30, 0.50);
  EXPECT_EQ(d.mode, Mode::kFast);
  EXPECT_NEAR(d.p_slow_adj, 0.18, 1e-12);
  EXPECT_NEAR(d.p_fast_adj, 0.20, 1e-12);
  EXPECT_FALSE(d.fallback_used);
}

TEST(SelectMode, ZeroFactorCases) {
  const auto slow = decide(1.0, 0.01, 0.99);
  EXPECT_EQ(slow.mode, Mode::kSlow);
  EXPECT_EQ(slow.p_fast_adj, 0.0);
  const auto fast = decide(0.0, 0.99, 0.01);
  EXPECT_EQ(fast.mode, Mode::kFast);
  EXPECT_EQ(fast.p_slow_adj, 0.0);
}

TEST(SelectMode, ExactTieGoesFast) {
  const auto d = decide(0.5, 0.4, 0.4);
  EXPECT_EQ(d.mode, Mode::kFast);
  EXPECT_FALSE(d.fallback_used);
}

TEST(SelectMode, TieBreakIsConfigurable) {
  const auto d = select_mode({0.4, 0.4, 0.2}, SwitchPolicy{0.5, Mode::kSlow});
  EXPECT_EQ(d.mode, Mode::kSlow);
}

TEST(SelectMode, BothZeroFallsBackToFast) {
  const auto d = decide(0.5, 0.0, 0.0);
  EXPECT_EQ(d.mode, Mode::kFast);
  EXPECT_TRUE(d.fallback_used);
  const auto d2 = decide(1.0, 0.0, 0.7);
  EXPECT_TRUE(d2.fallback_used);
}

TEST(SelectMode, NoRenormalization) {
  const auto d = decide(0.5, 0.1, 0.05);
  EXPECT_DOUBLE_EQ(d.p_slow_adj, 0.05);
  EXPECT_DOUBLE_EQ(d.p_fast_adj, 0.025);
}

TEST(SelectMode, RejectsInvalidDistribution) {
  EXPECT_THROW(select_mode({-0.1, 0.5, 0.0}, SwitchPolicy{}), InvalidDistribution);
  EXPECT_THROW(select_mode({0.7, 0.5, 0.0}, SwitchPolicy{}), InvalidDistribution);
  EXPECT_NO_THROW(select_mode({0.5, 0.5, 1e-10}, SwitchPolicy{}));
}

TEST(SelectMode, RejectsAlphaOutOfRange) {
  EXPECT_THROW(select_mode({0.3, 0.3, 0.4}, SwitchPolicy{1.5}), std::invalid_argument);
  EXPECT_THROW(select_mode({0.3, 0.3, 0.4}, SwitchPolicy{-0.1}), std::invalid_argument);
}

TEST(SelectMode, DefaultAlpha) { EXPECT_DOUBLE_EQ(SwitchPolicy{}.alpha, 0.6); }

}  // namespace
}  // namespace dualground
