// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "dualground/chain_grammar.hpp"
#include "dualground/prompts.hpp"

namespace dualground {
namespace {

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

TEST(BuildPrompt, GroundingContainsInstructionOnce) {
  const auto t = PromptTemplateSet::defaults();
  const auto p = build_prompt(PromptStage::kGround, "click the search button", {}, t);
  EXPECT_EQ(count(p, "click the search button"), 1u);
  EXPECT_FALSE(contains_marker(p));
}

TEST(BuildPrompt, GroundingWithContextEmbedsMarkers) {
  const auto t = PromptTemplateSet::defaults();
  const auto p = build_prompt(PromptStage::kGround, "open settings",
                              PromptContext{"a toolbar", "gear icon"}, t);
  EXPECT_EQ(count(p, std::string(tokens::kSummaryStart) + "a toolbar" +
                         std::string(tokens::kSummaryEnd)),
            1u);
  EXPECT_EQ(count(p, std::string(tokens::kFocusStart) + "gear icon" +
                         std::string(tokens::kFocusEnd)),
            1u);
}

TEST(BuildPrompt, FocusNeedsSummary) {
  const auto t = PromptTemplateSet::defaults();
  try {
    build_prompt(PromptStage::kFocus, "x", {}, t);
    FAIL();
  } catch (const PromptError& e) {
    EXPECT_EQ(e.kind(), PromptError::Kind::kMissingContext);
  }
  EXPECT_THROW(build_prompt(PromptStage::kGround, "x", PromptContext{std::nullopt, "f"}, t),
               PromptError);
  const auto p = build_prompt(PromptStage::kFocus, "x", PromptContext{"the layout", std::nullopt}, t);
  EXPECT_EQ(count(p, "the layout"), 1u);
}

TEST(BuildPrompt, SubstitutionIsSinglePass) {
  const auto t = PromptTemplateSet::defaults();
  const auto p = build_prompt(PromptStage::kSummarize, "type {instruction} literally", {}, t);
  EXPECT_EQ(count(p, "type {instruction} literally"), 1u);
}

TEST(Templates, ValidateRejectsMalformed) {
  auto t = PromptTemplateSet::defaults();
  t.grounding_template = "no slot";
  EXPECT_THROW(t.validate(), PromptError);
  t = PromptTemplateSet::defaults();
  t.focus_template = "{instruction}";
  EXPECT_THROW(t.validate(), PromptError);
  t = PromptTemplateSet::defaults();
  t.summary_template = "{instruction} {instruction}";
  EXPECT_THROW(t.validate(), PromptError);
}

TEST(Templates, ContextWithoutSlotIsMalformed) {
  auto t = PromptTemplateSet::defaults();
  t.grounding_template = "Find {instruction}";
  EXPECT_NO_THROW(build_prompt(PromptStage::kGround, "x", {}, t));
  try {
    build_prompt(PromptStage::kGround, "x", PromptContext{"s", std::nullopt}, t);
    FAIL();
  } catch (const PromptError& e) {
    EXPECT_EQ(e.kind(), PromptError::Kind::kMalformedTemplate);
  }
}

TEST(Templates, LoadFromJson) {
  const auto path = std::filesystem::temp_directory_path() / "dg_templates.json";
  {
    std::ofstream os(path);
    os << R"({"grounding":"G {context}{instruction}","summary":"S {instruction}",)"
          R"("focus":"F {summary} {instruction}"})";
  }
  const auto t = load_templates(path);
  EXPECT_EQ(build_prompt(PromptStage::kGround, "x", {}, t), "G x");
  EXPECT_EQ(build_prompt(PromptStage::kFocus, "x", PromptContext{"s", std::nullopt}, t), "F s x");
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace dualground
