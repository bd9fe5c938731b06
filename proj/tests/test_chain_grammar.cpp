// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#include <string>

#include <gtest/gtest.h>

#include "dualground/chain_grammar.hpp"

namespace dualground {
namespace {

const std::string kCanonicalExample = "<|grounding_start|>(0.46,0.78)<|grounding_end|>";

ChainErrorKind error_of(std::string_view text) {
  try {
    parse_chain(text);
  } catch (const ChainParseError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for: " << text;
  return ChainErrorKind::kMissingSegment;
}

TEST(RenderChain, CanonicalFastExample) {
  EXPECT_EQ(render_chain(FastChain{NormPoint(0.46, 0.78)}), kCanonicalExample);
}

TEST(RenderChain, SlowWithoutFocus) {
  EXPECT_EQ(render_chain(SlowChain{"S", std::nullopt, NormPoint(0.5, 0.5)}),
            "<|summary_start|>S<|summary_end|><|grounding_start|>(0.50,0.50)<|grounding_end|>");
}

TEST(RenderChain, SlowWithFocusAndPrecision) {
  EXPECT_EQ(render_chain(SlowChain{"a", "b", NormPoint(0.125, 1.0)}, 3),
            "<|summary_start|>a<|summary_end|><|focus_start|>b<|focus_end|>"
            "<|grounding_start|>(0.125,1.000)<|grounding_end|>");
}

TEST(RenderChain, RejectsMarkersInBodiesAndEmptyBodies) {
  EXPECT_THROW(render_chain(SlowChain{"x<|grounding_end|>", std::nullopt, NormPoint(0, 0)}),
               std::invalid_argument);
  EXPECT_THROW(render_chain(SlowChain{"", std::nullopt, NormPoint(0, 0)}), std::invalid_argument);
  EXPECT_THROW(render_chain(SlowChain{"s", "", NormPoint(0, 0)}), std::invalid_argument);
  EXPECT_THROW(render_chain(FastChain{NormPoint(0, 0)}, 0), std::invalid_argument);
  EXPECT_THROW(render_chain(FastChain{NormPoint(0, 0)}, 7), std::invalid_argument);
}

TEST(ParseChain, CanonicalFastExample) {
  const auto c = parse_chain(kCanonicalExample);
  ASSERT_TRUE(std::holds_alternative<FastChain>(c));
  EXPECT_EQ(std::get<FastChain>(c).point, NormPoint(0.46, 0.78));
  EXPECT_EQ(render_chain(c), kCanonicalExample);
}

TEST(ParseChain, SlowWithLenientSpace) {
  const auto c = parse_chain(
      "<|summary_start|>layout<|summary_end|><|focus_start|>red icon<|focus_end|>"
      "<|grounding_start|>(0.10, 0.90)<|grounding_end|>");
  ASSERT_TRUE(std::holds_alternative<SlowChain>(c));
  const auto& s = std::get<SlowChain>(c);
  EXPECT_EQ(s.summary, "layout");
  EXPECT_EQ(s.focus, std::optional<std::string>("red icon"));
  EXPECT_EQ(s.point, NormPoint(0.10, 0.90));
}

TEST(ParseChain, LenientWhitespaceAndPrecision) {
  const auto c = parse_chain(
      "  <|grounding_start|> ( 0.123456 ,\t0.5 ) <|grounding_end|>\n");
  EXPECT_EQ(chain_point(c), NormPoint(0.123456, 0.5));
  EXPECT_EQ(render_chain(c), "<|grounding_start|>(0.12,0.50)<|grounding_end|>");
}

TEST(ParseChain, Errors) {
  EXPECT_EQ(error_of("<|grounding_start|>(0.46,0.78)"), ChainErrorKind::kUnbalancedToken);
  EXPECT_EQ(error_of("(0.46,0.78)<|grounding_end|>"), ChainErrorKind::kUnbalancedToken);
  EXPECT_EQ(error_of(""), ChainErrorKind::kMissingSegment);
  EXPECT_EQ(error_of("<|summary_start|>s<|summary_end|>"), ChainErrorKind::kMissingSegment);
  EXPECT_EQ(error_of("<|focus_start|>f<|focus_end|><|grounding_start|>(0.1,0.1)<|grounding_end|>"),
            ChainErrorKind::kMissingSegment);
  EXPECT_EQ(error_of("<|focus_start|>f<|focus_end|><|summary_start|>s<|summary_end|>"
                     "<|grounding_start|>(0.1,0.1)<|grounding_end|>"),
            ChainErrorKind::kOrderViolation);
  EXPECT_EQ(error_of("<|grounding_start|>(0.1,0.1)<|grounding_end|><|summary_start|>s<|summary_end|>"),
            ChainErrorKind::kOrderViolation);
  EXPECT_EQ(error_of(kCanonicalExample + kCanonicalExample), ChainErrorKind::kOrderViolation);
  EXPECT_EQ(error_of("<|grounding_start|>(0.1)<|grounding_end|>"),
            ChainErrorKind::kMalformedCoordinate);
  EXPECT_EQ(error_of("<|grounding_start|>(1,0)<|grounding_end|>"),
            ChainErrorKind::kMalformedCoordinate);
  EXPECT_EQ(error_of("<|grounding_start|>(0.1234567,0.5)<|grounding_end|>"),
            ChainErrorKind::kMalformedCoordinate);
  EXPECT_EQ(error_of("<|grounding_start|>(1.20,0.5)<|grounding_end|>"), ChainErrorKind::kOutOfRange);
  EXPECT_EQ(error_of("<|grounding_start|>(-0.20,0.5)<|grounding_end|>"),
            ChainErrorKind::kOutOfRange);
  EXPECT_EQ(error_of("click " + kCanonicalExample), ChainErrorKind::kTrailingGarbage);
  EXPECT_EQ(error_of(kCanonicalExample + " done"), ChainErrorKind::kTrailingGarbage);
  EXPECT_EQ(error_of("<|summary_start|><|summary_end|><|grounding_start|>(0.1,0.1)<|grounding_end|>"),
            ChainErrorKind::kMissingSegment);
  EXPECT_EQ(error_of("<|summary_start|>s<|focus_end|><|grounding_start|>(0.1,0.1)<|grounding_end|>"),
            ChainErrorKind::kUnbalancedToken);
}

TEST(ParseChain, ErrorCarriesOffset) {
  try {
    parse_chain(kCanonicalExample + "xyz");
    FAIL();
  } catch (const ChainParseError& e) {
    EXPECT_EQ(e.offset(), kCanonicalExample.size());
  }
}

TEST(ClassifyFirstToken, Leads) {
  EXPECT_EQ(classify_first_token("<|summary_start|>..."), FirstToken::kSlowLead);
  EXPECT_EQ(classify_first_token(" <|grounding_start|>(0.1,0.1)"), FirstToken::kFastLead);
  EXPECT_EQ(classify_first_token("The answer"), FirstToken::kOther);
  EXPECT_EQ(classify_first_token(""), FirstToken::kOther);
}

TEST(Quantize, MatchesRenderedValue) {
  EXPECT_DOUBLE_EQ(quantize(0.456, 2), 0.46);
  EXPECT_DOUBLE_EQ(quantize(0.999, 2), 1.0);
  EXPECT_DOUBLE_EQ(quantize(0.1234564, 6), 0.123456);
}

TEST(RepresentablePoint, SnapsInsideBox) {
  const NormBBox b(0.401, 0.2, 0.409, 0.3);
  EXPECT_FALSE(representable_point_in(b, 2).has_value());
  const auto p = representable_point_in(b, 3);
  ASSERT_TRUE(p.has_value());
  EXPECT_TRUE(hit(*p, b));
  EXPECT_DOUBLE_EQ(p->x(), 0.405);
  EXPECT_DOUBLE_EQ(p->y(), 0.25);
}

}  // namespace
}  // namespace dualground
