// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "dualground/geometry.hpp"

/**
 * Reasoning-chain grammar.
 *
 * A fast chain is a single grounding segment:
 *
 *   <|grounding_start|>(0.46,0.78)<|grounding_end|>
 *
 * A slow chain prefixes the grounding segment with a summary segment and,
 * optionally, a focus segment, always in summary -> focus -> grounding
 * order. Segment bodies are opaque text that must not contain any of the
 * six markers; there is no escaping.
 */
namespace dualground {

namespace tokens {
inline constexpr std::string_view kGroundingStart = "<|grounding_start|>";
inline constexpr std::string_view kGroundingEnd = "<|grounding_end|>";
inline constexpr std::string_view kSummaryStart = "<|summary_start|>";
inline constexpr std::string_view kSummaryEnd = "<|summary_end|>";
inline constexpr std::string_view kFocusStart = "<|focus_start|>";
inline constexpr std::string_view kFocusEnd = "<|focus_end|>";
}  // namespace tokens

inline constexpr int kDefaultPrecision = 2;
inline constexpr int kMaxPrecision = 6;

struct FastChain {
  NormPoint point;

  friend bool operator==(const FastChain&, const FastChain&) = default;
};

struct SlowChain {
  std::string summary;
  std::optional<std::string> focus;
  NormPoint point;

  friend bool operator==(const SlowChain&, const SlowChain&) = default;
};

using Chain = std::variant<FastChain, SlowChain>;

const NormPoint& chain_point(const Chain& chain);
bool is_slow(const Chain& chain);

/// True if `body` contains any of the six markers.
bool contains_marker(std::string_view body);

enum class ChainErrorKind {
  kMissingSegment,
  kUnbalancedToken,
  kOrderViolation,
  kMalformedCoordinate,
  kOutOfRange,
  kTrailingGarbage,
};

std::string_view to_string(ChainErrorKind kind);

class ChainParseError : public std::runtime_error {
 public:
  ChainParseError(ChainErrorKind kind, std::size_t offset,
                  const std::string& what);

  ChainErrorKind kind() const { return kind_; }
  /// Byte offset into the parsed text where the problem was detected.
  std::size_t offset() const { return offset_; }

 private:
  ChainErrorKind kind_;
  std::size_t offset_;
};

/// Formats "(x,y)" with `precision` decimals and no inner spaces.
std::string format_point(const NormPoint& p, int precision = kDefaultPrecision);

/// Renders the canonical chain text. Throws std::invalid_argument for an
/// empty summary/focus body, a body containing a marker, or a precision
/// outside [1, 6].
std::string render_chain(const Chain& chain, int precision = kDefaultPrecision);

/// Parses canonical or lenient chain text. Throws ChainParseError.
Chain parse_chain(std::string_view text);

enum class FirstToken { kSlowLead, kFastLead, kOther };

FirstToken classify_first_token(std::string_view text);

/// The value `v` takes after rendering at `precision` decimals and parsing
/// back.
double quantize(double v, int precision);

/// A point that hits `box` after rendering at `precision` decimals and
/// parsing back, as close to the box center as the decimal grid allows.
/// Empty when no grid point at this precision falls inside the box.
std::optional<NormPoint> representable_point_in(const NormBBox& box,
                                                int precision);

}  // namespace dualground
