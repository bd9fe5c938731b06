// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#include "dualground/chain_grammar.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <vector>

#include <fmt/format.h>

namespace dualground {
namespace {

enum class SegmentKind { kSummary = 0, kFocus = 1, kGrounding = 2 };

struct MarkerPair {
  SegmentKind kind;
  std::string_view start;
  std::string_view end;
};

constexpr std::array<MarkerPair, 3> kPairs = {{
    {SegmentKind::kSummary, tokens::kSummaryStart, tokens::kSummaryEnd},
    {SegmentKind::kFocus, tokens::kFocusStart, tokens::kFocusEnd},
    {SegmentKind::kGrounding, tokens::kGroundingStart, tokens::kGroundingEnd},
}};

constexpr std::string_view segment_name(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::kSummary:
      return "summary";
    case SegmentKind::kFocus:
      return "focus";
    case SegmentKind::kGrounding:
      return "grounding";
  }
  return "?";
}

struct Segment {
  SegmentKind kind;
  std::string_view body;
  std::size_t offset;  // of the start marker
};

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

std::size_t skip_space(std::string_view s, std::size_t pos) {
  while (pos < s.size() && is_space(s[pos])) ++pos;
  return pos;
}

bool starts_with_at(std::string_view s, std::size_t pos, std::string_view m) {
  return s.substr(pos, m.size()) == m;
}

// Earliest marker at or after `from`. Returns npos when none.
struct MarkerHit {
  std::size_t pos = std::string_view::npos;
  std::string_view marker;
};

MarkerHit find_marker(std::string_view s, std::size_t from) {
  MarkerHit best;
  for (const auto& pair : kPairs) {
    for (auto m : {pair.start, pair.end}) {
      auto p = s.find(m, from);
      if (p < best.pos) best = {p, m};
    }
  }
  return best;
}

[[noreturn]] void fail(ChainErrorKind kind, std::size_t offset,
                       const std::string& msg) {
  throw ChainParseError(kind, offset, msg);
}

// Reads "[+-]?digits.digits{1,6}" starting at `pos`.
double read_number(std::string_view s, std::size_t& pos, std::size_t base) {
  const std::size_t begin = pos;
  bool negative = false;
  if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) {
    negative = s[pos] == '-';
    ++pos;
  }
  const std::size_t digits_begin = pos;
  while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
  const std::size_t int_digits = pos - digits_begin;
  if (int_digits == 0 || pos >= s.size() || s[pos] != '.') {
    fail(ChainErrorKind::kMalformedCoordinate, base + begin,
         "expected a decimal number with 1-6 fractional digits");
  }
  ++pos;
  const std::size_t frac_begin = pos;
  while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
  const std::size_t frac_digits = pos - frac_begin;
  if (frac_digits < 1 || frac_digits > static_cast<std::size_t>(kMaxPrecision)) {
    fail(ChainErrorKind::kMalformedCoordinate, base + begin,
         fmt::format("expected 1-6 fractional digits, got {}", frac_digits));
  }
  double value = 0.0;
  const char* first = s.data() + digits_begin;
  const char* last = s.data() + pos;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    fail(ChainErrorKind::kMalformedCoordinate, base + begin,
         "unreadable number");
  }
  return negative ? -value : value;
}

NormPoint parse_coordinate(std::string_view body, std::size_t base) {
  std::size_t pos = skip_space(body, 0);
  auto expect = [&](char c) {
    pos = skip_space(body, pos);
    if (pos >= body.size() || body[pos] != c) {
      fail(ChainErrorKind::kMalformedCoordinate, base + pos,
           fmt::format("expected '{}' in coordinate tuple", c));
    }
    ++pos;
  };
  expect('(');
  pos = skip_space(body, pos);
  const double x = read_number(body, pos, base);
  expect(',');
  pos = skip_space(body, pos);
  const double y = read_number(body, pos, base);
  expect(')');
  pos = skip_space(body, pos);
  if (pos != body.size()) {
    fail(ChainErrorKind::kMalformedCoordinate, base + pos,
         "unexpected text after coordinate tuple");
  }
  if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0) {
    fail(ChainErrorKind::kOutOfRange, base,
         fmt::format("coordinate ({}, {}) outside [0,1]", x, y));
  }
  return NormPoint(x, y);
}

bool blank(std::string_view s) { return skip_space(s, 0) == s.size(); }

void check_body(std::string_view body, std::string_view what) {
  if (blank(body)) {
    throw std::invalid_argument(fmt::format("{} body is empty", what));
  }
  if (contains_marker(body)) {
    throw std::invalid_argument(fmt::format("{} body contains a marker", what));
  }
}

std::string format_coordinate(double v, int precision) {
  return fmt::format("{:.{}f}", v, precision);
}

double parse_plain(const std::string& s) {
  double v = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

std::optional<double> grid_value_in(double lo, double hi, double target,
                                    int precision) {
  const double q = quantize(target, precision);
  if (lo <= q && q <= hi) return q;
  const double scale = std::pow(10.0, precision);
  const auto k_lo = static_cast<long long>(std::floor(lo * scale)) - 1;
  const auto k_hi = static_cast<long long>(std::ceil(hi * scale)) + 1;
  std::optional<double> best;
  for (long long k = k_lo; k <= k_hi; ++k) {
    if (k < 0) continue;
    const double v = quantize(static_cast<double>(k) / scale, precision);
    if (v < lo || v > hi) continue;
    if (!best || std::abs(v - target) < std::abs(*best - target)) best = v;
  }
  return best;
}

}  // namespace

const NormPoint& chain_point(const Chain& chain) {
  return std::visit([](const auto& c) -> const NormPoint& { return c.point; },
                    chain);
}

bool is_slow(const Chain& chain) {
  return std::holds_alternative<SlowChain>(chain);
}

bool contains_marker(std::string_view body) {
  return find_marker(body, 0).pos != std::string_view::npos;
}

std::string_view to_string(ChainErrorKind kind) {
  switch (kind) {
    case ChainErrorKind::kMissingSegment:
      return "MissingSegment";
    case ChainErrorKind::kUnbalancedToken:
      return "UnbalancedToken";
    case ChainErrorKind::kOrderViolation:
      return "OrderViolation";
    case ChainErrorKind::kMalformedCoordinate:
      return "MalformedCoordinate";
    case ChainErrorKind::kOutOfRange:
      return "OutOfRange";
    case ChainErrorKind::kTrailingGarbage:
      return "TrailingGarbage";
  }
  return "Unknown";
}

ChainParseError::ChainParseError(ChainErrorKind kind, std::size_t offset,
                                 const std::string& what)
    : std::runtime_error(
          fmt::format("{} at byte {}: {}", to_string(kind), offset, what)),
      kind_(kind),
      offset_(offset) {}

std::string format_point(const NormPoint& p, int precision) {
  if (precision < 1 || precision > kMaxPrecision) {
    throw std::invalid_argument(
        fmt::format("precision {} outside [1, {}]", precision, kMaxPrecision));
  }
  return fmt::format("({},{})", format_coordinate(p.x(), precision),
                     format_coordinate(p.y(), precision));
}

std::string render_chain(const Chain& chain, int precision) {
  std::string out;
  if (const auto* slow = std::get_if<SlowChain>(&chain)) {
    check_body(slow->summary, "summary");
    out += tokens::kSummaryStart;
    out += slow->summary;
    out += tokens::kSummaryEnd;
    if (slow->focus) {
      check_body(*slow->focus, "focus");
      out += tokens::kFocusStart;
      out += *slow->focus;
      out += tokens::kFocusEnd;
    }
  }
  out += tokens::kGroundingStart;
  out += format_point(chain_point(chain), precision);
  out += tokens::kGroundingEnd;
  return out;
}

Chain parse_chain(std::string_view text) {
  std::vector<Segment> segments;
  std::size_t pos = 0;
  while (true) {
    pos = skip_space(text, pos);
    if (pos >= text.size()) break;
    const MarkerPair* opened = nullptr;
    for (const auto& pair : kPairs) {
      if (starts_with_at(text, pos, pair.start)) opened = &pair;
    }
    if (opened == nullptr) {
      for (const auto& pair : kPairs) {
        if (starts_with_at(text, pos, pair.end)) {
          fail(ChainErrorKind::kUnbalancedToken, pos,
               fmt::format("{} without a matching start", pair.end));
        }
      }
      // Stray text followed by an orphan end marker is an imbalance first.
      const MarkerHit next = find_marker(text, pos);
      for (const auto& pair : kPairs) {
        if (next.pos != std::string_view::npos && next.marker == pair.end) {
          fail(ChainErrorKind::kUnbalancedToken, next.pos,
               fmt::format("{} without a matching start", pair.end));
        }
      }
      fail(ChainErrorKind::kTrailingGarbage, pos, "text outside any segment");
    }
    const std::size_t body_begin = pos + opened->start.size();
    const MarkerHit next = find_marker(text, body_begin);
    if (next.pos == std::string_view::npos) {
      fail(ChainErrorKind::kUnbalancedToken, pos,
           fmt::format("{} is never closed", opened->start));
    }
    if (next.marker != opened->end) {
      fail(ChainErrorKind::kUnbalancedToken, next.pos,
           fmt::format("{} is not closed before {}", opened->start,
                       next.marker));
    }
    segments.push_back(
        {opened->kind, text.substr(body_begin, next.pos - body_begin), pos});
    pos = next.pos + next.marker.size();
  }

  int last_rank = -1;
  const Segment* summary = nullptr;
  const Segment* focus = nullptr;
  const Segment* grounding = nullptr;
  for (const auto& seg : segments) {
    const int rank = static_cast<int>(seg.kind);
    if (rank <= last_rank) {
      fail(ChainErrorKind::kOrderViolation, seg.offset,
           fmt::format("{} segment out of order or duplicated",
                       segment_name(seg.kind)));
    }
    last_rank = rank;
    switch (seg.kind) {
      case SegmentKind::kSummary:
        summary = &seg;
        break;
      case SegmentKind::kFocus:
        focus = &seg;
        break;
      case SegmentKind::kGrounding:
        grounding = &seg;
        break;
    }
  }
  if (grounding == nullptr) {
    fail(ChainErrorKind::kMissingSegment, text.size(), "no grounding segment");
  }
  if (focus != nullptr && summary == nullptr) {
    fail(ChainErrorKind::kMissingSegment, focus->offset,
         "focus segment without a summary segment");
  }
  for (const Segment* seg : {summary, focus}) {
    if (seg != nullptr && blank(seg->body)) {
      fail(ChainErrorKind::kMissingSegment, seg->offset,
           fmt::format("{} segment is empty", segment_name(seg->kind)));
    }
  }

  const std::size_t body_offset =
      grounding->offset + tokens::kGroundingStart.size();
  NormPoint point = parse_coordinate(grounding->body, body_offset);
  if (summary == nullptr) return FastChain{point};
  SlowChain slow{std::string(summary->body), std::nullopt, point};
  if (focus != nullptr) slow.focus = std::string(focus->body);
  return slow;
}

FirstToken classify_first_token(std::string_view text) {
  const std::size_t pos = skip_space(text, 0);
  if (starts_with_at(text, pos, tokens::kSummaryStart)) {
    return FirstToken::kSlowLead;
  }
  if (starts_with_at(text, pos, tokens::kGroundingStart)) {
    return FirstToken::kFastLead;
  }
  return FirstToken::kOther;
}

double quantize(double v, int precision) {
  return parse_plain(format_coordinate(v, precision));
}

std::optional<NormPoint> representable_point_in(const NormBBox& box,
                                                int precision) {
  const NormPoint c = center(box);
  auto x = grid_value_in(box.x_min(), box.x_max(), c.x(), precision);
  auto y = grid_value_in(box.y_min(), box.y_max(), c.y(), precision);
  if (!x || !y) return std::nullopt;
  return NormPoint(*x, *y);
}

}  // namespace dualground
