// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dualground/geometry.hpp"
#include "dualground/switching.hpp"

namespace dualground {

enum class ModeHint { kFree, kForceFast, kForceSlow };

std::string_view to_string(ModeHint hint);
std::optional<ModeHint> parse_mode_hint(std::string_view s);

inline constexpr int kDefaultMaxNewTokens = 4096;
inline constexpr int kMinNewTokens = 8;

struct GenerationRequest {
  ScreenshotRef screenshot;
  std::string prompt;
  ModeHint mode_hint = ModeHint::kFree;
  int max_new_tokens = kDefaultMaxNewTokens;
  std::optional<std::int64_t> seed;

  /// Throws std::invalid_argument if max_new_tokens < kMinNewTokens.
  void validate() const;

  friend bool operator==(const GenerationRequest&, const GenerationRequest&) =
      default;
};

struct GenerationResult {
  std::string text;
  FirstTokenDist first_token_dist;
  double latency_ms = 0.0;

  friend bool operator==(const GenerationResult&, const GenerationResult&) =
      default;
};

enum class BackendErrorKind {
  kUnavailable,
  kTimeout,
  kProtocol,
  kRefusal,
  kUnknownScene,
};

std::string_view to_string(BackendErrorKind kind);

class BackendError : public std::runtime_error {
 public:
  BackendError(BackendErrorKind kind, const std::string& what);

  BackendErrorKind kind() const { return kind_; }
  /// Unavailable and Timeout are worth another attempt; the rest are not.
  bool transient() const;

 private:
  BackendErrorKind kind_;
};

/// A grounding model. Implementations must accept up to max_in_flight()
/// concurrent generate() calls.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual GenerationResult generate(const GenerationRequest& request) = 0;
  virtual std::size_t max_in_flight() const = 0;
  virtual std::string name() const = 0;
};

struct RetryPolicy {
  int retries = 2;
  std::chrono::milliseconds initial_backoff{50};
};

/// Calls backend.generate, retrying transient BackendErrors with
/// exponential backoff. The last error is rethrown once retries run out.
GenerationResult generate_with_retry(Backend& backend,
                                     const GenerationRequest& request,
                                     const RetryPolicy& retry);

}  // namespace dualground
