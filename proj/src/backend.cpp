// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#include "dualground/backend.hpp"

#include <thread>

#include <fmt/format.h>

namespace dualground {

std::string_view to_string(ModeHint hint) {
  switch (hint) {
    case ModeHint::kFree:
      return "free";
    case ModeHint::kForceFast:
      return "force_fast";
    case ModeHint::kForceSlow:
      return "force_slow";
  }
  return "free";
}

std::optional<ModeHint> parse_mode_hint(std::string_view s) {
  if (s == "free") return ModeHint::kFree;
  if (s == "force_fast") return ModeHint::kForceFast;
  if (s == "force_slow") return ModeHint::kForceSlow;
  return std::nullopt;
}

void GenerationRequest::validate() const {
  if (max_new_tokens < kMinNewTokens) {
    throw std::invalid_argument(fmt::format(
        "max_new_tokens {} below minimum {}", max_new_tokens, kMinNewTokens));
  }
}

std::string_view to_string(BackendErrorKind kind) {
  switch (kind) {
    case BackendErrorKind::kUnavailable:
      return "BackendUnavailable";
    case BackendErrorKind::kTimeout:
      return "Timeout";
    case BackendErrorKind::kProtocol:
      return "ProtocolError";
    case BackendErrorKind::kRefusal:
      return "ModelRefusal";
    case BackendErrorKind::kUnknownScene:
      return "UnknownScene";
  }
  return "BackendError";
}

BackendError::BackendError(BackendErrorKind kind, const std::string& what)
    : std::runtime_error(fmt::format("{}: {}", to_string(kind), what)),
      kind_(kind) {}

bool BackendError::transient() const {
  return kind_ == BackendErrorKind::kUnavailable ||
         kind_ == BackendErrorKind::kTimeout;
}

GenerationResult generate_with_retry(Backend& backend,
                                     const GenerationRequest& request,
                                     const RetryPolicy& retry) {
  auto backoff = retry.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    try {
      return backend.generate(request);
    } catch (const BackendError& e) {
      if (!e.transient() || attempt >= retry.retries) throw;
    }
    if (backoff.count() > 0) std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

}  // namespace dualground
