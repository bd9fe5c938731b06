// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "dualground/backend.hpp"

/// JSON codec for the /v1/generate and /v1/health protocol spoken between
/// HttpBackend and a model server.
///
///   request  {"screenshot_uri", "prompt", "mode_hint", "max_new_tokens", "seed"}
///   response {"text", "first_token_probs": {"summary_start", "grounding_start",
///             "other"}, "latency_ms"}
///   health   {"status": "ok", "model": str}
///   error    {"error": str}   (HTTP 422 / 503)
namespace dualground::wire {

using Json = nlohmann::ordered_json;

inline constexpr const char* kGeneratePath = "/v1/generate";
inline constexpr const char* kHealthPath = "/v1/health";

Json encode_request(const GenerationRequest& request);

/// Only the URI travels on the wire; the returned screenshot has zero
/// pixel dimensions. Throws BackendError(kProtocol) on schema violations.
GenerationRequest decode_request(const Json& j);

Json encode_result(const GenerationResult& result);

/// Throws BackendError(kProtocol) on schema violations, including an
/// invalid first-token distribution.
GenerationResult decode_result(const Json& j);

struct HealthStatus {
  std::string status;
  std::string model;

  friend bool operator==(const HealthStatus&, const HealthStatus&) = default;
};

Json encode_health(const HealthStatus& h);
HealthStatus decode_health(const Json& j);

Json encode_error(const std::string& message);

}  // namespace dualground::wire
