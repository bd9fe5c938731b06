// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#include "dualground/wire.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace dualground::wire {
namespace {

[[noreturn]] void protocol_error(const std::string& msg) {
  throw BackendError(BackendErrorKind::kProtocol, msg);
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) protocol_error("expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) protocol_error(fmt::format("missing field '{}'", key));
  return *it;
}

double number(const Json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number()) protocol_error(fmt::format("'{}' must be a number", key));
  return v.get<double>();
}

std::string string(const Json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) protocol_error(fmt::format("'{}' must be a string", key));
  return v.get<std::string>();
}

}  // namespace

Json encode_request(const GenerationRequest& request) {
  Json j;
  j["screenshot_uri"] = request.screenshot.uri;
  j["prompt"] = request.prompt;
  j["mode_hint"] = std::string(to_string(request.mode_hint));
  j["max_new_tokens"] = request.max_new_tokens;
  j["seed"] = request.seed ? Json(*request.seed) : Json(nullptr);
  return j;
}

GenerationRequest decode_request(const Json& j) {
  GenerationRequest r;
  r.screenshot.uri = string(j, "screenshot_uri");
  r.prompt = string(j, "prompt");
  const auto hint = parse_mode_hint(string(j, "mode_hint"));
  if (!hint) protocol_error("mode_hint must be free|force_fast|force_slow");
  r.mode_hint = *hint;
  const auto& max_tokens = field(j, "max_new_tokens");
  if (!max_tokens.is_number_integer()) {
    protocol_error("'max_new_tokens' must be an integer");
  }
  r.max_new_tokens = max_tokens.get<int>();
  const auto& seed = field(j, "seed");
  if (seed.is_number_integer()) {
    r.seed = seed.get<std::int64_t>();
  } else if (!seed.is_null()) {
    protocol_error("'seed' must be an integer or null");
  }
  try {
    r.validate();
  } catch (const std::invalid_argument& e) {
    protocol_error(e.what());
  }
  return r;
}

Json encode_result(const GenerationResult& result) {
  Json j;
  j["text"] = result.text;
  j["first_token_probs"] = {
      {"summary_start", result.first_token_dist.p_summary},
      {"grounding_start", result.first_token_dist.p_ground},
      {"other", result.first_token_dist.p_other},
  };
  j["latency_ms"] = result.latency_ms;
  return j;
}

GenerationResult decode_result(const Json& j) {
  GenerationResult r;
  r.text = string(j, "text");
  const auto& probs = field(j, "first_token_probs");
  r.first_token_dist.p_summary = number(probs, "summary_start");
  r.first_token_dist.p_ground = number(probs, "grounding_start");
  r.first_token_dist.p_other = number(probs, "other");
  r.latency_ms = number(j, "latency_ms");
  if (r.latency_ms < 0) protocol_error("'latency_ms' must be nonnegative");
  try {
    r.first_token_dist.validate();
  } catch (const InvalidDistribution& e) {
    protocol_error(e.what());
  }
  return r;
}

Json encode_health(const HealthStatus& h) {
  Json j;
  j["status"] = h.status;
  j["model"] = h.model;
  return j;
}

HealthStatus decode_health(const Json& j) {
  return {string(j, "status"), string(j, "model")};
}

Json encode_error(const std::string& message) {
  Json j;
  j["error"] = message;
  return j;
}

}  // namespace dualground::wire
