// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#include <fstream>

#include <gtest/gtest.h>

#include "dualground/wire.hpp"

namespace dualground {
namespace {

wire::Json load_fixture(const std::string& name) {
  std::ifstream is(std::string(DUALGROUND_TEST_DATA) + "/fixtures/" + name);
  return wire::Json::parse(is);
}

BackendErrorKind protocol_kind(const wire::Json& j) {
  try {
    wire::decode_result(j);
  } catch (const BackendError& e) {
    return e.kind();
  }
  return BackendErrorKind::kUnknownScene;
}

TEST(Wire, RequestEncodingMatchesSchema) {
  GenerationRequest r;
  r.screenshot = {"file:///a.png", 10, 10};
  r.prompt = "p";
  r.mode_hint = ModeHint::kForceSlow;
  r.max_new_tokens = 64;
  const auto j = wire::encode_request(r);
  EXPECT_EQ(j.dump(),
            R"({"screenshot_uri":"file:///a.png","prompt":"p","mode_hint":"force_slow",)"
            R"("max_new_tokens":64,"seed":null})");
}

TEST(Wire, RequestFixtureRoundTrips) {
  const auto j = load_fixture("generate_request.json");
  const auto r = wire::decode_request(j);
  EXPECT_EQ(r.screenshot.uri, "file:///data/shots/0001.png");
  EXPECT_EQ(r.mode_hint, ModeHint::kForceFast);
  EXPECT_EQ(r.seed, std::optional<std::int64_t>(7));
  EXPECT_EQ(wire::encode_request(r), j);
}

TEST(Wire, ResponseFixtureParses) {
  const auto r = wire::decode_result(load_fixture("generate_response.json"));
  EXPECT_EQ(r.text, "<|grounding_start|>(0.46,0.78)<|grounding_end|>");
  EXPECT_EQ(r.first_token_dist, (FirstTokenDist{0.125, 0.75, 0.125}));
  EXPECT_DOUBLE_EQ(r.latency_ms, 812.5);
  EXPECT_EQ(wire::encode_result(r), load_fixture("generate_response.json"));
}

TEST(Wire, ResponseSchemaViolations) {
  auto j = load_fixture("generate_response.json");
  j.erase("text");
  EXPECT_EQ(protocol_kind(j), BackendErrorKind::kProtocol);
  j = load_fixture("generate_response.json");
  j["first_token_probs"]["summary_start"] = 0.9;
  EXPECT_EQ(protocol_kind(j), BackendErrorKind::kProtocol);
  j = load_fixture("generate_response.json");
  j["latency_ms"] = -1;
  EXPECT_EQ(protocol_kind(j), BackendErrorKind::kProtocol);
  j = load_fixture("generate_response.json");
  j["latency_ms"] = "fast";
  EXPECT_EQ(protocol_kind(j), BackendErrorKind::kProtocol);
}

TEST(Wire, RequestSchemaViolations) {
  auto j = load_fixture("generate_request.json");
  j["mode_hint"] = "fastest";
  EXPECT_THROW(wire::decode_request(j), BackendError);
  j = load_fixture("generate_request.json");
  j["max_new_tokens"] = 4;
  EXPECT_THROW(wire::decode_request(j), BackendError);
}

TEST(Wire, HealthAndError) {
  const wire::HealthStatus h{"ok", "stub"};
  EXPECT_EQ(wire::encode_health(h).dump(), R"({"status":"ok","model":"stub"})");
  EXPECT_EQ(wire::decode_health(wire::encode_health(h)), h);
  EXPECT_EQ(wire::encode_error("bad").dump(), R"({"error":"bad"})");
}

}  // namespace
}  // namespace dualground
