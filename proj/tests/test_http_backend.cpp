// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "dualground/http_backend.hpp"
#include "net_util.hpp"

namespace dualground {
namespace {

std::string fixture_text(const std::string& name) {
  std::ifstream is(std::string(DUALGROUND_TEST_DATA) + "/fixtures/" + name);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// In-process stand-in for a model server.
class FakeServer {
 public:
  FakeServer() {
    server_.Get(wire::kHealthPath, [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"status":"ok","model":"fake"})", "application/json");
    });
    server_.Post(wire::kGeneratePath, [this](const httplib::Request& req, httplib::Response& res) {
      ++calls_;
      last_body_ = req.body;
      if (status_ != 200) {
        res.status = status_;
        res.set_content(wire::encode_error("nope").dump(), "application/json");
        return;
      }
      res.set_content(body_, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  int status_ = 200;
  std::string body_ = fixture_text("generate_response.json");
  std::atomic<int> calls_{0};
  std::string last_body_;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

GenerationRequest request() {
  GenerationRequest r;
  r.screenshot = {"file:///data/shots/0001.png", 1920, 1080};
  r.prompt = "Locate: click the search button";
  r.mode_hint = ModeHint::kForceFast;
  r.seed = 7;
  return r;
}

BackendErrorKind error_kind(HttpBackend& b) {
  try {
    b.generate(request());
  } catch (const BackendError& e) {
    return e.kind();
  }
  return BackendErrorKind::kUnknownScene;
}

TEST(HttpBackend, RecordedFixtureRoundTrip) {
  FakeServer server;
  HttpBackend backend({server.url()});
  const auto result = backend.generate(request());
  EXPECT_EQ(result, wire::decode_result(wire::Json::parse(fixture_text("generate_response.json"))));
  EXPECT_EQ(wire::Json::parse(server.last_body_),
            wire::Json::parse(fixture_text("generate_request.json")));
  EXPECT_EQ(backend.health(), (wire::HealthStatus{"ok", "fake"}));
}

TEST(HttpBackend, StatusMapping) {
  FakeServer server;
  HttpBackend backend({server.url()});
  server.status_ = 503;
  EXPECT_EQ(error_kind(backend), BackendErrorKind::kUnavailable);
  server.status_ = 422;
  EXPECT_EQ(error_kind(backend), BackendErrorKind::kProtocol);
  server.status_ = 200;
  server.body_ = "{not json";
  EXPECT_EQ(error_kind(backend), BackendErrorKind::kProtocol);
  server.body_ = R"({"text":"","first_token_probs":{"summary_start":0,"grounding_start":0,"other":1},"latency_ms":1})";
  EXPECT_EQ(error_kind(backend), BackendErrorKind::kRefusal);
}

TEST(HttpBackend, DeadEndpointIsUnavailable) {
  const int port = testing::unused_port();
  HttpBackendConfig cfg;
  cfg.url = "http://127.0.0.1:" + std::to_string(port);
  cfg.connect_timeout = std::chrono::milliseconds(500);
  HttpBackend backend(cfg);
  EXPECT_EQ(error_kind(backend), BackendErrorKind::kUnavailable);
  EXPECT_THROW(backend.health(), BackendError);
}

TEST(HttpBackend, RetryRecoversFromTransientFailure) {
  FakeServer server;
  server.status_ = 503;
  HttpBackend backend({server.url()});
  RetryPolicy retry;
  retry.retries = 2;
  retry.initial_backoff = std::chrono::milliseconds(1);
  EXPECT_THROW(generate_with_retry(backend, request(), retry), BackendError);
  EXPECT_EQ(server.calls_.load(), 3);
}

TEST(HttpBackend, EnvironmentOverridesUrl) {
  ::setenv(kBackendUrlEnv, "http://example.invalid:9", 1);
  EXPECT_EQ(resolve_backend_url("http://127.0.0.1:8000"), "http://example.invalid:9");
  ::setenv(kBackendUrlEnv, "", 1);
  EXPECT_EQ(resolve_backend_url("http://127.0.0.1:8000"), "http://127.0.0.1:8000");
  ::unsetenv(kBackendUrlEnv);
  EXPECT_EQ(resolve_backend_url("http://h:1"), "http://h:1");
}

}  // namespace
}  // namespace dualground
