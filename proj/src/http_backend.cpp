// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#include "dualground/http_backend.hpp"

#include <cstdlib>
#include <utility>

#include <fmt/format.h>
#include <httplib.h>

namespace dualground {
namespace {

httplib::Client make_client(const HttpBackendConfig& config) {
  httplib::Client client(config.url);
  client.set_connection_timeout(config.connect_timeout);
  client.set_read_timeout(config.read_timeout);
  client.set_write_timeout(config.read_timeout);
  return client;
}

[[noreturn]] void transport_error(httplib::Error err, const std::string& url) {
  const auto kind = err == httplib::Error::ConnectionTimeout ||
                            err == httplib::Error::Read
                        ? BackendErrorKind::kTimeout
                        : BackendErrorKind::kUnavailable;
  throw BackendError(kind, fmt::format("{}: {}", url, httplib::to_string(err)));
}

std::string error_message(const std::string& body) {
  try {
    auto j = wire::Json::parse(body);
    if (j.is_object() && j.contains("error") && j["error"].is_string()) {
      return j["error"].get<std::string>();
    }
  } catch (const wire::Json::exception&) {
  }
  return body;
}

wire::Json parse_body(const std::string& body) {
  try {
    return wire::Json::parse(body);
  } catch (const wire::Json::exception& e) {
    throw BackendError(BackendErrorKind::kProtocol,
                       fmt::format("malformed JSON response: {}", e.what()));
  }
}

void check_status(const httplib::Result& res, const std::string& url) {
  if (res->status == 200) return;
  const auto msg = fmt::format("{} returned HTTP {}: {}", url, res->status,
                               error_message(res->body));
  if (res->status == 503) throw BackendError(BackendErrorKind::kUnavailable, msg);
  throw BackendError(BackendErrorKind::kProtocol, msg);
}

}  // namespace

std::string resolve_backend_url(const std::string& configured) {
  const char* env = std::getenv(kBackendUrlEnv);
  if (env != nullptr && *env != '\0') return env;
  return configured;
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  if (config_.max_in_flight == 0) {
    throw std::invalid_argument("max_in_flight must be positive");
  }
}

std::string HttpBackend::name() const { return "http:" + config_.url; }

GenerationResult HttpBackend::generate(const GenerationRequest& request) {
  request.validate();
  auto client = make_client(config_);
  const auto body = wire::encode_request(request).dump();
  auto res = client.Post(wire::kGeneratePath, body, "application/json");
  if (!res) transport_error(res.error(), config_.url);
  check_status(res, config_.url);
  auto result = wire::decode_result(parse_body(res->body));
  if (result.text.empty()) {
    throw BackendError(BackendErrorKind::kRefusal, "empty generation");
  }
  return result;
}

wire::HealthStatus HttpBackend::health() const {
  auto client = make_client(config_);
  auto res = client.Get(wire::kHealthPath);
  if (!res) transport_error(res.error(), config_.url);
  check_status(res, config_.url);
  return wire::decode_health(parse_body(res->body));
}

}  // namespace dualground
