// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#pragma once

#include <chrono>
#include <cstddef>
#include <string>

#include "dualground/backend.hpp"
#include "dualground/wire.hpp"

namespace dualground {

inline constexpr const char* kBackendUrlEnv = "DUALGROUND_BACKEND_URL";

struct HttpBackendConfig {
  std::string url = "http://127.0.0.1:8000";
  std::size_t max_in_flight = 4;
  std::chrono::milliseconds connect_timeout{2000};
  std::chrono::milliseconds read_timeout{300000};
};

/// The value of DUALGROUND_BACKEND_URL when set and nonempty, else
/// `configured`.
std::string resolve_backend_url(const std::string& configured);

/// Client for a model server speaking the wire protocol. Each call opens
/// its own connection, so concurrent generate() calls are safe.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  GenerationResult generate(const GenerationRequest& request) override;
  std::size_t max_in_flight() const override { return config_.max_in_flight; }
  std::string name() const override;

  wire::HealthStatus health() const;

  const HttpBackendConfig& config() const { return config_; }

 private:
  HttpBackendConfig config_;
};

}  // namespace dualground
