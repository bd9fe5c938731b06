// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "dualground/backend.hpp"
#include "dualground/prompts.hpp"
#include "dualground/synthetic_env.hpp"

namespace dualground {

/// Hit probability for one kind of grounding attempt:
///   clamp(base - per_complexity * complexity - icon_penalty * [icon], 0, 1)
/// forced to 0 when distractor_limit is set and the scene has at least that
/// many distractors.
struct HitModel {
  double base = 1.0;
  double per_complexity = 0.0;
  double icon_penalty = 0.0;
  std::optional<int> distractor_limit;

  double probability(const SyntheticScene& scene) const;

  static HitModel always() { return {}; }
  static HitModel never() { return {0.0, 0.0, 0.0, std::nullopt}; }
  /// Hits exactly when the scene has fewer than `limit` distractors.
  static HitModel below_distractors(int limit) { return {1.0, 0.0, 0.0, limit}; }
};

/// Parametric stand-in for a grounding model's perception.
///
/// Every grounding attempt on a scene compares one uniform draw u (a hash
/// of backend seed, request seed and scene id) against a hit probability,
/// so outcomes across attempt kinds are coupled: a context that raises the
/// probability can only turn misses into hits.
///
/// Attempt kinds and their probabilities:
///   fast, no context              fast
///   with summary context          with_summary
///   with summary + focus context  with_focus
///   self-generated slow chain     simple scene: max(0, fast - overthinking_penalty)
///                                 otherwise:    max(with_focus, fast)
/// A scene is simple when complexity(scene) <= simple_complexity.
///
/// First-token probabilities:
///   p_summary = marker_mass * sigmoid(switch_slope * (complexity - switch_midpoint)
///                                     + icon_logit_bias * [icon])
///   p_ground  = marker_mass - p_summary
///   p_other   = 1 - marker_mass
///
/// Latency is synthetic: prefill_ms + per_token_ms * tokens, with each
/// marker one token and other text four characters per token.
struct MockErrorModel {
  HitModel fast{0.95, 0.07, 0.10, std::nullopt};
  HitModel with_summary{0.96, 0.04, 0.06, std::nullopt};
  HitModel with_focus{0.97, 0.015, 0.03, std::nullopt};
  double overthinking_penalty = 0.30;
  double simple_complexity = 2.0;

  double marker_mass = 0.98;
  double switch_midpoint = 3.0;
  double switch_slope = 1.0;
  double icon_logit_bias = 1.0;

  double prefill_ms = 400.0;
  double per_token_ms = 20.0;

  std::size_t max_in_flight = 4;

  /// Rejects probabilities outside [0,1] and negative latencies.
  void validate() const;
};

MockErrorModel error_model_from_json(const nlohmann::json& j);
nlohmann::ordered_json error_model_to_json(const MockErrorModel& m);
MockErrorModel load_error_model(const std::filesystem::path& path);

/// Deterministic backend over a corpus of synthetic scenes. The prompt
/// stage (grounding, summary or focus request) is recognised from the
/// literal prefix of the matching template, and prior analysis from the
/// chain markers the grounding prompt embeds.
class MockBackend final : public Backend {
 public:
  MockBackend(std::vector<SyntheticScene> scenes, MockErrorModel model,
              std::uint64_t seed,
              PromptTemplateSet templates = PromptTemplateSet::defaults());

  GenerationResult generate(const GenerationRequest& request) override;
  std::size_t max_in_flight() const override { return model_.max_in_flight; }
  std::string name() const override { return "mock"; }

  /// Throws BackendError(kUnknownScene).
  const SyntheticScene& scene(const std::string& uri) const;
  FirstTokenDist first_token_dist(const SyntheticScene& scene) const;
  double draw(const SyntheticScene& scene, std::optional<std::int64_t> request_seed) const;
  double slow_hit_probability(const SyntheticScene& scene) const;

  const MockErrorModel& model() const { return model_; }

 private:
  std::unordered_map<std::string, SyntheticScene> scenes_;
  MockErrorModel model_;
  std::uint64_t seed_;
  PromptTemplateSet templates_;
};

/// Rough token count used by the mock: markers count one each, other text
/// four characters per token.
std::size_t estimate_tokens(std::string_view text);

/// Longest prefix of `text` within `max_tokens` by estimate_tokens.
std::string truncate_tokens(std::string_view text, std::size_t max_tokens);

}  // namespace dualground
