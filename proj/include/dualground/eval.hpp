// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dualground/backend.hpp"
#include "dualground/chain_grammar.hpp"
#include "dualground/dataset_io.hpp"
#include "dualground/prompts.hpp"
#include "dualground/sample.hpp"
#include "dualground/switching.hpp"

namespace dualground {

class EmptyDataset : public std::invalid_argument {
 public:
  EmptyDataset() : std::invalid_argument("evaluation needs at least one sample") {}
};

struct EvalConfig {
  SwitchPolicy policy;
  PromptTemplateSet templates = PromptTemplateSet::defaults();
  /// A sample whose end-to-end latency exceeds this counts as a timed-out
  /// backend failure. Zero disables the check.
  double timeout_ms = 0.0;
  std::size_t parallelism = 1;
  RetryPolicy retry;
  std::optional<std::int64_t> seed;
  int max_new_tokens = kDefaultMaxNewTokens;
  /// Average cells weighted by sample count instead of the plain mean.
  bool weighted_average = false;

  void validate() const;
};

enum class FailureKind { kNone, kParse, kBackend };

struct SampleVerdict {
  std::string id;
  Platform platform = Platform::kWeb;
  ElementKind element_kind = ElementKind::kText;
  std::optional<std::string> category;
  /// Set once the first-token probe succeeded.
  std::optional<ModeDecision> decision;
  std::string text;
  std::optional<NormPoint> point;
  bool hit = false;
  FailureKind failure = FailureKind::kNone;
  std::string failure_detail;
  double latency_ms = 0.0;
};

struct CellStats {
  std::size_t n = 0;
  std::size_t hits = 0;

  double accuracy() const { return n == 0 ? 0.0 : static_cast<double>(hits) / n; }
  friend bool operator==(const CellStats&, const CellStats&) = default;
};

struct ModeCounts {
  std::size_t fast = 0;
  std::size_t slow = 0;

  std::size_t total() const { return fast + slow; }
  friend bool operator==(const ModeCounts&, const ModeCounts&) = default;
};

struct EvalReport {
  /// [platform][element_kind]
  std::array<std::array<CellStats, 2>, 3> cells{};
  std::map<std::string, CellStats> by_category;
  double average = 0.0;
  bool weighted_average = false;
  /// Counted over scored (parsed) samples.
  ModeCounts modes;
  std::array<ModeCounts, 2> modes_by_kind{};
  double mean_latency_ms = 0.0;
  std::size_t scored = 0;
  std::size_t parse_failures = 0;
  std::size_t backend_failures = 0;
  std::size_t fallback_decisions = 0;
  /// Sorted by sample id.
  std::vector<SampleVerdict> verdicts;

  const CellStats& cell(Platform p, ElementKind k) const {
    return cells[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)];
  }
  std::size_t size() const { return verdicts.size(); }
};

/// Scores one sample: first-token probe (Free, minimum token budget),
/// mode selection, forced generation in the chosen mode, parse, hit test.
SampleVerdict evaluate_sample(Backend& backend, const GroundingSample& sample,
                              const EvalConfig& cfg);

/// Aggregates verdicts; the result does not depend on their order.
EvalReport aggregate(std::vector<SampleVerdict> verdicts, bool weighted_average);

/// Throws EmptyDataset on an empty corpus. Backend failures are tallied,
/// never fatal.
EvalReport evaluate(Backend& backend, std::span<const GroundingSample> samples,
                    const EvalConfig& cfg);

struct SweepRow {
  double alpha = 0.0;
  double accuracy = 0.0;
  double latency_ms = 0.0;
  ModeCounts modes;
};

std::vector<SweepRow> sweep_alpha(Backend& backend, std::span<const GroundingSample> samples,
                                  std::span<const double> alphas, const EvalConfig& cfg);

/// "alpha,accuracy,latency_ms" header plus one row per alpha.
std::string sweep_csv(std::span<const SweepRow> rows);
OrderedJson encode(std::span<const SweepRow> rows);

struct ActivationFractions {
  double fast = 0.0;
  double slow = 0.0;
  std::size_t n = 0;
};

struct ActivationReport {
  ActivationFractions overall;
  /// Indexed by ElementKind.
  std::array<ActivationFractions, 2> by_kind{};
};

ActivationReport activation_report(const EvalReport& report);
ActivationFractions fractions(const ModeCounts& counts);

/// One decimal place with a percent sign, e.g. 0.769 -> "76.9%".
std::string format_percent(double fraction);

OrderedJson encode(const EvalReport& report);
OrderedJson encode(const ActivationReport& report);

/// Aligned text table: one row, Mobile/Desktop/Web x Text/Icon-Widget
/// columns followed by Average, values in percent.
std::string render_report_table(const EvalReport& report, const std::string& label = "model");
std::string render_activation_table(const ActivationReport& report);

}  // namespace dualground
