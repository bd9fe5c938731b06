// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dualground/backend.hpp"
#include "dualground/chain_grammar.hpp"
#include "dualground/dataset_io.hpp"
#include "dualground/prompts.hpp"
#include "dualground/sample.hpp"

/**
 * Progressive data synthesis.
 *
 * Each sample walks at most three stages, stopping at the first hit:
 *
 *   1. FastAttempt     ground directly
 *   2. SummaryAttempt  annotator summarizes the interface, ground again with
 *                      the summary as context
 *   3. FocusAttempt    annotator analyses candidate elements given the
 *                      summary, ground again with summary + focus
 *
 * A hit at stage 1 yields fast data, at stage 2 or 3 slow data (the focus
 * segment is present only for stage 3), and three misses leave the sample
 * unresolved. A chain that fails to parse counts as a miss.
 */
namespace dualground {

enum class SynthesisStage { kFastAttempt = 1, kSummaryAttempt = 2, kFocusAttempt = 3 };

std::string_view to_string(SynthesisStage stage);

struct StageAttempt {
  SynthesisStage stage = SynthesisStage::kFastAttempt;
  /// Annotator exchange; absent for the fast attempt.
  std::optional<std::string> annotation_prompt;
  std::optional<std::string> annotation;
  std::string prompt;
  std::string raw_text;
  std::optional<NormPoint> point;
  /// Parse failure of the grounding output or an unusable annotation.
  std::optional<std::string> error;
  bool hit = false;
  double latency_ms = 0.0;
};

struct StageTrace {
  std::vector<StageAttempt> attempts;
};

enum class SynthesisClass { kFastData, kSlowData, kUnresolved };

std::string_view to_string(SynthesisClass c);

struct SynthesisOutcome {
  std::string sample_id;
  SynthesisClass cls = SynthesisClass::kUnresolved;
  /// The verified chain carrying the model's own hit point.
  std::optional<Chain> chain;
  StageTrace trace;
};

/// A backend failure mid-sample; carries what was recorded so far.
class SynthesisError : public BackendError {
 public:
  SynthesisError(const BackendError& cause, std::string sample_id, StageTrace trace);

  const std::string& sample_id() const { return sample_id_; }
  const StageTrace& trace() const { return trace_; }

 private:
  std::string sample_id_;
  StageTrace trace_;
};

struct SynthesisOptions {
  RetryPolicy retry;
  std::optional<std::int64_t> seed;
  int max_new_tokens = kDefaultMaxNewTokens;
  int precision = kDefaultPrecision;
  std::size_t parallelism = 1;
};

/// Throws SynthesisError when a backend call still fails after retries.
SynthesisOutcome synthesize_sample(const GroundingSample& sample, Backend& grounder,
                                   Backend& annotator, const PromptTemplateSet& templates,
                                   const SynthesisOptions& options = {});

/// Requires outcome.cls != Unresolved. The completion's grounding point is
/// the ground-truth box center, snapped to the nearest point that still
/// hits the box at `precision` decimals (raised up to 6 if the box is
/// too small for the requested precision).
TrainingRecord build_training_record(const SynthesisOutcome& outcome,
                                     const GroundingSample& sample,
                                     const PromptTemplateSet& templates,
                                     int precision = kDefaultPrecision);

OrderedJson encode(const StageTrace& trace);

struct SourceCounts {
  std::size_t fast = 0;
  std::size_t slow = 0;
  std::size_t unresolved = 0;
  /// Samples abandoned on backend errors; written to the unresolved sink.
  std::size_t failed = 0;

  std::size_t total() const { return fast + slow + unresolved + failed; }
  friend bool operator==(const SourceCounts&, const SourceCounts&) = default;
};

struct SynthesisStats {
  std::map<std::string, SourceCounts> by_source;
  SourceCounts totals;
  /// Index 0..2 for stages 1..3.
  std::array<std::size_t, 3> attempted{};
  std::array<std::size_t, 3> hits{};
  /// Stage-2 vs stage-3 slow data.
  std::size_t slow_with_focus = 0;

  void add(const std::string& source, const SynthesisOutcome* outcome, bool failed);
  friend bool operator==(const SynthesisStats&, const SynthesisStats&) = default;
};

OrderedJson encode(const SynthesisStats& stats);
std::string render_synthesis_table(const SynthesisStats& stats);

struct SynthesisSinks {
  JsonlSink& fast;
  JsonlSink& slow;
  JsonlSink& unresolved;
};

struct CorpusOptions {
  SynthesisOptions synthesis;
  /// Called after each finished sample with the running stats.
  std::function<void(const SynthesisStats&, std::size_t done, std::size_t total)> progress;
};

/// Runs every sample, streams training records to the fast/slow sinks and
/// the rest (with traces) to the unresolved sink, then finalizes all three.
SynthesisStats synthesize_corpus(std::span<const GroundingSample> samples, Backend& grounder,
                                 Backend& annotator, const PromptTemplateSet& templates,
                                 SynthesisSinks sinks, const CorpusOptions& options = {});

}  // namespace dualground
