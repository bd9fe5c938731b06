// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#include "dualground/synthesis.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

namespace dualground {
namespace {

// Diagnostics go to stderr so stdout stays clean for reports.
spdlog::logger& synthesis_log() {
  static auto logger = std::make_shared<spdlog::logger>(
      "dualground.synthesis", std::make_shared<spdlog::sinks::stderr_sink_mt>());
  return *logger;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Accepts either bare text or text wrapped in the stage's own markers.
std::optional<std::string> clean_annotation(std::string_view text, std::string_view start,
                                            std::string_view end) {
  auto body = trim(text);
  if (body.starts_with(start)) {
    const auto close = body.find(end, start.size());
    if (close == std::string_view::npos) return std::nullopt;
    body = trim(body.substr(start.size(), close - start.size()));
  }
  if (body.empty() || contains_marker(body)) return std::nullopt;
  return std::string(body);
}

GenerationRequest make_request(const GroundingSample& sample, std::string prompt,
                               ModeHint hint, const SynthesisOptions& options) {
  GenerationRequest req;
  req.screenshot = sample.screenshot;
  req.prompt = std::move(prompt);
  req.mode_hint = hint;
  req.max_new_tokens = options.max_new_tokens;
  req.seed = options.seed;
  return req;
}

// Grounds with the given context and fills point/hit/error of `attempt`.
void ground(StageAttempt& attempt, const GroundingSample& sample, Backend& grounder,
            const PromptContext& context, const PromptTemplateSet& templates,
            const SynthesisOptions& options) {
  attempt.prompt = build_prompt(PromptStage::kGround, sample.instruction, context, templates);
  auto result = generate_with_retry(
      grounder, make_request(sample, attempt.prompt, ModeHint::kForceFast, options),
      options.retry);
  attempt.raw_text = std::move(result.text);
  attempt.latency_ms += result.latency_ms;
  try {
    const auto chain = parse_chain(attempt.raw_text);
    attempt.point = chain_point(chain);
    attempt.hit = hit(*attempt.point, sample.bbox);
  } catch (const ChainParseError& e) {
    attempt.error = e.what();
    attempt.hit = false;
  }
}

// Requests an annotation; returns nullopt (and records why) when unusable.
std::optional<std::string> annotate(StageAttempt& attempt, const GroundingSample& sample,
                                    Backend& annotator, PromptStage stage,
                                    const PromptContext& context,
                                    const PromptTemplateSet& templates,
                                    const SynthesisOptions& options) {
  attempt.annotation_prompt = build_prompt(stage, sample.instruction, context, templates);
  auto result = generate_with_retry(
      annotator, make_request(sample, *attempt.annotation_prompt, ModeHint::kFree, options),
      options.retry);
  attempt.latency_ms += result.latency_ms;
  attempt.annotation = result.text;
  const bool summary = stage == PromptStage::kSummarize;
  auto cleaned = clean_annotation(result.text,
                                  summary ? tokens::kSummaryStart : tokens::kFocusStart,
                                  summary ? tokens::kSummaryEnd : tokens::kFocusEnd);
  if (!cleaned) {
    attempt.error = fmt::format("unusable {} annotation", summary ? "summary" : "focus");
  } else {
    attempt.annotation = *cleaned;
  }
  return cleaned;
}

OrderedJson point_json(const std::optional<NormPoint>& p) {
  if (!p) return nullptr;
  return OrderedJson::array({p->x(), p->y()});
}

OrderedJson unresolved_record(const GroundingSample& sample, std::string_view status,
                              const StageTrace& trace, const std::optional<std::string>& error) {
  OrderedJson j;
  j["id"] = sample.id;
  j["source"] = sample.source;
  j["status"] = std::string(status);
  j["error"] = error ? OrderedJson(*error) : OrderedJson(nullptr);
  j["trace"] = encode(trace);
  return j;
}

}  // namespace

std::string_view to_string(SynthesisStage stage) {
  switch (stage) {
    case SynthesisStage::kFastAttempt:
      return "fast_attempt";
    case SynthesisStage::kSummaryAttempt:
      return "summary_attempt";
    case SynthesisStage::kFocusAttempt:
      return "focus_attempt";
  }
  return "?";
}

std::string_view to_string(SynthesisClass c) {
  switch (c) {
    case SynthesisClass::kFastData:
      return "fast";
    case SynthesisClass::kSlowData:
      return "slow";
    case SynthesisClass::kUnresolved:
      return "unresolved";
  }
  return "?";
}

SynthesisError::SynthesisError(const BackendError& cause, std::string sample_id,
                               StageTrace trace)
    : BackendError(cause.kind(), fmt::format("sample '{}': {}", sample_id, cause.what())),
      sample_id_(std::move(sample_id)),
      trace_(std::move(trace)) {}

SynthesisOutcome synthesize_sample(const GroundingSample& sample, Backend& grounder,
                                   Backend& annotator, const PromptTemplateSet& templates,
                                   const SynthesisOptions& options) {
  SynthesisOutcome out;
  out.sample_id = sample.id;
  auto& attempts = out.trace.attempts;
  attempts.reserve(3);
  try {
    // Stage 1: direct grounding.
    auto& fast = attempts.emplace_back();
    fast.stage = SynthesisStage::kFastAttempt;
    ground(fast, sample, grounder, {}, templates, options);
    if (fast.hit) {
      out.cls = SynthesisClass::kFastData;
      out.chain = FastChain{*fast.point};
      return out;
    }

    // Stage 2: interface summary as context.
    auto& second = attempts.emplace_back();
    second.stage = SynthesisStage::kSummaryAttempt;
    const auto summary =
        annotate(second, sample, annotator, PromptStage::kSummarize, {}, templates, options);
    if (summary) {
      ground(second, sample, grounder, {summary, std::nullopt}, templates, options);
      if (second.hit) {
        out.cls = SynthesisClass::kSlowData;
        out.chain = SlowChain{*summary, std::nullopt, *second.point};
        return out;
      }
    }

    // Stage 3: focused analysis on top of the summary. Without a usable
    // summary there is nothing to focus on, so the stage is recorded as a
    // miss.
    auto& third = attempts.emplace_back();
    third.stage = SynthesisStage::kFocusAttempt;
    if (!summary) {
      third.error = "no summary available";
      out.cls = SynthesisClass::kUnresolved;
      return out;
    }
    const auto focus = annotate(third, sample, annotator, PromptStage::kFocus,
                                {summary, std::nullopt}, templates, options);
    if (focus) {
      ground(third, sample, grounder, {summary, focus}, templates, options);
      if (third.hit) {
        out.cls = SynthesisClass::kSlowData;
        out.chain = SlowChain{*summary, *focus, *third.point};
        return out;
      }
    }
    out.cls = SynthesisClass::kUnresolved;
    return out;
  } catch (const BackendError& e) {
    throw SynthesisError(e, sample.id, std::move(out.trace));
  }
}

TrainingRecord build_training_record(const SynthesisOutcome& outcome,
                                     const GroundingSample& sample,
                                     const PromptTemplateSet& templates, int precision) {
  if (outcome.cls == SynthesisClass::kUnresolved || !outcome.chain) {
    throw std::invalid_argument(
        fmt::format("sample '{}' is unresolved; no training record", sample.id));
  }
  std::optional<NormPoint> target;
  int used = precision;
  for (; used <= kMaxPrecision && !target; ++used) {
    target = representable_point_in(sample.bbox, used);
  }
  --used;
  if (!target) {
    throw std::invalid_argument(
        fmt::format("sample '{}': box too small to represent a hit point", sample.id));
  }

  Chain chain = *outcome.chain;
  std::visit([&](auto& c) { c.point = *target; }, chain);

  TrainingRecord r;
  r.id = sample.id;
  r.prompt = build_prompt(PromptStage::kGround, sample.instruction, {}, templates);
  r.completion = render_chain(chain, used);
  r.cls = is_slow(chain) ? TrainingClass::kSlow : TrainingClass::kFast;
  r.metadata.source = sample.source;
  r.metadata.platform = sample.platform;
  r.metadata.element_kind = sample.element_kind;
  r.metadata.verified_point = chain_point(*outcome.chain);
  r.metadata.stage = static_cast<int>(outcome.trace.attempts.back().stage);
  return r;
}

OrderedJson encode(const StageTrace& trace) {
  auto arr = OrderedJson::array();
  for (const auto& a : trace.attempts) {
    OrderedJson j;
    j["stage"] = std::string(to_string(a.stage));
    if (a.annotation_prompt) j["annotation_prompt"] = *a.annotation_prompt;
    if (a.annotation) j["annotation"] = *a.annotation;
    j["prompt"] = a.prompt;
    j["raw_text"] = a.raw_text;
    j["point"] = point_json(a.point);
    j["error"] = a.error ? OrderedJson(*a.error) : OrderedJson(nullptr);
    j["hit"] = a.hit;
    j["latency_ms"] = a.latency_ms;
    arr.push_back(std::move(j));
  }
  return arr;
}

void SynthesisStats::add(const std::string& source, const SynthesisOutcome* outcome,
                         bool failed) {
  auto& row = by_source[source];
  auto bump = [&](std::size_t SourceCounts::*field) {
    ++(row.*field);
    ++(totals.*field);
  };
  if (failed || outcome == nullptr) {
    bump(&SourceCounts::failed);
  } else {
    switch (outcome->cls) {
      case SynthesisClass::kFastData:
        bump(&SourceCounts::fast);
        break;
      case SynthesisClass::kSlowData:
        bump(&SourceCounts::slow);
        if (outcome->trace.attempts.back().stage == SynthesisStage::kFocusAttempt) {
          ++slow_with_focus;
        }
        break;
      case SynthesisClass::kUnresolved:
        bump(&SourceCounts::unresolved);
        break;
    }
  }
  if (outcome != nullptr) {
    for (const auto& a : outcome->trace.attempts) {
      const auto i = static_cast<std::size_t>(a.stage) - 1;
      ++attempted[i];
      if (a.hit) ++hits[i];
    }
  }
}

OrderedJson encode(const SynthesisStats& stats) {
  auto counts = [](const SourceCounts& c) {
    OrderedJson j;
    j["total"] = c.total();
    j["fast"] = c.fast;
    j["slow"] = c.slow;
    j["unresolved"] = c.unresolved;
    j["failed"] = c.failed;
    return j;
  };
  OrderedJson j;
  j["sources"] = OrderedJson::array();
  for (const auto& [source, c] : stats.by_source) {
    auto row = counts(c);
    row["source"] = source;
    j["sources"].push_back(std::move(row));
  }
  j["totals"] = counts(stats.totals);
  OrderedJson stages = OrderedJson::array();
  for (std::size_t i = 0; i < 3; ++i) {
    OrderedJson s;
    s["stage"] = i + 1;
    s["attempted"] = stats.attempted[i];
    s["hits"] = stats.hits[i];
    stages.push_back(std::move(s));
  }
  j["stages"] = std::move(stages);
  j["slow_with_focus"] = stats.slow_with_focus;
  return j;
}

std::string render_synthesis_table(const SynthesisStats& stats) {
  std::size_t w = 6;
  for (const auto& [source, c] : stats.by_source) w = std::max(w, source.size());
  std::string out = fmt::format("{:<{}}  {:>8}  {:>8}  {:>8}  {:>10}  {:>6}\n", "Source", w,
                                "Number", "#S_Num", "#F_Num", "Unresolved", "Failed");
  auto row = [&](const std::string& name, const SourceCounts& c) {
    out += fmt::format("{:<{}}  {:>8}  {:>8}  {:>8}  {:>10}  {:>6}\n", name, w, c.total(),
                       c.slow, c.fast, c.unresolved, c.failed);
  };
  for (const auto& [source, c] : stats.by_source) row(source, c);
  row("Total", stats.totals);
  for (std::size_t i = 0; i < 3; ++i) {
    out += fmt::format("stage {}: {} attempted, {} hit\n", i + 1, stats.attempted[i],
                       stats.hits[i]);
  }
  return out;
}

SynthesisStats synthesize_corpus(std::span<const GroundingSample> samples, Backend& grounder,
                                 Backend& annotator, const PromptTemplateSet& templates,
                                 SynthesisSinks sinks, const CorpusOptions& options) {
  const auto& opts = options.synthesis;
  struct Result {
    std::optional<SynthesisOutcome> outcome;
    bool failed = false;
  };
  std::vector<Result> results(samples.size());

  std::atomic<std::size_t> next{0};
  std::mutex progress_mu;
  SynthesisStats running;
  std::size_t done = 0;
  std::exception_ptr fatal;
  std::mutex fatal_mu;

  auto worker = [&] {
    while (true) {
      {
        std::lock_guard lock(fatal_mu);
        if (fatal) return;
      }
      const std::size_t i = next.fetch_add(1);
      if (i >= samples.size()) return;
      const auto& sample = samples[i];
      try {
        try {
          auto outcome = synthesize_sample(sample, grounder, annotator, templates, opts);
          if (outcome.cls == SynthesisClass::kFastData) {
            sinks.fast.append(
                encode(build_training_record(outcome, sample, templates, opts.precision)));
          } else if (outcome.cls == SynthesisClass::kSlowData) {
            sinks.slow.append(
                encode(build_training_record(outcome, sample, templates, opts.precision)));
          } else {
            sinks.unresolved.append(
                unresolved_record(sample, "unresolved", outcome.trace, std::nullopt));
          }
          results[i].outcome = std::move(outcome);
        } catch (const SynthesisError& e) {
          synthesis_log().warn("skipping sample after backend failure: {}", e.what());
          sinks.unresolved.append(
              unresolved_record(sample, "backend_error", e.trace(), std::string(e.what())));
          results[i].failed = true;
        }
        if (options.progress) {
          std::lock_guard lock(progress_mu);
          running.add(sample.source, results[i].outcome ? &*results[i].outcome : nullptr,
                      results[i].failed);
          options.progress(running, ++done, samples.size());
        }
      } catch (...) {
        std::lock_guard lock(fatal_mu);
        if (!fatal) fatal = std::current_exception();
        return;
      }
    }
  };

  const std::size_t workers = std::max<std::size_t>(
      1, std::min({opts.parallelism, grounder.max_in_flight(), annotator.max_in_flight(),
                   std::max<std::size_t>(samples.size(), 1)}));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  if (fatal) std::rethrow_exception(fatal);

  sinks.fast.finalize();
  sinks.slow.finalize();
  sinks.unresolved.finalize();

  SynthesisStats stats;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    stats.add(samples[i].source, results[i].outcome ? &*results[i].outcome : nullptr,
              results[i].failed);
  }
  return stats;
}

}  // namespace dualground
