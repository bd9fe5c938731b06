// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#include "dualground/eval.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>

namespace dualground {
namespace {

constexpr std::array<Platform, 3> kPlatforms = {Platform::kMobile, Platform::kDesktop,
                                                Platform::kWeb};
constexpr std::array<ElementKind, 2> kKinds = {ElementKind::kText, ElementKind::kIconWidget};

std::string_view platform_title(Platform p) {
  switch (p) {
    case Platform::kMobile:
      return "Mobile";
    case Platform::kDesktop:
      return "Desktop";
    case Platform::kWeb:
      return "Web";
  }
  return "?";
}

std::string_view kind_title(ElementKind k) {
  return k == ElementKind::kText ? "Text" : "Icon/Widget";
}

OrderedJson cell_json(const CellStats& c) {
  OrderedJson j;
  j["n"] = c.n;
  j["hits"] = c.hits;
  j["accuracy"] = c.accuracy();
  return j;
}

OrderedJson modes_json(const ModeCounts& m) {
  OrderedJson j;
  j["fast"] = m.fast;
  j["slow"] = m.slow;
  return j;
}

OrderedJson fractions_json(const ActivationFractions& f) {
  OrderedJson j;
  j["n"] = f.n;
  j["fast"] = f.fast;
  j["slow"] = f.slow;
  return j;
}

template <typename Fn>
void run_parallel(std::size_t n, std::size_t workers, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex mu;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!fatal) fatal = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  if (fatal) std::rethrow_exception(fatal);
}

}  // namespace

void EvalConfig::validate() const {
  policy.validate();
  templates.validate();
  if (timeout_ms < 0) throw std::invalid_argument("timeout_ms is negative");
}

SampleVerdict evaluate_sample(Backend& backend, const GroundingSample& sample,
                              const EvalConfig& cfg) {
  SampleVerdict v;
  v.id = sample.id;
  v.platform = sample.platform;
  v.element_kind = sample.element_kind;
  v.category = sample.category;

  GenerationRequest req;
  req.screenshot = sample.screenshot;
  req.prompt = build_prompt(PromptStage::kGround, sample.instruction, {}, cfg.templates);
  req.seed = cfg.seed;
  try {
    req.mode_hint = ModeHint::kFree;
    req.max_new_tokens = kMinNewTokens;
    const auto probe = generate_with_retry(backend, req, cfg.retry);
    v.latency_ms += probe.latency_ms;
    v.decision = select_mode(probe.first_token_dist, cfg.policy);

    req.mode_hint = v.decision->mode == Mode::kSlow ? ModeHint::kForceSlow : ModeHint::kForceFast;
    req.max_new_tokens = cfg.max_new_tokens;
    auto result = generate_with_retry(backend, req, cfg.retry);
    v.latency_ms += result.latency_ms;
    v.text = std::move(result.text);
  } catch (const BackendError& e) {
    v.failure = FailureKind::kBackend;
    v.failure_detail = e.what();
    return v;
  } catch (const InvalidDistribution& e) {
    v.failure = FailureKind::kBackend;
    v.failure_detail = e.what();
    return v;
  }
  if (cfg.timeout_ms > 0 && v.latency_ms > cfg.timeout_ms) {
    v.failure = FailureKind::kBackend;
    v.failure_detail = fmt::format("Timeout: {:.1f} ms exceeds {:.1f} ms", v.latency_ms,
                                   cfg.timeout_ms);
    return v;
  }
  try {
    v.point = chain_point(parse_chain(v.text));
    v.hit = hit(*v.point, sample.bbox);
  } catch (const ChainParseError& e) {
    v.failure = FailureKind::kParse;
    v.failure_detail = e.what();
  }
  return v;
}

EvalReport aggregate(std::vector<SampleVerdict> verdicts, bool weighted_average) {
  std::stable_sort(verdicts.begin(), verdicts.end(),
                   [](const SampleVerdict& a, const SampleVerdict& b) { return a.id < b.id; });
  EvalReport r;
  r.weighted_average = weighted_average;
  double latency_sum = 0.0;
  for (const auto& v : verdicts) {
    auto& cell = r.cells[static_cast<std::size_t>(v.platform)]
                        [static_cast<std::size_t>(v.element_kind)];
    ++cell.n;
    if (v.hit) ++cell.hits;
    if (v.category) {
      auto& c = r.by_category[*v.category];
      ++c.n;
      if (v.hit) ++c.hits;
    }
    latency_sum += v.latency_ms;
    switch (v.failure) {
      case FailureKind::kParse:
        ++r.parse_failures;
        break;
      case FailureKind::kBackend:
        ++r.backend_failures;
        break;
      case FailureKind::kNone: {
        ++r.scored;
        auto& by_kind = r.modes_by_kind[static_cast<std::size_t>(v.element_kind)];
        if (v.decision && v.decision->mode == Mode::kSlow) {
          ++r.modes.slow;
          ++by_kind.slow;
        } else {
          ++r.modes.fast;
          ++by_kind.fast;
        }
        if (v.decision && v.decision->fallback_used) ++r.fallback_decisions;
        break;
      }
    }
  }
  if (!verdicts.empty()) latency_sum /= static_cast<double>(verdicts.size());
  r.mean_latency_ms = latency_sum;

  std::size_t total_n = 0;
  std::size_t total_hits = 0;
  std::size_t nonempty = 0;
  double acc_sum = 0.0;
  for (auto p : kPlatforms) {
    for (auto k : kKinds) {
      const auto& c = r.cell(p, k);
      if (c.n == 0) continue;
      ++nonempty;
      acc_sum += c.accuracy();
      total_n += c.n;
      total_hits += c.hits;
    }
  }
  if (weighted_average) {
    r.average = total_n == 0 ? 0.0 : static_cast<double>(total_hits) / total_n;
  } else {
    r.average = nonempty == 0 ? 0.0 : acc_sum / static_cast<double>(nonempty);
  }
  r.verdicts = std::move(verdicts);
  return r;
}

EvalReport evaluate(Backend& backend, std::span<const GroundingSample> samples,
                    const EvalConfig& cfg) {
  if (samples.empty()) throw EmptyDataset();
  cfg.validate();
  std::vector<SampleVerdict> verdicts(samples.size());
  const std::size_t workers =
      std::max<std::size_t>(1, std::min(cfg.parallelism, backend.max_in_flight()));
  run_parallel(samples.size(), workers,
               [&](std::size_t i) { verdicts[i] = evaluate_sample(backend, samples[i], cfg); });
  return aggregate(std::move(verdicts), cfg.weighted_average);
}

std::vector<SweepRow> sweep_alpha(Backend& backend, std::span<const GroundingSample> samples,
                                  std::span<const double> alphas, const EvalConfig& cfg) {
  if (alphas.empty()) throw std::invalid_argument("alpha list is empty");
  for (double a : alphas) {
    SwitchPolicy{a, cfg.policy.tie_break}.validate();
  }
  std::vector<SweepRow> rows;
  for (double a : alphas) {
    EvalConfig run = cfg;
    run.policy.alpha = a;
    const auto report = evaluate(backend, samples, run);
    rows.push_back({a, report.average, report.mean_latency_ms, report.modes});
  }
  return rows;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::string out = "alpha,accuracy,latency_ms\n";
  for (const auto& r : rows) {
    out += fmt::format("{:.2f},{:.4f},{:.1f}\n", r.alpha, r.accuracy, r.latency_ms);
  }
  return out;
}

OrderedJson encode(std::span<const SweepRow> rows) {
  auto arr = OrderedJson::array();
  for (const auto& r : rows) {
    OrderedJson j;
    j["alpha"] = r.alpha;
    j["accuracy"] = r.accuracy;
    j["latency_ms"] = r.latency_ms;
    j["modes"] = modes_json(r.modes);
    arr.push_back(std::move(j));
  }
  return arr;
}

ActivationFractions fractions(const ModeCounts& counts) {
  ActivationFractions f;
  f.n = counts.total();
  if (f.n > 0) {
    f.fast = static_cast<double>(counts.fast) / f.n;
    f.slow = static_cast<double>(counts.slow) / f.n;
  }
  return f;
}

ActivationReport activation_report(const EvalReport& report) {
  ActivationReport a;
  a.overall = fractions(report.modes);
  for (std::size_t k = 0; k < 2; ++k) a.by_kind[k] = fractions(report.modes_by_kind[k]);
  return a;
}

std::string format_percent(double fraction) { return fmt::format("{:.1f}%", fraction * 100.0); }

OrderedJson encode(const EvalReport& report) {
  OrderedJson j;
  OrderedJson cells;
  for (auto p : kPlatforms) {
    OrderedJson row;
    for (auto k : kKinds) row[std::string(to_string(k))] = cell_json(report.cell(p, k));
    cells[std::string(to_string(p))] = std::move(row);
  }
  j["cells"] = std::move(cells);
  if (!report.by_category.empty()) {
    OrderedJson cats;
    for (const auto& [name, c] : report.by_category) cats[name] = cell_json(c);
    j["categories"] = std::move(cats);
  }
  j["average"] = report.average;
  j["average_weighting"] = report.weighted_average ? "samples" : "cells";
  OrderedJson modes = modes_json(report.modes);
  modes["by_kind"] = {{"text", modes_json(report.modes_by_kind[0])},
                      {"icon_widget", modes_json(report.modes_by_kind[1])}};
  j["mode_counts"] = std::move(modes);
  j["mean_latency_ms"] = report.mean_latency_ms;
  j["samples"] = report.size();
  j["scored"] = report.scored;
  j["failures"] = {{"parse", report.parse_failures}, {"backend", report.backend_failures}};
  j["fallback_decisions"] = report.fallback_decisions;
  return j;
}

OrderedJson encode(const ActivationReport& report) {
  OrderedJson j;
  j["overall"] = fractions_json(report.overall);
  j["text"] = fractions_json(report.by_kind[0]);
  j["icon_widget"] = fractions_json(report.by_kind[1]);
  return j;
}

std::string render_report_table(const EvalReport& report, const std::string& label) {
  std::vector<std::string> header{"Model"};
  std::vector<std::string> values{label};
  for (auto p : kPlatforms) {
    for (auto k : kKinds) {
      header.push_back(fmt::format("{} {}", platform_title(p), kind_title(k)));
      const auto& c = report.cell(p, k);
      values.push_back(c.n == 0 ? "-" : fmt::format("{:.1f}", c.accuracy() * 100.0));
    }
  }
  header.push_back("Average");
  values.push_back(fmt::format("{:.1f}", report.average * 100.0));

  std::string top;
  std::string bottom;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto w = std::max(header[i].size(), values[i].size());
    const char* sep = i + 1 < header.size() ? "  " : "";
    if (i == 0) {
      top += fmt::format("{:<{}}{}", header[i], w, sep);
      bottom += fmt::format("{:<{}}{}", values[i], w, sep);
    } else {
      top += fmt::format("{:>{}}{}", header[i], w, sep);
      bottom += fmt::format("{:>{}}{}", values[i], w, sep);
    }
  }
  std::string out = top + '\n' + bottom + '\n';
  if (!report.by_category.empty()) {
    out += '\n';
    std::size_t w = 8;
    for (const auto& [name, c] : report.by_category) w = std::max(w, name.size());
    for (const auto& [name, c] : report.by_category) {
      out += fmt::format("{:<{}}  {:>5.1f}  (n={})\n", name, w, c.accuracy() * 100.0, c.n);
    }
  }
  return out;
}

std::string render_activation_table(const ActivationReport& report) {
  std::string out = fmt::format("{:<12}  {:>7}  {:>7}  {:>6}\n", "Kind", "Fast", "Slow", "n");
  auto row = [&](std::string_view name, const ActivationFractions& f) {
    out += fmt::format("{:<12}  {:>7}  {:>7}  {:>6}\n", name, format_percent(f.fast),
                       format_percent(f.slow), f.n);
  };
  row("Text", report.by_kind[0]);
  row("Icon/Widget", report.by_kind[1]);
  row("Overall", report.overall);
  return out;
}

}  // namespace dualground
