// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <unistd.h>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "dualground/cli.hpp"
#include "dualground/dataset_io.hpp"
#include "dualground/eval.hpp"
#include "dualground/mock_backend.hpp"
#include "dualground/synthesis.hpp"
#include "dualground/synthetic_env.hpp"
#include "properties.hpp"
#include "scripted_backend.hpp"

namespace fs = std::filesystem;
using namespace dualground;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

constexpr std::uint64_t kSeed = 20260301;
constexpr std::size_t kShapeScenes = 2000;

fs::path scratch_dir() {
  auto dir = fs::temp_directory_path() / fmt::format("dualground_acceptance_{}", ::getpid());
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Outcome hit_oracle() {
  const auto bad = properties::hit_oracle_mismatches(kSeed, 10000) +
                   properties::hit_structure_violations(kSeed + 1, 10000);
  return {bad == 0, fmt::format("{} mismatches over 10000 pairs", bad)};
}

Outcome grammar() {
  const auto rt = properties::grammar_roundtrip_violations(kSeed, 10000);
  const auto fuzz = properties::grammar_fuzz_crashes(kSeed + 2, 10000);
  return {rt == 0 && fuzz == 0,
          fmt::format("{} roundtrip violations, {} fuzz crashes", rt, fuzz)};
}

Outcome switching() {
  const auto v = properties::switching_law_violations(kSeed, 10000);
  return {v.total() == 0, fmt::format("scale {} monotone {} boundary {}", v.scale, v.monotone,
                                      v.boundary)};
}

Outcome synthesis_classes() {
  testing::ScriptedBackend backend;
  const auto templates = PromptTemplateSet::defaults();
  std::size_t wrong = 0;
  std::size_t total = 0;
  for (unsigned bits = 0; bits < 8; ++bits) {
    const auto pattern = testing::pattern_from_bits(bits);
    const int stage = testing::first_hit_stage(pattern);
    for (int i = 0; i < 25; ++i) {
      const double x = 0.05 + 0.03 * i;
      const auto s = testing::make_sample(fmt::format("p{}-{:02d}", bits, i),
                                          NormBBox(x, 0.3, x + 0.08, 0.36));
      backend.add(s, pattern);
      const auto out = synthesize_sample(s, backend, backend, templates);
      ++total;
      bool ok = false;
      switch (stage) {
        case 1:
          ok = out.cls == SynthesisClass::kFastData && out.chain && !is_slow(*out.chain);
          break;
        case 2:
        case 3: {
          const auto* slow = out.chain ? std::get_if<SlowChain>(&*out.chain) : nullptr;
          ok = out.cls == SynthesisClass::kSlowData && slow &&
               slow->focus.has_value() == (stage == 3);
          break;
        }
        default:
          ok = out.cls == SynthesisClass::kUnresolved && !out.chain;
      }
      if (!ok) ++wrong;
    }
  }
  return {wrong == 0, fmt::format("{}/{} outcomes correct", total - wrong, total)};
}

Outcome training_validity(const fs::path& dir) {
  SceneGenParams params;
  params.n_scenes = 1000;
  params.seed = kSeed;
  const auto corpus = generate_scenes(params);
  MockBackend backend(corpus.scenes, {}, kSeed);
  JsonlSink fast(dir / "train_fast.jsonl");
  JsonlSink slow(dir / "train_slow.jsonl");
  JsonlSink unresolved(dir / "train_unresolved.jsonl");
  CorpusOptions opts;
  opts.synthesis.seed = 1;
  opts.synthesis.parallelism = 4;
  synthesize_corpus(corpus.samples, backend, backend, PromptTemplateSet::defaults(),
                    {fast, slow, unresolved}, opts);

  std::map<std::string, NormBBox> boxes;
  for (const auto& s : corpus.samples) boxes.emplace(s.id, s.bbox);
  std::size_t n = 0;
  std::size_t bad = 0;
  for (const auto* name : {"train_fast.jsonl", "train_slow.jsonl"}) {
    LineReader reader(dir / name);
    std::string line;
    while (reader.next(line)) {
      ++n;
      try {
        const auto j = nlohmann::json::parse(line);
        const std::string id = j.at("id");
        const auto chain = parse_chain(j.at("completion").get<std::string>());
        if (!hit(chain_point(chain), boxes.at(id))) ++bad;
      } catch (const std::exception&) {
        ++bad;
      }
    }
  }
  return {n > 0 && bad == 0, fmt::format("{} records, {} invalid", n, bad)};
}

EvalConfig shape_config() {
  EvalConfig cfg;
  cfg.seed = 11;
  cfg.parallelism = 4;
  return cfg;
}

Outcome fig5(const SceneCorpus& corpus) {
  const std::vector<double> alphas{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  MockBackend backend(corpus.scenes, {}, kSeed);
  const auto rows = sweep_alpha(backend, corpus.samples, alphas, shape_config());

  double best_interior = 0.0;
  for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
    best_interior = std::max(best_interior, rows[i].accuracy);
  }
  const double margin =
      best_interior - std::max(rows.front().accuracy, rows.back().accuracy);
  bool latency_increasing = true;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    latency_increasing = latency_increasing && rows[i].latency_ms > rows[i - 1].latency_ms;
  }

  MockErrorModel no_overthinking;
  no_overthinking.overthinking_penalty = 0.0;
  MockBackend plain(corpus.scenes, no_overthinking, kSeed);
  const auto plain_rows = sweep_alpha(plain, corpus.samples, alphas, shape_config());
  bool monotone = true;
  for (std::size_t i = 1; i < plain_rows.size(); ++i) {
    monotone = monotone && plain_rows[i].accuracy >= plain_rows[i - 1].accuracy;
  }

  std::string acc;
  for (const auto& r : rows) acc += fmt::format(" {:.1f}", 100 * r.accuracy);
  return {margin >= 0.02 && latency_increasing && monotone,
          fmt::format("acc%{} | interior margin {:+.1f} pts | latency increasing {} | "
                      "no-overthinking monotone {}",
                      acc, 100 * margin, latency_increasing, monotone)};
}

Outcome fig6(const SceneCorpus& corpus) {
  MockBackend backend(corpus.scenes, {}, kSeed);
  auto cfg = shape_config();
  const auto report = evaluate(backend, corpus.samples, cfg);
  const auto act = activation_report(report);
  const auto& text = act.by_kind[static_cast<std::size_t>(ElementKind::kText)];
  const auto& icon = act.by_kind[static_cast<std::size_t>(ElementKind::kIconWidget)];
  return {icon.slow > text.slow,
          fmt::format("slow fraction icon {} vs text {}", format_percent(icon.slow),
                      format_percent(text.slow))};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  return cli::run(args, out, err);
}

Outcome determinism(const fs::path& dir) {
  const auto scenes = (dir / "det_scenes.jsonl").string();
  const auto samples = (dir / "det_samples.jsonl").string();
  if (run_cli({"gen-scenes", "--out", scenes, "--samples-out", samples, "--n", "300", "--seed",
               "5"}) != 0) {
    return {false, "gen-scenes failed"};
  }
  for (int run = 0; run < 2; ++run) {
    const auto tag = std::to_string(run);
    const auto p = [&](const std::string& name) { return (dir / (name + tag)).string(); };
    const int a = run_cli({"synthesize", "--input", samples, "--backend", "mock", "--scenes",
                           scenes, "--seed", "9", "--parallelism", run == 0 ? "1" : "4",
                           "--out-fast", p("fast"), "--out-slow", p("slow"),
                           "--out-unresolved", p("unresolved"), "--stats-json", p("stats")});
    const int b = run_cli({"eval", "--dataset", samples, "--backend", "mock", "--scenes", scenes,
                           "--seed", "9", "--parallelism", run == 0 ? "1" : "4",
                           "--report-json", p("report"), "--report-table", p("table")});
    if (a != 0 || b != 0) return {false, fmt::format("exit codes {} {}", a, b)};
  }
  std::size_t differing = 0;
  std::size_t bytes = 0;
  for (const auto* name : {"fast", "slow", "unresolved", "stats", "report", "table"}) {
    const auto x = slurp(dir / (std::string(name) + "0"));
    const auto y = slurp(dir / (std::string(name) + "1"));
    bytes += x.size();
    if (x != y || x.empty()) ++differing;
  }
  return {differing == 0,
          fmt::format("6 output files, {} differing, {} bytes compared", differing, bytes)};
}

TrainingRecord hand_record(const std::string& id, const std::string& source, bool slow) {
  TrainingRecord r;
  r.id = id;
  r.prompt = "p";
  r.cls = slow ? TrainingClass::kSlow : TrainingClass::kFast;
  r.completion = slow ? "<|summary_start|>s<|summary_end|><|grounding_start|>(0.20,0.30)"
                        "<|grounding_end|>"
                      : "<|grounding_start|>(0.20,0.30)<|grounding_end|>";
  r.metadata.source = source;
  r.metadata.verified_point = NormPoint(0.2, 0.3);
  r.metadata.stage = slow ? 2 : 1;
  return r;
}

Outcome table1() {
  // (source, slow?) hand-counted: web 4/1/3, mobile 3/2/1, desktop 3/3/0.
  const std::vector<std::pair<std::string, bool>> spec{
      {"web", false},    {"mobile", true}, {"web", true},    {"desktop", true},
      {"web", false},    {"mobile", false}, {"desktop", true}, {"web", false},
      {"mobile", true},  {"desktop", true}};
  std::vector<TrainingRecord> records;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    records.push_back(hand_record(std::to_string(i + 1), spec[i].first, spec[i].second));
  }
  const auto s = compute_stats(records);
  const bool rows_ok = s.rows == std::vector<StatsRow>{{"web", 4, 1, 3},
                                                       {"mobile", 3, 2, 1},
                                                       {"desktop", 3, 3, 0}} &&
                       s.totals == StatsRow{"Total", 10, 6, 4};

  DatasetStats fixture;
  fixture.rows.push_back({"Wave-UI", 36000, 15000, 21000});
  fixture.totals = {"Total", 36000, 15000, 21000};
  const auto table = render_stats_table(fixture, true);
  const auto header = table.substr(0, table.find('\n'));
  const bool layout_ok = header.find("Source") < header.find("Number") &&
                         header.find("Number") < header.find("#S_Num") &&
                         header.find("#S_Num") < header.find("#F_Num") &&
                         table.find("Wave-UI     36K     15K     21K") != std::string::npos;
  return {rows_ok && layout_ok,
          fmt::format("hand rows {}, layout {}", rows_ok ? "exact" : "WRONG",
                      layout_ok ? "ok" : "WRONG")};
}

}  // namespace

int main() {
  const auto dir = scratch_dir();
  SceneGenParams shape_params;
  shape_params.n_scenes = kShapeScenes;
  shape_params.seed = kSeed;
  const auto shape_corpus = generate_scenes(shape_params);

  struct Criterion {
    std::string name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"hit-oracle-equivalence", 1.0, hit_oracle},
      {"grammar-roundtrip-and-fuzz", 10.0, grammar},
      {"switching-laws", 1.0, switching},
      {"synthesis-classification", 5.0, synthesis_classes},
      {"training-record-validity", 0.0, [&] { return training_validity(dir); }},
      {"alpha-sweep-shape", 60.0, [&] { return fig5(shape_corpus); }},
      {"activation-by-kind-shape", 60.0, [&] { return fig6(shape_corpus); }},
      {"determinism", 0.0, [&] { return determinism(dir); }},
      {"stats-table", 0.0, table1},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = o.ok;
    if (c.budget_s > 0 && secs >= c.budget_s) {
      ok = false;
      o.detail += fmt::format(" (over {:.0f}s budget)", c.budget_s);
    }
    if (!ok) ++failures;
    std::cout << fmt::format("{} {} [{:.2f}s] {}\n", ok ? "PASS" : "FAIL", c.name, secs,
                             o.detail);
  }
  fs::remove_all(dir);
  std::cout << fmt::format("{}/{} criteria passed\n", criteria.size() - failures,
                           criteria.size());
  return failures == 0 ? 0 : 1;
}
