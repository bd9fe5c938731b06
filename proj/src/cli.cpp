// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#include "dualground/cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "dualground/chain_grammar.hpp"
#include "dualground/dataset_io.hpp"
#include "dualground/eval.hpp"
#include "dualground/http_backend.hpp"
#include "dualground/mock_backend.hpp"
#include "dualground/prompts.hpp"
#include "dualground/synthesis.hpp"
#include "dualground/synthetic_env.hpp"

namespace dualground::cli {
namespace {

namespace fs = std::filesystem;

// Bad flag combination discovered after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BackendFlags {
  std::string kind = "mock";
  std::string url = HttpBackendConfig{}.url;
  std::string scenes;
  std::string mock_config;
};

struct CommonFlags {
  BackendFlags backend;
  std::string templates;
  std::uint64_t seed = 0;
  std::size_t parallelism = 4;
  int retries = RetryPolicy{}.retries;
  int max_new_tokens = kDefaultMaxNewTokens;
};

void add_backend_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--backend", f.backend.kind, "Grounding backend")
      ->check(CLI::IsMember({"mock", "http"}))
      ->capture_default_str();
  cmd->add_option("--backend-url", f.backend.url,
                  "Model server URL for --backend http (DUALGROUND_BACKEND_URL overrides)")
      ->capture_default_str();
  cmd->add_option("--scenes", f.backend.scenes, "Scene corpus JSONL for --backend mock");
  cmd->add_option("--mock-config", f.backend.mock_config, "Mock error-model JSON file");
  cmd->add_option("--templates", f.templates, "Prompt template JSON file");
  cmd->add_option("--seed", f.seed, "Seed for every random choice")->capture_default_str();
  cmd->add_option("--parallelism", f.parallelism, "Concurrent backend requests")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--retries", f.retries, "Retries on transient backend errors")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--max-new-tokens", f.max_new_tokens, "Generation token budget")
      ->check(CLI::Range(kMinNewTokens, 1 << 20))
      ->capture_default_str();
}

PromptTemplateSet templates_of(const CommonFlags& f) {
  return f.templates.empty() ? PromptTemplateSet::defaults() : load_templates(f.templates);
}

RetryPolicy retry_of(const CommonFlags& f) {
  RetryPolicy r;
  r.retries = f.retries;
  return r;
}

// Builds the requested backend. An http backend must answer its health
// check before any work starts.
std::unique_ptr<Backend> make_backend(const std::string& kind, const CommonFlags& f,
                                      const PromptTemplateSet& templates) {
  if (kind == "http") {
    HttpBackendConfig cfg;
    cfg.url = resolve_backend_url(f.backend.url);
    cfg.max_in_flight = f.parallelism;
    auto backend = std::make_unique<HttpBackend>(cfg);
    const auto status = backend->health();
    if (status.status != "ok") {
      throw BackendError(BackendErrorKind::kUnavailable,
                         fmt::format("{} reports status '{}'", cfg.url, status.status));
    }
    return backend;
  }
  if (f.backend.scenes.empty()) throw UsageError("--backend mock requires --scenes");
  MockErrorModel model;
  if (!f.backend.mock_config.empty()) model = load_error_model(f.backend.mock_config);
  return std::make_unique<MockBackend>(read_scenes(f.backend.scenes), model, f.seed, templates);
}

std::optional<std::int64_t> request_seed(const CommonFlags& f) {
  return static_cast<std::int64_t>(f.seed);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DatasetError(DatasetError::Kind::kIo, 0, "cannot write " + path);
  os << text;
  if (!os) throw DatasetError(DatasetError::Kind::kIo, 0, "write failed: " + path);
}

std::string dump(const OrderedJson& j) { return j.dump(2) + "\n"; }

std::vector<double> parse_alphas(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    double v = 0.0;
    const auto* end = item.data() + item.size();
    const auto [ptr, ec] = std::from_chars(item.data(), end, v);
    if (item.empty() || ec != std::errc() || ptr != end) {
      throw UsageError(fmt::format("--alphas: '{}' is not a number", item));
    }
    if (!(v >= 0.0 && v <= 1.0)) {
      throw UsageError(fmt::format("--alphas: {} is outside [0, 1]", item));
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("--alphas is empty");
  return out;
}

NormPoint parse_point_flag(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw UsageError("--point expects X,Y");
  auto number = [&](std::string s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc() || ptr != end) {
      throw UsageError(fmt::format("--point: '{}' is not a number", s));
    }
    return v;
  };
  return NormPoint(number(text.substr(0, comma)), number(text.substr(comma + 1)));
}

std::string pretty_chain(const Chain& chain, int precision) {
  if (const auto* fast = std::get_if<FastChain>(&chain)) {
    return fmt::format("FastChain\n  point: {}\n", format_point(fast->point, precision));
  }
  const auto& slow = std::get<SlowChain>(chain);
  std::string out = fmt::format("SlowChain\n  summary: {}\n", slow.summary);
  if (slow.focus) out += fmt::format("  focus: {}\n", *slow.focus);
  out += fmt::format("  point: {}\n", format_point(slow.point, precision));
  return out;
}

// ---- subcommands -----------------------------------------------------------

struct SynthesizeFlags {
  CommonFlags common;
  std::string input;
  std::string annotator = "same";
  std::string out_fast;
  std::string out_slow;
  std::string out_unresolved;
  std::string stats_json;
  bool progress = false;
};

int cmd_synthesize(const SynthesizeFlags& f, std::ostream& out, std::ostream& err) {
  const auto templates = templates_of(f.common);
  const auto samples = read_samples(f.input);
  auto grounder = make_backend(f.common.backend.kind, f.common, templates);
  std::unique_ptr<Backend> separate_annotator;
  if (f.annotator != "same" && f.annotator != f.common.backend.kind) {
    separate_annotator = make_backend(f.annotator, f.common, templates);
  }
  Backend& annotator = separate_annotator ? *separate_annotator : *grounder;

  JsonlSink fast(f.out_fast);
  JsonlSink slow(f.out_slow);
  JsonlSink unresolved(f.out_unresolved);

  CorpusOptions options;
  options.synthesis.retry = retry_of(f.common);
  options.synthesis.seed = request_seed(f.common);
  options.synthesis.max_new_tokens = f.common.max_new_tokens;
  options.synthesis.parallelism = f.common.parallelism;
  std::mutex err_mu;
  if (f.progress) {
    options.progress = [&](const SynthesisStats& s, std::size_t done, std::size_t total) {
      OrderedJson j;
      j["event"] = "progress";
      j["done"] = done;
      j["total"] = total;
      j["fast"] = s.totals.fast;
      j["slow"] = s.totals.slow;
      j["unresolved"] = s.totals.unresolved;
      j["failed"] = s.totals.failed;
      std::lock_guard lock(err_mu);
      err << j.dump() << '\n';
    };
  }
  const auto stats = synthesize_corpus(samples, *grounder, annotator, templates,
                                       SynthesisSinks{fast, slow, unresolved}, options);
  if (f.progress) {
    OrderedJson j;
    j["event"] = "done";
    j["stats"] = encode(stats);
    err << j.dump() << '\n';
  }
  if (!f.stats_json.empty()) write_text(f.stats_json, dump(encode(stats)));
  out << render_synthesis_table(stats);
  return kExitOk;
}

struct EvalFlags {
  CommonFlags common;
  std::string dataset;
  double alpha = kDefaultAlpha;
  std::string report_json;
  std::string report_table;
  std::string label = "model";
  double timeout_ms = 0.0;
  bool weighted = false;
};

EvalConfig eval_config(const CommonFlags& f, double alpha, double timeout_ms, bool weighted) {
  EvalConfig cfg;
  cfg.policy.alpha = alpha;
  cfg.templates = templates_of(f);
  cfg.timeout_ms = timeout_ms;
  cfg.parallelism = f.parallelism;
  cfg.retry = retry_of(f);
  cfg.seed = request_seed(f);
  cfg.max_new_tokens = f.max_new_tokens;
  cfg.weighted_average = weighted;
  return cfg;
}

int cmd_eval(const EvalFlags& f, std::ostream& out) {
  const auto cfg = eval_config(f.common, f.alpha, f.timeout_ms, f.weighted);
  const auto samples = read_samples(f.dataset);
  auto backend = make_backend(f.common.backend.kind, f.common, cfg.templates);
  const auto report = evaluate(*backend, samples, cfg);
  const auto activation = activation_report(report);

  std::string table = render_report_table(report, f.label) + "\n" +
                      render_activation_table(activation);
  if (!f.report_json.empty()) {
    OrderedJson j = encode(report);
    j["alpha"] = f.alpha;
    j["activation"] = encode(activation);
    write_text(f.report_json, dump(j));
  }
  if (!f.report_table.empty()) {
    write_text(f.report_table, table);
  } else {
    out << table;
  }
  return kExitOk;
}

struct SweepFlags {
  CommonFlags common;
  std::string dataset;
  std::string alphas = "0,0.2,0.4,0.6,0.8,1.0";
  std::string csv;
  std::string json;
  double timeout_ms = 0.0;
  bool weighted = false;
};

int cmd_sweep(const SweepFlags& f, std::ostream& out) {
  const auto alphas = parse_alphas(f.alphas);
  const auto cfg = eval_config(f.common, kDefaultAlpha, f.timeout_ms, f.weighted);
  const auto samples = read_samples(f.dataset);
  auto backend = make_backend(f.common.backend.kind, f.common, cfg.templates);
  const auto rows = sweep_alpha(*backend, samples, alphas, cfg);
  const auto csv = sweep_csv(rows);
  if (!f.json.empty()) write_text(f.json, dump(encode(rows)));
  if (!f.csv.empty()) {
    write_text(f.csv, csv);
  } else {
    out << csv;
  }
  return kExitOk;
}

struct StatsFlags {
  std::vector<std::string> datasets;
  bool compact = false;
  std::string json;
};

int cmd_stats(const StatsFlags& f, std::ostream& out) {
  DatasetStats stats;
  for (const auto& path : f.datasets) {
    const auto records = read_training_records(path);
    stats += compute_stats(records);
  }
  if (!f.json.empty()) write_text(f.json, dump(encode(stats)));
  out << render_stats_table(stats, f.compact);
  return kExitOk;
}

struct GenScenesFlags {
  std::string params;
  std::string out;
  std::string samples_out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n;
};

int cmd_gen_scenes(const GenScenesFlags& f, std::ostream& out) {
  SceneGenParams params;
  if (!f.params.empty()) {
    std::ifstream is(f.params);
    if (!is) throw DatasetError(DatasetError::Kind::kIo, 0, "cannot open " + f.params);
    nlohmann::json j;
    try {
      is >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DatasetError(DatasetError::Kind::kSchema, 0, f.params + ": " + e.what());
    }
    params = params_from_json(j);
  }
  if (f.seed) params.seed = *f.seed;
  if (f.n) params.n_scenes = *f.n;
  params.validate();
  const auto corpus = generate_scenes(params);
  write_scenes(corpus.scenes, f.out);
  if (!f.samples_out.empty()) write_jsonl(corpus.samples, f.samples_out);
  std::size_t icons = 0;
  for (const auto& s : corpus.samples) icons += s.element_kind == ElementKind::kIconWidget;
  out << fmt::format("{} scenes ({} icon/widget, {} text)\n", corpus.scenes.size(), icons,
                     corpus.scenes.size() - icons);
  return kExitOk;
}

struct ChainFlags {
  std::string text;
  bool json = false;
  std::string point;
  std::string summary;
  std::string focus;
  int precision = kDefaultPrecision;
};

std::string read_all(std::istream& is) {
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

int cmd_chain_parse(const ChainFlags& f, std::ostream& out, std::ostream& err) {
  std::string text = f.text;
  if (text.empty() || text == "-") {
    text = read_all(std::cin);
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  }
  try {
    const auto chain = parse_chain(text);
    if (f.json) {
      OrderedJson j;
      j["shape"] = is_slow(chain) ? "slow" : "fast";
      if (const auto* slow = std::get_if<SlowChain>(&chain)) {
        j["summary"] = slow->summary;
        if (slow->focus) j["focus"] = *slow->focus;
      }
      const auto& p = chain_point(chain);
      j["point"] = {p.x(), p.y()};
      j["canonical"] = render_chain(chain, f.precision);
      out << dump(j);
    } else {
      out << pretty_chain(chain, f.precision);
    }
  } catch (const ChainParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}

int cmd_chain_render(const ChainFlags& f, std::ostream& out) {
  if (f.point.empty()) throw UsageError("chain render requires --point");
  if (!f.focus.empty() && f.summary.empty()) throw UsageError("--focus requires --summary");
  const NormPoint p = parse_point_flag(f.point);
  Chain chain = FastChain{p};
  if (!f.summary.empty()) {
    SlowChain slow{f.summary, std::nullopt, p};
    if (!f.focus.empty()) slow.focus = f.focus;
    chain = slow;
  }
  out << render_chain(chain, f.precision) << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dual-system GUI grounding toolkit", "dualground"};
  app.set_config("--config", "", "Config file of key=value lines; command-line flags win");
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", "dualground 0.1.0");

  SynthesizeFlags syn;
  auto* synthesize = app.add_subcommand("synthesize", "Run progressive data synthesis");
  synthesize->add_option("--input", syn.input, "Grounding samples JSONL")->required();
  add_backend_flags(synthesize, syn.common);
  synthesize
      ->add_option("--annotator", syn.annotator,
                   "Backend for summaries and focus analysis (same = the grounding backend)")
      ->check(CLI::IsMember({"same", "mock", "http"}))
      ->capture_default_str();
  synthesize->add_option("--out-fast", syn.out_fast, "Fast training records JSONL")->required();
  synthesize->add_option("--out-slow", syn.out_slow, "Slow training records JSONL")->required();
  synthesize->add_option("--out-unresolved", syn.out_unresolved, "Unresolved samples JSONL")
      ->required();
  synthesize->add_option("--stats-json", syn.stats_json, "Write synthesis stats as JSON");
  synthesize->add_flag("--progress", syn.progress, "Stream progress to stderr as JSON lines");

  EvalFlags ev;
  auto* eval = app.add_subcommand("eval", "Evaluate with adaptive fast/slow switching");
  eval->add_option("--dataset", ev.dataset, "Grounding samples JSONL")->required();
  add_backend_flags(eval, ev.common);
  eval->add_option("--alpha", ev.alpha, "Switching weight in [0, 1]")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  eval->add_option("--report-json", ev.report_json, "Write the report as JSON");
  eval->add_option("--report-table", ev.report_table,
                   "Write the text tables to this file instead of stdout");
  eval->add_option("--label", ev.label, "Row label in the text table")->capture_default_str();
  eval->add_option("--timeout-ms", ev.timeout_ms, "Per-sample latency limit, 0 disables")
      ->check(CLI::NonNegativeNumber);
  eval->add_flag("--weighted", ev.weighted, "Weight the average by cell size");

  SweepFlags sw;
  auto* sweep = app.add_subcommand("sweep", "Evaluate over a list of alpha values");
  sweep->add_option("--dataset", sw.dataset, "Grounding samples JSONL")->required();
  add_backend_flags(sweep, sw.common);
  sweep->add_option("--alphas", sw.alphas, "Comma-separated alpha values")->capture_default_str();
  sweep->add_option("--csv", sw.csv, "Write the CSV here instead of stdout");
  sweep->add_option("--json", sw.json, "Write rows with mode counts as JSON");
  sweep->add_option("--timeout-ms", sw.timeout_ms, "Per-sample latency limit, 0 disables")
      ->check(CLI::NonNegativeNumber);
  sweep->add_flag("--weighted", sw.weighted, "Weight the average by cell size");

  StatsFlags st;
  auto* stats = app.add_subcommand("stats", "Count training records per source");
  stats->add_option("--dataset", st.datasets, "Training records JSONL (repeatable)")
      ->required();
  stats->add_flag("--compact", st.compact, "Print counts of 1000 and above in thousands");
  stats->add_option("--json", st.json, "Write the stats as JSON");

  GenScenesFlags gs;
  auto* gen = app.add_subcommand("gen-scenes", "Generate a synthetic scene corpus");
  gen->add_option("--params", gs.params, "Scene generator parameters JSON");
  gen->add_option("--out", gs.out, "Scene corpus JSONL")->required();
  gen->add_option("--samples-out", gs.samples_out, "Matching grounding samples JSONL");
  gen->add_option("--seed", gs.seed, "Overrides the params seed");
  gen->add_option("--n", gs.n, "Overrides the params scene count");

  ChainFlags ch;
  auto* chain = app.add_subcommand("chain", "Parse or render reasoning chains");
  chain->require_subcommand(1, 1);
  auto* parse = chain->add_subcommand("parse", "Parse a chain and pretty-print it");
  parse->add_option("text", ch.text, "Chain text; '-' or omitted reads stdin");
  parse->add_flag("--json", ch.json, "Print JSON instead of text");
  parse->add_option("--precision", ch.precision, "Decimal places when printing")
      ->check(CLI::Range(1, kMaxPrecision))
      ->capture_default_str();
  auto* render = chain->add_subcommand("render", "Render a chain in canonical form");
  render->add_option("--point", ch.point, "Grounding point as X,Y")->required();
  render->add_option("--summary", ch.summary, "Interface summary (makes a slow chain)");
  render->add_option("--focus", ch.focus, "Focus analysis (needs --summary)");
  render->add_option("--precision", ch.precision, "Decimal places")
      ->check(CLI::Range(1, kMaxPrecision))
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*synthesize) return cmd_synthesize(syn, out, err);
    if (*eval) return cmd_eval(ev, out);
    if (*sweep) return cmd_sweep(sw, out);
    if (*stats) return cmd_stats(st, out);
    if (*gen) return cmd_gen_scenes(gs, out);
    if (*parse) return cmd_chain_parse(ch, out, err);
    if (*render) return cmd_chain_render(ch, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const BackendError& e) {
    err << fmt::format("error: backend {}: {}\n", to_string(e.kind()), e.what());
    return kExitBackend;
  } catch (const DatasetError& e) {
    if (e.line() > 0) {
      err << fmt::format("error: line {}: {}\n", e.line(), e.what());
    } else {
      err << "error: " << e.what() << '\n';
    }
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON: " << e.what() << '\n';
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    // Geometry, grammar, prompt, scene-parameter and empty-dataset errors.
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitUsage;
}

}  // namespace dualground::cli
