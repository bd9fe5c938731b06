// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#include "dualground/mock_backend.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "dualground/chain_grammar.hpp"
#include "dualground/rng.hpp"

namespace dualground {
namespace {

using Json = nlohmann::json;

constexpr std::array<std::string_view, 6> kMarkers = {
    tokens::kGroundingStart, tokens::kGroundingEnd, tokens::kSummaryStart,
    tokens::kSummaryEnd,     tokens::kFocusStart,   tokens::kFocusEnd,
};

std::size_t marker_at(std::string_view text, std::size_t pos) {
  for (auto m : kMarkers) {
    if (text.substr(pos, m.size()) == m) return m.size();
  }
  return 0;
}

std::string_view literal_prefix(std::string_view tmpl) {
  return tmpl.substr(0, tmpl.find('{'));
}

bool unit(double v) { return v >= 0.0 && v <= 1.0; }

void check_hit_model(const HitModel& h, const char* name) {
  if (!unit(h.base) || h.per_complexity < 0 || h.icon_penalty < 0) {
    throw std::invalid_argument(fmt::format("invalid hit model '{}'", name));
  }
}

HitModel hit_model_from_json(const Json& j, HitModel fallback) {
  if (j.is_null()) return fallback;
  HitModel h = fallback;
  h.base = j.value("base", h.base);
  h.per_complexity = j.value("per_complexity", h.per_complexity);
  h.icon_penalty = j.value("icon_penalty", h.icon_penalty);
  if (j.contains("distractor_limit")) {
    const auto& lim = j["distractor_limit"];
    h.distractor_limit = lim.is_null() ? std::nullopt : std::optional<int>(lim.get<int>());
  }
  return h;
}

nlohmann::ordered_json hit_model_to_json(const HitModel& h) {
  nlohmann::ordered_json j;
  j["base"] = h.base;
  j["per_complexity"] = h.per_complexity;
  j["icon_penalty"] = h.icon_penalty;
  j["distractor_limit"] = h.distractor_limit ? Json(*h.distractor_limit) : Json(nullptr);
  return j;
}

std::string_view kind_noun(ElementKind k, bool plural) {
  if (k == ElementKind::kText) return plural ? "text labels" : "text label";
  return plural ? "icons" : "icon";
}

std::string summary_text(const SyntheticScene& scene) {
  const auto icons = std::count_if(scene.elements.begin(), scene.elements.end(),
                                   [](const SceneElement& e) {
                                     return e.kind == ElementKind::kIconWidget;
                                   });
  const auto texts = static_cast<long>(scene.elements.size()) - icons;
  const auto& t = scene.target_element();
  return fmt::format(
      "{} screen with {} elements ({} text labels, {} icons). The requested "
      "element is a {} nested {} level(s) deep; {} other {} look similar.",
      to_string(scene.platform), scene.elements.size(), texts, icons,
      kind_noun(t.kind, false), scene.depth, scene.distractor_count,
      kind_noun(t.kind, true));
}

std::string focus_text(const SyntheticScene& scene) {
  const auto& t = scene.target_element();
  const auto c = center(t.bbox);
  const char* v = c.y() < 1.0 / 3 ? "top" : c.y() < 2.0 / 3 ? "middle" : "bottom";
  const char* h = c.x() < 1.0 / 3 ? "left" : c.x() < 2.0 / 3 ? "center" : "right";
  return fmt::format(
      "Candidate: the {} labelled \"{}\" in the {}-{} area, about {:.0f}% by "
      "{:.0f}% of the screen, with {} look-alike {} around it.",
      kind_noun(t.kind, false), t.label, v, h, t.bbox.width() * 100,
      t.bbox.height() * 100, scene.distractor_count, kind_noun(t.kind, true));
}

NormPoint miss_point(const SyntheticScene& scene, std::uint64_t h) {
  const auto& target = scene.target_element().bbox;
  std::vector<NormPoint> candidates;
  auto collect = [&](bool same_kind) {
    for (std::size_t i = 0; i < scene.elements.size(); ++i) {
      const auto& e = scene.elements[i];
      if (i == scene.target || (e.kind == scene.target_element().kind) != same_kind) continue;
      auto p = representable_point_in(e.bbox, kDefaultPrecision);
      if (p && !hit(*p, target)) candidates.push_back(*p);
    }
  };
  // Look-alike elements are the likelier confusion.
  collect(true);
  if (candidates.empty()) collect(false);
  if (candidates.empty()) {
    for (auto p : {NormPoint(0, 0), NormPoint(1, 1), NormPoint(0, 1), NormPoint(1, 0)}) {
      if (!hit(p, target)) return p;
    }
    return NormPoint(0, 0);
  }
  return candidates[splitmix64(h) % candidates.size()];
}

}  // namespace

double HitModel::probability(const SyntheticScene& scene) const {
  if (distractor_limit && scene.distractor_count >= *distractor_limit) return 0.0;
  const double icon = scene.target_element().kind == ElementKind::kIconWidget ? 1.0 : 0.0;
  return std::clamp(base - per_complexity * complexity(scene) - icon_penalty * icon, 0.0, 1.0);
}

void MockErrorModel::validate() const {
  check_hit_model(fast, "fast");
  check_hit_model(with_summary, "with_summary");
  check_hit_model(with_focus, "with_focus");
  if (!unit(overthinking_penalty)) throw std::invalid_argument("overthinking_penalty outside [0,1]");
  if (!unit(marker_mass)) throw std::invalid_argument("marker_mass outside [0,1]");
  if (prefill_ms < 0 || per_token_ms < 0) throw std::invalid_argument("negative latency");
  if (max_in_flight == 0) throw std::invalid_argument("max_in_flight must be positive");
}

MockErrorModel error_model_from_json(const Json& j) {
  MockErrorModel m;
  try {
    m.fast = hit_model_from_json(j.value("fast", Json()), m.fast);
    m.with_summary = hit_model_from_json(j.value("with_summary", Json()), m.with_summary);
    m.with_focus = hit_model_from_json(j.value("with_focus", Json()), m.with_focus);
    m.overthinking_penalty = j.value("overthinking_penalty", m.overthinking_penalty);
    m.simple_complexity = j.value("simple_complexity", m.simple_complexity);
    m.marker_mass = j.value("marker_mass", m.marker_mass);
    m.switch_midpoint = j.value("switch_midpoint", m.switch_midpoint);
    m.switch_slope = j.value("switch_slope", m.switch_slope);
    m.icon_logit_bias = j.value("icon_logit_bias", m.icon_logit_bias);
    m.prefill_ms = j.value("prefill_ms", m.prefill_ms);
    m.per_token_ms = j.value("per_token_ms", m.per_token_ms);
    m.max_in_flight = j.value("max_in_flight", m.max_in_flight);
  } catch (const Json::exception& e) {
    throw std::invalid_argument(fmt::format("error model: {}", e.what()));
  }
  m.validate();
  return m;
}

nlohmann::ordered_json error_model_to_json(const MockErrorModel& m) {
  nlohmann::ordered_json j;
  j["fast"] = hit_model_to_json(m.fast);
  j["with_summary"] = hit_model_to_json(m.with_summary);
  j["with_focus"] = hit_model_to_json(m.with_focus);
  j["overthinking_penalty"] = m.overthinking_penalty;
  j["simple_complexity"] = m.simple_complexity;
  j["marker_mass"] = m.marker_mass;
  j["switch_midpoint"] = m.switch_midpoint;
  j["switch_slope"] = m.switch_slope;
  j["icon_logit_bias"] = m.icon_logit_bias;
  j["prefill_ms"] = m.prefill_ms;
  j["per_token_ms"] = m.per_token_ms;
  j["max_in_flight"] = m.max_in_flight;
  return j;
}

MockErrorModel load_error_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
  try {
    return error_model_from_json(Json::parse(in));
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::size_t estimate_tokens(std::string_view text) {
  std::size_t tokens = 0;
  std::size_t run = 0;
  for (std::size_t pos = 0; pos < text.size();) {
    if (const auto len = marker_at(text, pos)) {
      tokens += (run + 3) / 4 + 1;
      run = 0;
      pos += len;
    } else {
      ++run;
      ++pos;
    }
  }
  return tokens + (run + 3) / 4;
}

std::string truncate_tokens(std::string_view text, std::size_t max_tokens) {
  std::size_t tokens = 0;
  std::size_t run = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (const auto len = marker_at(text, pos)) {
      if (tokens + 1 > max_tokens) break;
      ++tokens;
      run = 0;
      pos += len;
    } else {
      if (run % 4 == 0) {
        if (tokens + 1 > max_tokens) break;
        ++tokens;
      }
      ++run;
      ++pos;
    }
  }
  return std::string(text.substr(0, pos));
}

MockBackend::MockBackend(std::vector<SyntheticScene> scenes, MockErrorModel model,
                         std::uint64_t seed, PromptTemplateSet templates)
    : model_(std::move(model)), seed_(seed), templates_(std::move(templates)) {
  model_.validate();
  templates_.validate();
  for (auto& s : scenes) {
    s.validate();
    auto id = s.id;
    if (!scenes_.emplace(std::move(id), std::move(s)).second) {
      throw std::invalid_argument("duplicate scene id in mock corpus");
    }
  }
}

const SyntheticScene& MockBackend::scene(const std::string& uri) const {
  auto it = scenes_.find(uri);
  if (it == scenes_.end()) {
    throw BackendError(BackendErrorKind::kUnknownScene, fmt::format("no scene '{}'", uri));
  }
  return it->second;
}

FirstTokenDist MockBackend::first_token_dist(const SyntheticScene& scene) const {
  const double icon = scene.target_element().kind == ElementKind::kIconWidget ? 1.0 : 0.0;
  const double logit = model_.switch_slope * (complexity(scene) - model_.switch_midpoint) +
                       model_.icon_logit_bias * icon;
  const double share = 1.0 / (1.0 + std::exp(-logit));
  FirstTokenDist d;
  d.p_summary = model_.marker_mass * share;
  d.p_ground = model_.marker_mass - d.p_summary;
  d.p_other = 1.0 - model_.marker_mass;
  return d;
}

double MockBackend::draw(const SyntheticScene& scene,
                         std::optional<std::int64_t> request_seed) const {
  std::uint64_t h = seed_ ^ splitmix64(fnv1a64(scene.id));
  if (request_seed) {
    h ^= splitmix64(static_cast<std::uint64_t>(*request_seed) + 0x632be59bd9b4e019ULL);
  }
  return unit_from_hash(splitmix64(h));
}

double MockBackend::slow_hit_probability(const SyntheticScene& scene) const {
  const double fast = model_.fast.probability(scene);
  if (complexity(scene) <= model_.simple_complexity) {
    return std::max(0.0, fast - model_.overthinking_penalty);
  }
  return std::max(model_.with_focus.probability(scene), fast);
}

GenerationResult MockBackend::generate(const GenerationRequest& request) {
  request.validate();
  const auto& sc = scene(request.screenshot.uri);
  GenerationResult result;
  result.first_token_dist = first_token_dist(sc);

  const std::string_view prompt = request.prompt;
  std::string_view best_prefix;
  PromptStage stage = PromptStage::kGround;
  for (auto [candidate, tmpl] :
       {std::pair{PromptStage::kGround, std::string_view(templates_.grounding_template)},
        std::pair{PromptStage::kSummarize, std::string_view(templates_.summary_template)},
        std::pair{PromptStage::kFocus, std::string_view(templates_.focus_template)}}) {
    const auto prefix = literal_prefix(tmpl);
    if (!prefix.empty() && prompt.starts_with(prefix) && prefix.size() > best_prefix.size()) {
      best_prefix = prefix;
      stage = candidate;
    }
  }

  std::string text;
  if (stage == PromptStage::kSummarize) {
    text = summary_text(sc);
  } else if (stage == PromptStage::kFocus) {
    text = focus_text(sc);
  } else {
    const bool has_summary = prompt.find(tokens::kSummaryStart) != std::string_view::npos;
    const bool has_focus = prompt.find(tokens::kFocusStart) != std::string_view::npos;
    bool slow = false;
    switch (request.mode_hint) {
      case ModeHint::kForceFast:
        slow = false;
        break;
      case ModeHint::kForceSlow:
        slow = true;
        break;
      case ModeHint::kFree:
        slow = result.first_token_dist.p_summary > result.first_token_dist.p_ground;
        break;
    }
    double p = 0.0;
    if (has_focus) {
      p = model_.with_focus.probability(sc);
    } else if (has_summary) {
      p = model_.with_summary.probability(sc);
    } else if (slow) {
      p = slow_hit_probability(sc);
    } else {
      p = model_.fast.probability(sc);
    }
    const double u = draw(sc, request.seed);
    const bool hits = u < p;
    auto point = hits ? representable_point_in(sc.target_element().bbox, kDefaultPrecision)
                      : std::optional<NormPoint>();
    if (!point) point = miss_point(sc, fnv1a64(sc.id) ^ seed_);
    if (slow) {
      text = render_chain(SlowChain{summary_text(sc), focus_text(sc), *point});
    } else {
      text = render_chain(FastChain{*point});
    }
  }
  text = truncate_tokens(text, static_cast<std::size_t>(request.max_new_tokens));
  result.latency_ms =
      model_.prefill_ms + model_.per_token_ms * static_cast<double>(estimate_tokens(text));
  result.text = std::move(text);
  return result;
}

}  // namespace dualground
