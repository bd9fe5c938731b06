// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#include "dualground/synthetic_env.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "dualground/dataset_io.hpp"
#include "dualground/rng.hpp"

namespace dualground {
namespace {

using Json = nlohmann::json;

constexpr std::array<std::string_view, 16> kIconLabels = {
    "search", "settings", "home",  "back", "menu",   "share", "download", "profile",
    "bell",   "trash",    "edit",  "star", "cart",   "mail",  "lock",     "refresh",
};

constexpr std::array<std::string_view, 12> kTextLabels = {
    "Sign in",     "View my account", "Submit",        "Cancel",
    "Next page",   "Open file",       "Save draft",    "Help center",
    "Privacy policy", "Export data",  "Add comment",   "Log out",
};

struct Resolution {
  std::int64_t width;
  std::int64_t height;
};

Resolution resolution_for(Platform p) {
  switch (p) {
    case Platform::kMobile:
      return {1080, 2340};
    case Platform::kDesktop:
      return {1920, 1080};
    case Platform::kWeb:
      return {1440, 900};
  }
  return {1440, 900};
}

// Distinct labels for `n` elements of one kind; the vocabulary is reused
// with a numeric suffix once exhausted.
template <std::size_t N>
std::vector<std::string> pick_labels(Rng& rng, const std::array<std::string_view, N>& vocab,
                                     int n) {
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = N - 1; i > 0; --i) {
    std::swap(order[i], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)))]);
  }
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) {
    const auto base = vocab[order[static_cast<std::size_t>(i) % N]];
    const int round = i / static_cast<int>(N);
    out.push_back(round == 0 ? std::string(base) : fmt::format("{} {}", base, round + 1));
  }
  return out;
}

// Boxes on a 0.01 grid inside a rows x cols layout with 0.02 outer margin.
NormBBox cell_box(Rng& rng, int index, int rows, int cols, ElementKind kind) {
  const int r = index / cols;
  const int c = index % cols;
  const int x0 = 2 + 96 * c / cols;
  const int x1 = 2 + 96 * (c + 1) / cols;
  const int y0 = 2 + 96 * r / rows;
  const int y1 = 2 + 96 * (r + 1) / rows;
  const int cell_w = x1 - x0 - 2;  // leave one unit on each side
  const int cell_h = y1 - y0 - 2;
  const int min_w = kind == ElementKind::kText ? std::max(2, cell_w / 2) : 2;
  const int max_w = kind == ElementKind::kText ? cell_w : std::max(2, cell_w / 2);
  const int w = static_cast<int>(rng.uniform_int(std::min(min_w, cell_w), std::min(max_w, cell_w)));
  const int h = static_cast<int>(rng.uniform_int(std::min(2, cell_h), std::max(2, std::min(cell_h, kind == ElementKind::kText ? 6 : cell_h / 2))));
  const int bx = x0 + 1 + static_cast<int>(rng.uniform_int(0, cell_w - w));
  const int by = y0 + 1 + static_cast<int>(rng.uniform_int(0, std::max(0, cell_h - h)));
  return NormBBox(bx / 100.0, by / 100.0, (bx + w) / 100.0, (by + h) / 100.0);
}

std::string instruction_for(const SceneElement& e) {
  if (e.kind == ElementKind::kIconWidget) return fmt::format("click the {} icon", e.label);
  return fmt::format("click \"{}\"", e.label);
}

}  // namespace

ScreenshotRef SyntheticScene::screenshot() const {
  const auto res = resolution_for(platform);
  return {id, res.width, res.height};
}

void SyntheticScene::validate() const {
  if (target >= elements.size()) {
    throw std::invalid_argument(fmt::format("scene {}: target index out of range", id));
  }
  const auto kind = elements[target].kind;
  const auto same = std::count_if(elements.begin(), elements.end(),
                                  [&](const SceneElement& e) { return e.kind == kind; });
  if (same - 1 != distractor_count) {
    throw std::invalid_argument(fmt::format(
        "scene {}: distractor_count {} but {} other elements share the target kind", id,
        distractor_count, same - 1));
  }
  if (elements[target].depth != depth || depth < 0) {
    throw std::invalid_argument(fmt::format("scene {}: depth disagrees with target", id));
  }
}

double complexity(const SyntheticScene& scene) {
  return static_cast<double>(scene.distractor_count) + 2.0 * scene.depth;
}

void SceneGenParams::validate() const {
  if (min_elements < 1 || min_elements > max_elements) {
    throw InvalidParams(fmt::format("element range [{}, {}] is empty", min_elements,
                                    max_elements));
  }
  if (max_elements > 25) throw InvalidParams("max_elements above 25");
  if (!(icon_fraction >= 0.0 && icon_fraction <= 1.0)) {
    throw InvalidParams(fmt::format("icon_fraction {} outside [0,1]", icon_fraction));
  }
  if (max_distractors < 0) throw InvalidParams("max_distractors is negative");
  if (max_depth < 0) throw InvalidParams("max_depth is negative");
}

SceneGenParams params_from_json(const Json& j) {
  SceneGenParams p;
  try {
    p.n_scenes = j.value("n_scenes", p.n_scenes);
    p.min_elements = j.value("min_elements", p.min_elements);
    p.max_elements = j.value("max_elements", p.max_elements);
    p.icon_fraction = j.value("icon_fraction", p.icon_fraction);
    p.max_distractors = j.value("max_distractors", p.max_distractors);
    p.max_depth = j.value("max_depth", p.max_depth);
    p.seed = j.value("seed", p.seed);
    p.source = j.value("source", p.source);
    p.id_prefix = j.value("id_prefix", p.id_prefix);
  } catch (const Json::exception& e) {
    throw InvalidParams(e.what());
  }
  p.validate();
  return p;
}

nlohmann::ordered_json params_to_json(const SceneGenParams& p) {
  nlohmann::ordered_json j;
  j["n_scenes"] = p.n_scenes;
  j["min_elements"] = p.min_elements;
  j["max_elements"] = p.max_elements;
  j["icon_fraction"] = p.icon_fraction;
  j["max_distractors"] = p.max_distractors;
  j["max_depth"] = p.max_depth;
  j["seed"] = p.seed;
  j["source"] = p.source;
  j["id_prefix"] = p.id_prefix;
  return j;
}

SceneCorpus generate_scenes(const SceneGenParams& params) {
  params.validate();
  Rng rng(params.seed);
  SceneCorpus corpus;
  corpus.scenes.reserve(params.n_scenes);
  corpus.samples.reserve(params.n_scenes);

  for (std::size_t i = 0; i < params.n_scenes; ++i) {
    SyntheticScene scene;
    scene.id = fmt::format("{}-{:05d}", params.id_prefix, i);
    scene.platform = static_cast<Platform>(rng.uniform_int(0, 2));

    const int n = static_cast<int>(rng.uniform_int(params.min_elements, params.max_elements));
    const ElementKind target_kind =
        rng.bernoulli(params.icon_fraction) ? ElementKind::kIconWidget : ElementKind::kText;
    const ElementKind other_kind =
        target_kind == ElementKind::kText ? ElementKind::kIconWidget : ElementKind::kText;
    scene.distractor_count =
        static_cast<int>(rng.uniform_int(0, std::min(params.max_distractors, n - 1)));
    scene.depth = static_cast<int>(rng.uniform_int(0, params.max_depth));

    const int same_kind = scene.distractor_count + 1;
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    const int rows = (n + cols - 1) / cols;

    // Random assignment of grid cells; element 0 is the target before the
    // shuffle below picks its final index.
    std::vector<int> cells(static_cast<std::size_t>(rows * cols));
    std::iota(cells.begin(), cells.end(), 0);
    for (std::size_t k = cells.size() - 1; k > 0; --k) {
      std::swap(cells[k], cells[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(k)))]);
    }

    auto target_labels = target_kind == ElementKind::kText
                             ? pick_labels(rng, kTextLabels, same_kind)
                             : pick_labels(rng, kIconLabels, same_kind);
    auto other_labels = other_kind == ElementKind::kText
                            ? pick_labels(rng, kTextLabels, n - same_kind)
                            : pick_labels(rng, kIconLabels, n - same_kind);

    for (int e = 0; e < n; ++e) {
      SceneElement el;
      el.kind = e < same_kind ? target_kind : other_kind;
      el.label = e < same_kind ? target_labels[static_cast<std::size_t>(e)]
                               : other_labels[static_cast<std::size_t>(e - same_kind)];
      el.depth = e == 0 ? scene.depth : static_cast<int>(rng.uniform_int(0, params.max_depth));
      el.bbox = cell_box(rng, cells[static_cast<std::size_t>(e)], rows, cols, el.kind);
      scene.elements.push_back(std::move(el));
    }
    // Sort by reading order so the target's position in the list carries no
    // information.
    std::vector<std::size_t> order(scene.elements.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const auto& ba = scene.elements[a].bbox;
      const auto& bb = scene.elements[b].bbox;
      return std::pair(ba.y_min(), ba.x_min()) < std::pair(bb.y_min(), bb.x_min());
    });
    std::vector<SceneElement> sorted;
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (order[k] == 0) scene.target = k;
      sorted.push_back(scene.elements[order[k]]);
    }
    scene.elements = std::move(sorted);
    scene.validate();

    GroundingSample sample;
    sample.id = scene.id;
    sample.instruction = instruction_for(scene.target_element());
    sample.bbox = scene.target_element().bbox;
    sample.screenshot = scene.screenshot();
    sample.platform = scene.platform;
    sample.element_kind = target_kind;
    sample.source = params.source;

    corpus.scenes.push_back(std::move(scene));
    corpus.samples.push_back(std::move(sample));
  }
  return corpus;
}

nlohmann::ordered_json encode(const SyntheticScene& scene) {
  nlohmann::ordered_json j;
  j["id"] = scene.id;
  j["platform"] = std::string(to_string(scene.platform));
  j["target"] = scene.target;
  j["distractor_count"] = scene.distractor_count;
  j["depth"] = scene.depth;
  j["elements"] = nlohmann::ordered_json::array();
  for (const auto& e : scene.elements) {
    nlohmann::ordered_json ej;
    ej["bbox"] = {e.bbox.x_min(), e.bbox.y_min(), e.bbox.x_max(), e.bbox.y_max()};
    ej["kind"] = std::string(to_string(e.kind));
    ej["label"] = e.label;
    ej["depth"] = e.depth;
    j["elements"].push_back(std::move(ej));
  }
  return j;
}

SyntheticScene decode_scene(const Json& j) {
  SyntheticScene s;
  s.id = j.at("id").get<std::string>();
  const auto platform = parse_platform(j.at("platform").get<std::string>());
  if (!platform) throw std::invalid_argument("unknown platform");
  s.platform = *platform;
  s.target = j.at("target").get<std::size_t>();
  s.distractor_count = j.at("distractor_count").get<int>();
  s.depth = j.at("depth").get<int>();
  for (const auto& ej : j.at("elements")) {
    SceneElement e;
    const auto& b = ej.at("bbox");
    e.bbox = NormBBox(b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                      b.at(3).get<double>());
    const auto kind = parse_element_kind(ej.at("kind").get<std::string>());
    if (!kind) throw std::invalid_argument("unknown element kind");
    e.kind = *kind;
    e.label = ej.at("label").get<std::string>();
    e.depth = ej.at("depth").get<int>();
    s.elements.push_back(std::move(e));
  }
  s.validate();
  return s;
}

std::size_t write_scenes(const std::vector<SyntheticScene>& scenes,
                         const std::filesystem::path& path) {
  return write_jsonl(scenes, path);
}

std::vector<SyntheticScene> read_scenes(const std::filesystem::path& path) {
  LineReader reader(path);
  std::vector<SyntheticScene> out;
  std::string line;
  while (reader.next(line)) {
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      out.push_back(decode_scene(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw DatasetError(DatasetError::Kind::kSchema, reader.line_number(), e.what());
    } catch (const std::invalid_argument& e) {
      throw DatasetError(DatasetError::Kind::kInvariant, reader.line_number(), e.what());
    }
  }
  return out;
}

}  // namespace dualground
