// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dualground/geometry.hpp"
#include "dualground/sample.hpp"

namespace dualground {

struct SceneElement {
  NormBBox bbox{0, 0, 0, 0};
  ElementKind kind = ElementKind::kText;
  std::string label;
  int depth = 0;

  friend bool operator==(const SceneElement&, const SceneElement&) = default;
};

/// Structured stand-in for a screenshot: a flat list of non-overlapping
/// elements, one of which is the grounding target.
struct SyntheticScene {
  std::string id;  // doubles as the screenshot URI
  Platform platform = Platform::kWeb;
  std::vector<SceneElement> elements;
  std::size_t target = 0;
  /// Elements other than the target that share its kind.
  int distractor_count = 0;
  /// Nesting level of the target.
  int depth = 0;

  const SceneElement& target_element() const { return elements.at(target); }
  ScreenshotRef screenshot() const;

  /// Throws std::invalid_argument when the target index, distractor count
  /// or depth disagree with the elements.
  void validate() const;

  friend bool operator==(const SyntheticScene&, const SyntheticScene&) = default;
};

// Closed form: distractor_count + 2 * depth.
double complexity(const SyntheticScene& scene);

class InvalidParams : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SceneGenParams {
  std::size_t n_scenes = 100;
  int min_elements = 4;
  int max_elements = 16;
  /// Probability that a scene's target is an icon/widget.
  double icon_fraction = 0.4;
  /// Distractor count is uniform on [0, min(max_distractors, elements - 1)].
  int max_distractors = 6;
  /// Target depth is uniform on [0, max_depth].
  int max_depth = 2;
  std::uint64_t seed = 0;
  std::string source = "synthetic";
  std::string id_prefix = "scene";

  void validate() const;
};

SceneGenParams params_from_json(const nlohmann::json& j);
nlohmann::ordered_json params_to_json(const SceneGenParams& p);

struct SceneCorpus {
  std::vector<SyntheticScene> scenes;
  /// samples[i] targets scenes[i].
  std::vector<GroundingSample> samples;
};

SceneCorpus generate_scenes(const SceneGenParams& params);

nlohmann::ordered_json encode(const SyntheticScene& scene);
SyntheticScene decode_scene(const nlohmann::json& j);

std::size_t write_scenes(const std::vector<SyntheticScene>& scenes,
                         const std::filesystem::path& path);
/// Throws DatasetError with the offending line number.
std::vector<SyntheticScene> read_scenes(const std::filesystem::path& path);

}  // namespace dualground
