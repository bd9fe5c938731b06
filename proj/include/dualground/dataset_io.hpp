// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dualground/geometry.hpp"
#include "dualground/sample.hpp"

namespace dualground {

using OrderedJson = nlohmann::ordered_json;

class DatasetError : public std::runtime_error {
 public:
  enum class Kind { kIo, kSchema, kInvariant };

  /// `line` is 1-based; 0 when the error is not tied to a line.
  DatasetError(Kind kind, std::size_t line, const std::string& what);

  Kind kind() const { return kind_; }
  std::size_t line() const { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

/// Line reader over plain or gzip-compressed (".gz" suffix) files.
class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path);
  ~LineReader();
  LineReader(LineReader&&) noexcept;
  LineReader& operator=(LineReader&&) noexcept;

  /// Reads the next line without its terminator ('\r' stripped too).
  bool next(std::string& line);
  /// 1-based number of the line last returned by next().
  std::size_t line_number() const { return line_number_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::size_t line_number_ = 0;
};

/// Owns its output file for its lifetime. One JSON value per line,
/// '\n'-terminated; ".gz" paths are compressed.
class JsonlWriter {
 public:
  explicit JsonlWriter(const std::filesystem::path& path);
  ~JsonlWriter();
  JsonlWriter(JsonlWriter&&) noexcept;
  JsonlWriter& operator=(JsonlWriter&&) noexcept;

  void write(const OrderedJson& value);
  void write_line(const std::string& line);
  std::size_t count() const { return count_; }
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::size_t count_ = 0;
};

/// A JsonlWriter shared by concurrent producers. Appends arrive in
/// completion order; finalize() rewrites the file stably sorted by each
/// record's "id" so the result does not depend on scheduling.
class JsonlSink {
 public:
  explicit JsonlSink(std::filesystem::path path);

  void append(const OrderedJson& value);
  std::size_t count() const;
  void finalize();

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::optional<JsonlWriter> writer_;
  std::size_t count_ = 0;
};

// ---- sample triplets -------------------------------------------------------

OrderedJson encode(const GroundingSample& sample);

/// Accepts "bbox" (normalized) and/or "bbox_px" (pixels, normalized with the
/// screenshot size). When both are present they must agree within 1e-6 and
/// "bbox" is kept. `line` is attached to any error.
GroundingSample decode_sample(const nlohmann::json& j, std::size_t line);

/// Streams validated samples; ids must be unique within the file.
class SampleReader {
 public:
  explicit SampleReader(const std::filesystem::path& path);

  std::optional<GroundingSample> next();

 private:
  LineReader lines_;
  std::vector<std::string> seen_ids_;  // kept sorted
};

std::vector<GroundingSample> read_samples(const std::filesystem::path& path);

// ---- training records ------------------------------------------------------

enum class TrainingClass { kFast, kSlow };

std::string_view to_string(TrainingClass c);

struct TrainingMetadata {
  std::string source;
  Platform platform = Platform::kWeb;
  ElementKind element_kind = ElementKind::kText;
  /// The model prediction that passed the hit test during synthesis.
  NormPoint verified_point{0, 0};
  /// Synthesis stage that produced the hit: 1, 2 or 3.
  int stage = 1;

  friend bool operator==(const TrainingMetadata&, const TrainingMetadata&) =
      default;
};

struct TrainingRecord {
  std::string id;
  std::string prompt;
  std::string completion;
  TrainingClass cls = TrainingClass::kFast;
  TrainingMetadata metadata;

  friend bool operator==(const TrainingRecord&, const TrainingRecord&) = default;
};

/// Throws DatasetError(kInvariant) when the completion does not parse or
/// disagrees with the class or stage.
void validate(const TrainingRecord& record, std::size_t line = 0);

OrderedJson encode(const TrainingRecord& record);
TrainingRecord decode_training_record(const nlohmann::json& j, std::size_t line);
std::vector<TrainingRecord> read_training_records(
    const std::filesystem::path& path);

// ---- generic writer --------------------------------------------------------

/// Writes one encoded record per line and returns the count.
template <typename Range>
std::size_t write_jsonl(const Range& records, const std::filesystem::path& path) {
  JsonlWriter writer(path);
  for (const auto& r : records) writer.write(encode(r));
  writer.close();
  return writer.count();
}

// ---- dataset statistics ----------------------------------------------------

struct StatsRow {
  std::string source;
  std::size_t total = 0;
  std::size_t slow_count = 0;
  std::size_t fast_count = 0;

  friend bool operator==(const StatsRow&, const StatsRow&) = default;
};

struct DatasetStats {
  /// In order of first appearance.
  std::vector<StatsRow> rows;
  StatsRow totals{"Total"};

  const StatsRow* find(const std::string& source) const;
  /// Row-wise sum; sources only in `other` are appended.
  DatasetStats& operator+=(const DatasetStats& other);

  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

DatasetStats compute_stats(std::span<const TrainingRecord> records);

/// Aligned text table with columns Source, Number, #S_Num, #F_Num. With
/// `compact`, counts of 1000 and above print in thousands ("36K").
std::string render_stats_table(const DatasetStats& stats, bool compact = false);
std::string format_count(std::size_t n, bool compact);
OrderedJson encode(const DatasetStats& stats);

}  // namespace dualground
