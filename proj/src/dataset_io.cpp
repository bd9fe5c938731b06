// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#include "dualground/dataset_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <utility>
#include <variant>

#include <fmt/format.h>
#include <zlib.h>

#include "dualground/chain_grammar.hpp"

namespace dualground {
namespace {

using Json = nlohmann::json;

bool is_gz(const std::filesystem::path& path) {
  return path.extension() == ".gz";
}

[[noreturn]] void schema_error(std::size_t line, const std::string& msg) {
  throw DatasetError(DatasetError::Kind::kSchema, line, msg);
}

[[noreturn]] void invariant_error(std::size_t line, const std::string& msg) {
  throw DatasetError(DatasetError::Kind::kInvariant, line, msg);
}

const Json& require(const Json& j, const char* key, std::size_t line) {
  if (!j.is_object()) schema_error(line, "expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) schema_error(line, fmt::format("missing field '{}'", key));
  return *it;
}

std::string require_string(const Json& j, const char* key, std::size_t line) {
  const auto& v = require(j, key, line);
  if (!v.is_string()) schema_error(line, fmt::format("'{}' must be a string", key));
  return v.get<std::string>();
}

std::int64_t require_int(const Json& j, const char* key, std::size_t line) {
  const auto& v = require(j, key, line);
  if (!v.is_number_integer()) {
    schema_error(line, fmt::format("'{}' must be an integer", key));
  }
  return v.get<std::int64_t>();
}

template <std::size_t N>
std::array<double, N> require_numbers(const Json& j, const char* key,
                                      std::size_t line) {
  const auto& v = require(j, key, line);
  if (!v.is_array() || v.size() != N) {
    schema_error(line, fmt::format("'{}' must be an array of {} numbers", key, N));
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!v[i].is_number()) {
      schema_error(line, fmt::format("'{}' must be an array of {} numbers", key, N));
    }
    out[i] = v[i].get<double>();
  }
  return out;
}

Json parse_line(const std::string& text, std::size_t line) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    schema_error(line, fmt::format("invalid JSON: {}", e.what()));
  }
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  });
}

}  // namespace

DatasetError::DatasetError(Kind kind, std::size_t line, const std::string& what)
    : std::runtime_error(line > 0 ? fmt::format("line {}: {}", line, what) : what),
      kind_(kind),
      line_(line) {}

// ---- LineReader ------------------------------------------------------------

struct LineReader::Impl {
  gzFile file = nullptr;
  std::string pending;
  bool eof = false;

  ~Impl() {
    if (file != nullptr) gzclose(file);
  }
};

LineReader::LineReader(const std::filesystem::path& path)
    : impl_(std::make_unique<Impl>()) {
  // gzread passes uncompressed input through unchanged.
  impl_->file = gzopen(path.c_str(), "rb");
  if (impl_->file == nullptr) {
    throw DatasetError(DatasetError::Kind::kIo, 0,
                       fmt::format("cannot open '{}' for reading", path.string()));
  }
}

LineReader::~LineReader() = default;
LineReader::LineReader(LineReader&&) noexcept = default;
LineReader& LineReader::operator=(LineReader&&) noexcept = default;

bool LineReader::next(std::string& line) {
  auto& im = *impl_;
  while (true) {
    auto nl = im.pending.find('\n');
    if (nl != std::string::npos) {
      line.assign(im.pending, 0, nl);
      im.pending.erase(0, nl + 1);
      break;
    }
    if (im.eof) {
      if (im.pending.empty()) return false;
      line = std::move(im.pending);
      im.pending.clear();
      break;
    }
    char buf[1 << 16];
    const int n = gzread(im.file, buf, sizeof buf);
    if (n < 0) {
      int errnum = 0;
      throw DatasetError(DatasetError::Kind::kIo, line_number_ + 1,
                         gzerror(im.file, &errnum));
    }
    if (n == 0) {
      im.eof = true;
    } else {
      im.pending.append(buf, static_cast<std::size_t>(n));
    }
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  ++line_number_;
  return true;
}

// ---- JsonlWriter -----------------------------------------------------------

struct JsonlWriter::Impl {
  std::filesystem::path path;
  std::ofstream plain;
  gzFile gz = nullptr;

  void close() {
    if (gz != nullptr) {
      if (gzclose(gz) != Z_OK) {
        gz = nullptr;
        throw DatasetError(DatasetError::Kind::kIo, 0,
                           fmt::format("error closing '{}'", path.string()));
      }
      gz = nullptr;
    }
    if (plain.is_open()) {
      plain.close();
      if (plain.fail()) {
        throw DatasetError(DatasetError::Kind::kIo, 0,
                           fmt::format("error closing '{}'", path.string()));
      }
    }
  }

  ~Impl() {
    try {
      close();
    } catch (...) {
    }
  }
};

JsonlWriter::JsonlWriter(const std::filesystem::path& path)
    : impl_(std::make_unique<Impl>()) {
  impl_->path = path;
  if (is_gz(path)) {
    impl_->gz = gzopen(path.c_str(), "wb");
    if (impl_->gz == nullptr) {
      throw DatasetError(DatasetError::Kind::kIo, 0,
                         fmt::format("cannot open '{}' for writing", path.string()));
    }
  } else {
    impl_->plain.open(path, std::ios::binary | std::ios::trunc);
    if (!impl_->plain) {
      throw DatasetError(DatasetError::Kind::kIo, 0,
                         fmt::format("cannot open '{}' for writing", path.string()));
    }
  }
}

JsonlWriter::~JsonlWriter() = default;
JsonlWriter::JsonlWriter(JsonlWriter&&) noexcept = default;
JsonlWriter& JsonlWriter::operator=(JsonlWriter&&) noexcept = default;

void JsonlWriter::write(const OrderedJson& value) { write_line(value.dump()); }

void JsonlWriter::write_line(const std::string& line) {
  auto& im = *impl_;
  const std::string out = line + '\n';
  if (im.gz != nullptr) {
    const auto n = gzwrite(im.gz, out.data(), static_cast<unsigned>(out.size()));
    if (n != static_cast<int>(out.size())) {
      throw DatasetError(DatasetError::Kind::kIo, 0,
                         fmt::format("write to '{}' failed", im.path.string()));
    }
  } else {
    im.plain.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!im.plain) {
      throw DatasetError(DatasetError::Kind::kIo, 0,
                         fmt::format("write to '{}' failed", im.path.string()));
    }
  }
  ++count_;
}

void JsonlWriter::close() { impl_->close(); }

// ---- JsonlSink -------------------------------------------------------------

JsonlSink::JsonlSink(std::filesystem::path path) : path_(std::move(path)) {
  writer_.emplace(path_);
}

void JsonlSink::append(const OrderedJson& value) {
  std::lock_guard lock(mu_);
  if (!writer_) throw std::logic_error("append to finalized sink");
  writer_->write(value);
  ++count_;
}

std::size_t JsonlSink::count() const {
  std::lock_guard lock(mu_);
  return count_;
}

void JsonlSink::finalize() {
  std::lock_guard lock(mu_);
  if (!writer_) return;
  writer_->close();
  writer_.reset();

  std::vector<std::pair<std::string, std::string>> lines;
  LineReader reader(path_);
  std::string line;
  while (reader.next(line)) {
    auto j = parse_line(line, reader.line_number());
    std::string id = j.is_object() && j.contains("id") && j["id"].is_string()
                         ? j["id"].get<std::string>()
                         : std::string();
    lines.emplace_back(std::move(id), line);
  }
  std::stable_sort(lines.begin(), lines.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  JsonlWriter out(path_);
  for (const auto& [id, text] : lines) out.write_line(text);
  out.close();
}

// ---- samples ---------------------------------------------------------------

OrderedJson encode(const GroundingSample& s) {
  OrderedJson j;
  j["id"] = s.id;
  j["instruction"] = s.instruction;
  j["bbox"] = {s.bbox.x_min(), s.bbox.y_min(), s.bbox.x_max(), s.bbox.y_max()};
  OrderedJson shot;
  shot["uri"] = s.screenshot.uri;
  shot["width_px"] = s.screenshot.width_px;
  shot["height_px"] = s.screenshot.height_px;
  j["screenshot"] = std::move(shot);
  j["platform"] = std::string(to_string(s.platform));
  j["element_kind"] = std::string(to_string(s.element_kind));
  j["source"] = s.source;
  if (s.category) j["category"] = *s.category;
  return j;
}

GroundingSample decode_sample(const Json& j, std::size_t line) {
  GroundingSample s;
  s.id = require_string(j, "id", line);
  s.instruction = require_string(j, "instruction", line);
  const auto& shot = require(j, "screenshot", line);
  s.screenshot.uri = require_string(shot, "uri", line);
  s.screenshot.width_px = require_int(shot, "width_px", line);
  s.screenshot.height_px = require_int(shot, "height_px", line);
  const auto platform = parse_platform(require_string(j, "platform", line));
  if (!platform) schema_error(line, "platform must be mobile|desktop|web");
  s.platform = *platform;
  const auto kind = parse_element_kind(require_string(j, "element_kind", line));
  if (!kind) schema_error(line, "element_kind must be text|icon_widget");
  s.element_kind = *kind;
  s.source = require_string(j, "source", line);
  if (j.contains("category")) s.category = require_string(j, "category", line);

  if (s.id.empty()) invariant_error(line, "empty id");
  if (s.instruction.empty()) invariant_error(line, "empty instruction");

  const bool has_norm = j.contains("bbox");
  const bool has_px = j.contains("bbox_px");
  if (!has_norm && !has_px) schema_error(line, "missing field 'bbox'");
  try {
    s.screenshot.validate();
    std::optional<NormBBox> from_px;
    if (has_px) {
      const auto& v = require(j, "bbox_px", line);
      if (!v.is_array() || v.size() != 4 ||
          !std::all_of(v.begin(), v.end(),
                       [](const Json& e) { return e.is_number_integer(); })) {
        schema_error(line, "'bbox_px' must be an array of 4 integers");
      }
      from_px = normalize_bbox({v[0].get<std::int64_t>(), v[1].get<std::int64_t>(),
                                v[2].get<std::int64_t>(), v[3].get<std::int64_t>()},
                               s.screenshot);
    }
    if (has_norm) {
      const auto b = require_numbers<4>(j, "bbox", line);
      s.bbox = NormBBox(b[0], b[1], b[2], b[3]);
      if (from_px) {
        const auto& p = *from_px;
        const double diff = std::max(
            {std::abs(p.x_min() - s.bbox.x_min()), std::abs(p.y_min() - s.bbox.y_min()),
             std::abs(p.x_max() - s.bbox.x_max()), std::abs(p.y_max() - s.bbox.y_max())});
        if (diff > 1e-6) {
          invariant_error(line, fmt::format("'bbox' and 'bbox_px' disagree by {}", diff));
        }
      }
    } else {
      s.bbox = *from_px;
    }
  } catch (const GeometryError& e) {
    invariant_error(line, e.what());
  }
  return s;
}

SampleReader::SampleReader(const std::filesystem::path& path) : lines_(path) {}

std::optional<GroundingSample> SampleReader::next() {
  std::string line;
  while (lines_.next(line)) {
    if (blank(line)) continue;
    const auto n = lines_.line_number();
    auto sample = decode_sample(parse_line(line, n), n);
    auto it = std::lower_bound(seen_ids_.begin(), seen_ids_.end(), sample.id);
    if (it != seen_ids_.end() && *it == sample.id) {
      invariant_error(n, fmt::format("duplicate id '{}'", sample.id));
    }
    seen_ids_.insert(it, sample.id);
    return sample;
  }
  return std::nullopt;
}

std::vector<GroundingSample> read_samples(const std::filesystem::path& path) {
  SampleReader reader(path);
  std::vector<GroundingSample> out;
  while (auto s = reader.next()) out.push_back(std::move(*s));
  return out;
}

// ---- training records ------------------------------------------------------

std::string_view to_string(TrainingClass c) {
  return c == TrainingClass::kSlow ? "slow" : "fast";
}

void validate(const TrainingRecord& r, std::size_t line) {
  Chain chain = [&] {
    try {
      return parse_chain(r.completion);
    } catch (const ChainParseError& e) {
      invariant_error(line, fmt::format("completion does not parse: {}", e.what()));
    }
  }();
  const bool slow = is_slow(chain);
  if (slow != (r.cls == TrainingClass::kSlow)) {
    invariant_error(line, fmt::format("class '{}' does not match a {} chain",
                                      to_string(r.cls), slow ? "slow" : "fast"));
  }
  int expected_stage = 1;
  if (const auto* s = std::get_if<SlowChain>(&chain)) {
    expected_stage = s->focus ? 3 : 2;
  }
  if (r.metadata.stage != expected_stage) {
    invariant_error(line, fmt::format("stage {} does not match chain shape (expected {})",
                                      r.metadata.stage, expected_stage));
  }
}

OrderedJson encode(const TrainingRecord& r) {
  OrderedJson j;
  j["id"] = r.id;
  j["prompt"] = r.prompt;
  j["completion"] = r.completion;
  j["class"] = std::string(to_string(r.cls));
  OrderedJson meta;
  meta["source"] = r.metadata.source;
  meta["platform"] = std::string(to_string(r.metadata.platform));
  meta["element_kind"] = std::string(to_string(r.metadata.element_kind));
  meta["verified_point"] = {r.metadata.verified_point.x(),
                            r.metadata.verified_point.y()};
  meta["stage"] = r.metadata.stage;
  j["metadata"] = std::move(meta);
  return j;
}

TrainingRecord decode_training_record(const Json& j, std::size_t line) {
  TrainingRecord r;
  r.id = require_string(j, "id", line);
  r.prompt = require_string(j, "prompt", line);
  r.completion = require_string(j, "completion", line);
  const auto cls = require_string(j, "class", line);
  if (cls == "fast") {
    r.cls = TrainingClass::kFast;
  } else if (cls == "slow") {
    r.cls = TrainingClass::kSlow;
  } else {
    schema_error(line, "class must be fast|slow");
  }
  const auto& meta = require(j, "metadata", line);
  r.metadata.source = require_string(meta, "source", line);
  const auto platform = parse_platform(require_string(meta, "platform", line));
  if (!platform) schema_error(line, "platform must be mobile|desktop|web");
  r.metadata.platform = *platform;
  const auto kind = parse_element_kind(require_string(meta, "element_kind", line));
  if (!kind) schema_error(line, "element_kind must be text|icon_widget");
  r.metadata.element_kind = *kind;
  const auto p = require_numbers<2>(meta, "verified_point", line);
  try {
    r.metadata.verified_point = NormPoint(p[0], p[1]);
  } catch (const GeometryError& e) {
    invariant_error(line, e.what());
  }
  r.metadata.stage = static_cast<int>(require_int(meta, "stage", line));
  validate(r, line);
  return r;
}

std::vector<TrainingRecord> read_training_records(const std::filesystem::path& path) {
  LineReader reader(path);
  std::vector<TrainingRecord> out;
  std::string line;
  while (reader.next(line)) {
    if (blank(line)) continue;
    const auto n = reader.line_number();
    out.push_back(decode_training_record(parse_line(line, n), n));
  }
  return out;
}

// ---- stats -----------------------------------------------------------------

const StatsRow* DatasetStats::find(const std::string& source) const {
  for (const auto& row : rows) {
    if (row.source == source) return &row;
  }
  return nullptr;
}

DatasetStats& DatasetStats::operator+=(const DatasetStats& other) {
  for (const auto& o : other.rows) {
    auto it = std::find_if(rows.begin(), rows.end(),
                           [&](const StatsRow& r) { return r.source == o.source; });
    if (it == rows.end()) {
      rows.push_back(o);
    } else {
      it->total += o.total;
      it->slow_count += o.slow_count;
      it->fast_count += o.fast_count;
    }
  }
  totals.total += other.totals.total;
  totals.slow_count += other.totals.slow_count;
  totals.fast_count += other.totals.fast_count;
  return *this;
}

DatasetStats compute_stats(std::span<const TrainingRecord> records) {
  DatasetStats stats;
  for (const auto& r : records) {
    auto it = std::find_if(stats.rows.begin(), stats.rows.end(), [&](const StatsRow& row) {
      return row.source == r.metadata.source;
    });
    if (it == stats.rows.end()) {
      stats.rows.push_back({r.metadata.source});
      it = std::prev(stats.rows.end());
    }
    ++it->total;
    ++stats.totals.total;
    if (r.cls == TrainingClass::kSlow) {
      ++it->slow_count;
      ++stats.totals.slow_count;
    } else {
      ++it->fast_count;
      ++stats.totals.fast_count;
    }
  }
  return stats;
}

std::string format_count(std::size_t n, bool compact) {
  if (!compact || n < 1000) return std::to_string(n);
  return fmt::format("{}K", (n + 500) / 1000);
}

std::string render_stats_table(const DatasetStats& stats, bool compact) {
  std::vector<std::array<std::string, 4>> cells;
  cells.push_back({"Source", "Number", "#S_Num", "#F_Num"});
  auto add = [&](const StatsRow& r) {
    cells.push_back({r.source, format_count(r.total, compact),
                     format_count(r.slow_count, compact),
                     format_count(r.fast_count, compact)});
  };
  for (const auto& r : stats.rows) add(r);
  add(stats.totals);

  std::array<std::size_t, 4> width{};
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < 4; ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& row = cells[i];
    out += fmt::format("{:<{}}  {:>{}}  {:>{}}  {:>{}}\n", row[0], width[0], row[1],
                       width[1], row[2], width[2], row[3], width[3]);
    if (i == 0 || i + 2 == cells.size()) {
      out += std::string(width[0] + width[1] + width[2] + width[3] + 6, '-') + '\n';
    }
  }
  return out;
}

OrderedJson encode(const DatasetStats& stats) {
  auto row_json = [](const StatsRow& r) {
    OrderedJson j;
    j["source"] = r.source;
    j["total"] = r.total;
    j["slow_count"] = r.slow_count;
    j["fast_count"] = r.fast_count;
    return j;
  };
  OrderedJson j;
  j["rows"] = OrderedJson::array();
  for (const auto& r : stats.rows) j["rows"].push_back(row_json(r));
  j["totals"] = row_json(stats.totals);
  return j;
}

}  // namespace dualground
