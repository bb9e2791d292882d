// Copyright 2026 The Clipbound Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "clipbound/datasets.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <boost/tokenizer.hpp>

#include "clipbound/errors.h"

namespace clipbound {

void Dataset::Validate() const {
  const auto n = static_cast<std::size_t>(features.rows());
  if (labels.size() != n) {
    throw ParameterError("dataset: labels length does not match rows");
  }
  if (!groups.empty() && groups.size() != n) {
    throw ParameterError("dataset: groups length does not match rows");
  }
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw ParameterError("dataset: label " + std::to_string(y) +
                           " outside [0, " + std::to_string(num_classes) +
                           ")");
    }
  }
  for (int g : groups) {
    if (g < 0 || g >= num_groups) {
      throw ParameterError("dataset: group id outside [0, num_groups)");
    }
  }
  if (!features.allFinite()) {
    throw ParameterError("dataset: non-finite feature value");
  }
}

Dataset Dataset::Select(const std::vector<Index>& indices) const {
  Dataset out;
  out.num_classes = num_classes;
  out.num_groups = num_groups;
  out.features.resize(static_cast<Index>(indices.size()), features.cols());
  out.labels.reserve(indices.size());
  if (has_groups()) out.groups.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const Index i = indices[r];
    out.features.row(static_cast<Index>(r)) = features.row(i);
    out.labels.push_back(labels[i]);
    if (has_groups()) out.groups.push_back(groups[i]);
  }
  return out;
}

std::vector<Index> Dataset::ClassCounts() const {
  std::vector<Index> counts(num_classes, 0);
  for (int y : labels) ++counts[y];
  return counts;
}

std::vector<Index> Dataset::GroupCounts() const {
  std::vector<Index> counts(num_groups, 0);
  for (int g : groups) ++counts[g];
  return counts;
}

Dataset GenBimodal(Index n, double p_major, double mode_lo, double mode_hi,
                   double jitter_std, Rng& rng) {
  if (n <= 0) throw ParameterError("gen_bimodal: n must be positive");
  if (!(p_major > 0.0 && p_major < 1.0)) {
    throw ParameterError("gen_bimodal: p_major must lie in (0, 1)");
  }
  if (!(jitter_std >= 0.0)) {
    throw ParameterError("gen_bimodal: jitter_std must be >= 0");
  }
  const auto n_major =
      static_cast<Index>(std::floor(p_major * static_cast<double>(n)));
  Dataset ds;
  ds.num_classes = 2;
  ds.features.resize(n, 1);
  ds.labels.resize(n);
  for (Index i = 0; i < n; ++i) {
    const bool major = i < n_major;
    const double jitter = jitter_std > 0.0 ? rng.Normal(0.0, jitter_std) : 0.0;
    ds.features(i, 0) = (major ? mode_lo : mode_hi) + jitter;
    ds.labels[i] = major ? 0 : 1;
  }
  return ds;
}

Dataset SkewClass(const Dataset& ds, int class_id, double keep_fraction,
                  Rng& rng, bool* class_absent) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw ParameterError("skew_class: keep_fraction must lie in (0, 1]");
  }
  if (class_id < 0 || class_id >= ds.num_classes) {
    throw ParameterError("skew_class: class_id outside [0, K)");
  }
  std::vector<Index> members;
  for (Index i = 0; i < ds.size(); ++i) {
    if (ds.labels[i] == class_id) members.push_back(i);
  }
  if (class_absent != nullptr) *class_absent = members.empty();
  if (members.empty() || keep_fraction == 1.0) return ds;

  const auto keep = static_cast<std::size_t>(
      std::floor(keep_fraction * static_cast<double>(members.size())));
  std::shuffle(members.begin(), members.end(), rng.engine());
  std::vector<char> drop(ds.size(), 0);
  for (std::size_t j = keep; j < members.size(); ++j) drop[members[j]] = 1;

  std::vector<Index> kept;
  kept.reserve(ds.size());
  for (Index i = 0; i < ds.size(); ++i) {
    if (!drop[i]) kept.push_back(i);
  }
  return ds.Select(kept);
}

Dataset BalanceByAttribute(const Dataset& ds, Rng& rng) {
  if (!ds.has_groups() || ds.num_groups < 2) {
    throw ParameterError(
        "balance_by_attribute: dataset needs at least two protected groups");
  }
  std::vector<std::vector<Index>> members(ds.num_groups);
  for (Index i = 0; i < ds.size(); ++i) members[ds.groups[i]].push_back(i);
  std::size_t target = members.front().size();
  for (const auto& m : members) target = std::min(target, m.size());

  std::vector<char> keep(ds.size(), 0);
  for (auto& m : members) {
    std::shuffle(m.begin(), m.end(), rng.engine());
    for (std::size_t j = 0; j < target; ++j) keep[m[j]] = 1;
  }
  std::vector<Index> kept;
  for (Index i = 0; i < ds.size(); ++i) {
    if (keep[i]) kept.push_back(i);
  }
  return ds.Select(kept);
}

Matrix BlobMeans(int num_classes, double cluster_separation, Index dim,
                 Rng& rng) {
  Matrix means = Matrix::Zero(num_classes, dim);
  if (num_classes <= dim) {
    // Scaled standard basis: pairwise distance sep.
    const double scale = cluster_separation / std::sqrt(2.0);
    for (int k = 0; k < num_classes; ++k) means(k, k) = scale;
  } else {
    for (int k = 0; k < num_classes; ++k) {
      Vector u = GaussianVector(dim, 1.0, rng);
      const double norm = u.norm();
      if (norm > 0.0) u /= norm;
      means.row(k) = (0.5 * cluster_separation) * u.transpose();
    }
  }
  return means;
}

Dataset GenBlobs(Index n_per_class, const Matrix& class_means, Rng& rng) {
  const auto num_classes = static_cast<int>(class_means.rows());
  const Index dim = class_means.cols();
  Dataset ds;
  ds.num_classes = num_classes;
  ds.features.resize(n_per_class * num_classes, dim);
  ds.labels.resize(n_per_class * num_classes);
  Index row = 0;
  for (Index i = 0; i < n_per_class; ++i) {
    for (int k = 0; k < num_classes; ++k, ++row) {
      ds.features.row(row) =
          class_means.row(k) + GaussianVector(dim, 1.0, rng).transpose();
      ds.labels[row] = k;
    }
  }
  return ds;
}

Dataset GenSkewedClassification(Index n_per_class, int num_classes,
                                int minority_class, double keep_fraction,
                                double cluster_separation, Index dim,
                                Rng& rng) {
  if (num_classes < 2) {
    throw ParameterError("gen_skewed_classification: need K >= 2");
  }
  if (dim < 1) throw ParameterError("gen_skewed_classification: need d >= 1");
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw ParameterError(
        "gen_skewed_classification: keep_fraction must lie in (0, 1]");
  }
  Rng mean_rng = rng.Split("means");
  const Matrix means =
      BlobMeans(num_classes, cluster_separation, dim, mean_rng);
  Rng sample_rng = rng.Split("samples");
  Dataset ds = GenBlobs(n_per_class, means, sample_rng);
  Rng skew_rng = rng.Split("skew");
  return SkewClass(ds, minority_class, keep_fraction, skew_rng);
}

// --- IDX -------------------------------------------------------------------

namespace {

std::vector<unsigned char> ReadAll(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t ReadBigEndian32(const std::vector<unsigned char>& bytes,
                              std::size_t offset,
                              const std::filesystem::path& path) {
  if (offset + 4 > bytes.size()) {
    throw FormatError("truncated IDX header in " + path.string());
  }
  return (std::uint32_t{bytes[offset]} << 24) |
         (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) |
         std::uint32_t{bytes[offset + 3]};
}

void WriteBigEndian32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b = {static_cast<char>((v >> 24) & 0xff),
                                 static_cast<char>((v >> 16) & 0xff),
                                 static_cast<char>((v >> 8) & 0xff),
                                 static_cast<char>(v & 0xff)};
  out.write(b.data(), 4);
}

std::string Hex(std::uint32_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

}  // namespace

Matrix LoadIdxImages(const std::filesystem::path& path) {
  const auto bytes = ReadAll(path);
  const std::uint32_t magic = ReadBigEndian32(bytes, 0, path);
  if (magic != kIdxImageMagic) {
    throw FormatError("bad IDX image magic " + Hex(magic) + " in " +
                      path.string());
  }
  const std::size_t n = ReadBigEndian32(bytes, 4, path);
  const std::size_t rows = ReadBigEndian32(bytes, 8, path);
  const std::size_t cols = ReadBigEndian32(bytes, 12, path);
  const std::size_t pixels = rows * cols;
  if (bytes.size() - 16 < n * pixels) {
    throw FormatError("truncated IDX image payload in " + path.string());
  }
  Matrix out(static_cast<Index>(n), static_cast<Index>(pixels));
  const unsigned char* p = bytes.data() + 16;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < pixels; ++j) {
      out(static_cast<Index>(i), static_cast<Index>(j)) = *p++ / 255.0;
    }
  }
  return out;
}

std::vector<int> LoadIdxLabels(const std::filesystem::path& path) {
  const auto bytes = ReadAll(path);
  const std::uint32_t magic = ReadBigEndian32(bytes, 0, path);
  if (magic != kIdxLabelMagic) {
    throw FormatError("bad IDX label magic " + Hex(magic) + " in " +
                      path.string());
  }
  const std::size_t n = ReadBigEndian32(bytes, 4, path);
  if (bytes.size() - 8 < n) {
    throw FormatError("truncated IDX label payload in " + path.string());
  }
  return {bytes.begin() + 8, bytes.begin() + 8 + static_cast<long>(n)};
}

Dataset LoadIdx(const std::filesystem::path& images,
                const std::filesystem::path& labels) {
  Dataset ds;
  ds.features = LoadIdxImages(images);
  ds.labels = LoadIdxLabels(labels);
  if (static_cast<Index>(ds.labels.size()) != ds.features.rows()) {
    throw FormatError("IDX image/label count mismatch: " +
                      std::to_string(ds.features.rows()) + " images vs " +
                      std::to_string(ds.labels.size()) + " labels");
  }
  int max_label = -1;
  for (int y : ds.labels) max_label = std::max(max_label, y);
  ds.num_classes = max_label + 1;
  return ds;
}

void WriteIdxImages(const std::filesystem::path& path, const Matrix& pixels,
                    int rows, int cols) {
  if (pixels.cols() != static_cast<Index>(rows) * cols) {
    throw ParameterError("write_idx: pixel matrix width != rows * cols");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  WriteBigEndian32(out, kIdxImageMagic);
  WriteBigEndian32(out, static_cast<std::uint32_t>(pixels.rows()));
  WriteBigEndian32(out, static_cast<std::uint32_t>(rows));
  WriteBigEndian32(out, static_cast<std::uint32_t>(cols));
  for (Index i = 0; i < pixels.rows(); ++i) {
    for (Index j = 0; j < pixels.cols(); ++j) {
      const double v = std::clamp(pixels(i, j), 0.0, 1.0);
      out.put(static_cast<char>(std::lround(v * 255.0)));
    }
  }
}

void WriteIdxLabels(const std::filesystem::path& path,
                    const std::vector<int>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  WriteBigEndian32(out, kIdxLabelMagic);
  WriteBigEndian32(out, static_cast<std::uint32_t>(labels.size()));
  for (int y : labels) out.put(static_cast<char>(y));
}

// --- Tabular ---------------------------------------------------------------

void TabularSchema::Validate() const {
  int targets = 0;
  int protecteds = 0;
  std::set<std::string> names;
  for (const auto& c : columns) {
    if (!names.insert(c.name).second) {
      throw ParameterError("schema: duplicate column '" + c.name + "'");
    }
    if (c.kind == ColumnKind::kTarget) ++targets;
    if (c.kind == ColumnKind::kProtected) ++protecteds;
    if ((c.kind == ColumnKind::kTarget || c.kind == ColumnKind::kProtected) &&
        c.ids.empty()) {
      throw ParameterError("schema: column '" + c.name +
                           "' needs an id mapping");
    }
  }
  if (targets != 1) {
    throw ParameterError("schema: exactly one target column required");
  }
  if (protecteds > 1) {
    throw ParameterError("schema: at most one protected column allowed");
  }
}

const ColumnRule* TabularSchema::Find(const std::string& name) const {
  for (const auto& c : columns) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;
  std::vector<std::string> cells;
  try {
    Tokenizer tok(line, boost::escaped_list_separator<char>('\\', ',', '"'));
    for (const auto& cell : tok) cells.push_back(Trim(cell));
  } catch (const boost::escaped_list_error& e) {
    throw FormatError(std::string("malformed CSV line: ") + e.what());
  }
  return cells;
}

std::string Relabel(const ColumnRule& rule, const std::string& raw) {
  if (auto it = rule.relabel.find(raw); it != rule.relabel.end()) {
    return it->second;
  }
  if (rule.other_level) return *rule.other_level;
  return raw;
}

double ParseNumber(const std::string& s, const std::string& column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError("column '" + column + "': non-numeric value '" + s +
                      "'");
  }
}

}  // namespace

CsvTable ParseCsv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    auto cells = SplitCsvLine(line);
    if (first) {
      table.header = std::move(cells);
      first = false;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw FormatError("CSV line " + std::to_string(line_no) + " has " +
                        std::to_string(cells.size()) + " cells, header has " +
                        std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (first) throw FormatError("CSV input has no header row");
  return table;
}

CsvTable ReadCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseCsv(ss.str());
}

std::vector<std::size_t> TabularEncoder::KeptRows(const CsvTable& table,
                                                  Index* dropped_rows) const {
  if (table.header != header_) {
    throw FormatError("tabular: header differs from the fitted table");
  }
  std::vector<std::size_t> kept;
  Index dropped = 0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    bool keep = true;
    for (std::size_t c = 0; c < header_.size() && keep; ++c) {
      const ColumnRule* rule = schema_.Find(header_[c]);
      if (rule == nullptr || rule->kind == ColumnKind::kDrop) continue;
      const std::string& v = row[c];
      if (schema_.missing_tokens.count(v) || rule->drop_values.count(v)) {
        keep = false;
      } else if (rule->kind == ColumnKind::kTarget && rule->drop_unmapped &&
                 !rule->ids.count(Relabel(*rule, v))) {
        keep = false;
      } else if (rule->kind == ColumnKind::kNumeric && rule->min_value &&
                 ParseNumber(v, rule->name) < *rule->min_value) {
        keep = false;
      }
    }
    if (keep) {
      kept.push_back(r);
    } else {
      ++dropped;
    }
  }
  if (dropped_rows != nullptr) *dropped_rows = dropped;
  return kept;
}

TabularEncoder TabularEncoder::Fit(const CsvTable& train,
                                   const TabularSchema& schema) {
  schema.Validate();
  TabularEncoder enc;
  enc.schema_ = schema;
  enc.header_ = train.header;
  for (const auto& rule : schema.columns) {
    if (rule.kind == ColumnKind::kDrop) continue;
    if (std::find(train.header.begin(), train.header.end(), rule.name) ==
        train.header.end()) {
      throw FormatError("schema column '" + rule.name +
                        "' missing from the CSV header");
    }
  }
  for (const auto& name : train.header) {
    if (enc.schema_.Find(name) == nullptr) {
      throw FormatError("CSV column '" + name + "' has no schema rule");
    }
  }
  const auto kept = enc.KeptRows(train, nullptr);

  for (std::size_t c = 0; c < enc.header_.size(); ++c) {
    const ColumnRule* rule = enc.schema_.Find(enc.header_[c]);
    switch (rule->kind) {
      case ColumnKind::kDrop:
        break;
      case ColumnKind::kTarget: {
        enc.target_column_ = static_cast<Index>(c);
        int max_id = 0;
        for (const auto& [level, id] : rule->ids) max_id = std::max(max_id, id);
        enc.num_classes_ = max_id + 1;
        break;
      }
      case ColumnKind::kProtected: {
        enc.protected_column_ = static_cast<Index>(c);
        int max_id = 0;
        for (const auto& [level, id] : rule->ids) max_id = std::max(max_id, id);
        enc.num_groups_ = max_id + 1;
        break;
      }
      case ColumnKind::kNumeric: {
        Encoded e{rule, static_cast<Index>(c)};
        double sum = 0.0;
        double sq = 0.0;
        for (auto r : kept) {
          const double v = ParseNumber(train.rows[r][c], rule->name);
          sum += v;
          sq += v * v;
        }
        const double n = std::max<double>(1.0, static_cast<double>(kept.size()));
        e.mean = sum / n;
        const double var = std::max(0.0, sq / n - e.mean * e.mean);
        const double std = std::sqrt(var);
        e.scale = std > 1e-12 ? std : 1.0;
        enc.feature_names_.push_back(rule->name);
        enc.encoded_.push_back(std::move(e));
        break;
      }
      case ColumnKind::kBinary: {
        enc.feature_names_.push_back(rule->name);
        enc.encoded_.push_back(Encoded{rule, static_cast<Index>(c)});
        break;
      }
      case ColumnKind::kCategorical: {
        Encoded e{rule, static_cast<Index>(c)};
        std::set<std::string> levels;
        for (auto r : kept) levels.insert(Relabel(*rule, train.rows[r][c]));
        e.levels.assign(levels.begin(), levels.end());
        for (const auto& level : e.levels) {
          enc.feature_names_.push_back(rule->name + "=" + level);
        }
        enc.encoded_.push_back(std::move(e));
        break;
      }
    }
  }
  return enc;
}

Dataset TabularEncoder::Apply(const CsvTable& table,
                              Index* dropped_rows) const {
  const auto kept = KeptRows(table, dropped_rows);
  Dataset ds;
  ds.num_classes = num_classes_;
  ds.num_groups = protected_column_ >= 0 ? num_groups_ : 0;
  ds.features = Matrix::Zero(static_cast<Index>(kept.size()),
                             static_cast<Index>(feature_names_.size()));
  ds.labels.reserve(kept.size());

  const ColumnRule* target = schema_.Find(header_[target_column_]);
  const ColumnRule* prot =
      protected_column_ >= 0 ? schema_.Find(header_[protected_column_]) : nullptr;

  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto& row = table.rows[kept[i]];
    const auto r = static_cast<Index>(i);
    Index col = 0;
    for (const auto& e : encoded_) {
      const std::string& raw = row[e.source_column];
      switch (e.rule->kind) {
        case ColumnKind::kNumeric:
          ds.features(r, col++) =
              (ParseNumber(raw, e.rule->name) - e.mean) / e.scale;
          break;
        case ColumnKind::kBinary:
          ds.features(r, col++) =
              e.rule->positive.count(Relabel(*e.rule, raw)) ? 1.0 : 0.0;
          break;
        case ColumnKind::kCategorical: {
          const std::string level = Relabel(*e.rule, raw);
          const auto it =
              std::lower_bound(e.levels.begin(), e.levels.end(), level);
          if (it == e.levels.end() || *it != level) {
            throw FormatError("column '" + e.rule->name +
                              "': unknown categorical level '" + level + "'");
          }
          ds.features(r, col + (it - e.levels.begin())) = 1.0;
          col += static_cast<Index>(e.levels.size());
          break;
        }
        default:
          break;
      }
    }
    const std::string y = Relabel(*target, row[target_column_]);
    const auto yt = target->ids.find(y);
    if (yt == target->ids.end()) {
      throw FormatError("column '" + target->name + "': unmapped target '" +
                        y + "'");
    }
    ds.labels.push_back(yt->second);
    if (prot != nullptr) {
      const std::string g = Relabel(*prot, row[protected_column_]);
      const auto gt = prot->ids.find(g);
      if (gt == prot->ids.end()) {
        throw FormatError("column '" + prot->name +
                          "': unmapped protected value '" + g + "'");
      }
      ds.groups.push_back(gt->second);
    }
  }
  return ds;
}

Dataset PreprocessTabular(const CsvTable& rows, const TabularSchema& schema,
                          Index* dropped_rows) {
  return TabularEncoder::Fit(rows, schema).Apply(rows, dropped_rows);
}

TabularSchema AdultSchema() {
  TabularSchema s;
  auto numeric = [](std::string name) {
    return ColumnRule{.name = std::move(name), .kind = ColumnKind::kNumeric};
  };
  auto categorical = [](std::string name) {
    return ColumnRule{.name = std::move(name), .kind = ColumnKind::kCategorical};
  };
  s.columns.push_back(numeric("age"));
  s.columns.push_back(categorical("workclass"));
  s.columns.push_back(ColumnRule{.name = "fnlwgt", .kind = ColumnKind::kDrop});
  s.columns.push_back(categorical("education"));
  s.columns.push_back(numeric("education-num"));
  s.columns.push_back(categorical("marital-status"));
  s.columns.push_back(categorical("occupation"));
  s.columns.push_back(categorical("relationship"));
  s.columns.push_back(ColumnRule{.name = "race",
                                 .kind = ColumnKind::kBinary,
                                 .relabel = {{"White", "white"}},
                                 .other_level = "non-white",
                                 .positive = {"white"}});
  s.columns.push_back(ColumnRule{.name = "sex",
                                 .kind = ColumnKind::kProtected,
                                 .ids = {{"Female", 0}, {"Male", 1}}});
  s.columns.push_back(numeric("capital-gain"));
  s.columns.push_back(numeric("capital-loss"));
  s.columns.push_back(numeric("hours-per-week"));
  s.columns.push_back(categorical("native-country"));
  s.columns.push_back(ColumnRule{
      .name = "income",
      .kind = ColumnKind::kTarget,
      .ids = {{"<=50K", 0}, {"<=50K.", 0}, {">50K", 1}, {">50K.", 1}}});
  return s;
}

TabularSchema DutchSchema() {
  TabularSchema s;
  auto categorical = [](std::string name) {
    return ColumnRule{.name = std::move(name), .kind = ColumnKind::kCategorical};
  };
  s.columns.push_back(ColumnRule{.name = "sex",
                                 .kind = ColumnKind::kProtected,
                                 .ids = {{"2", 0}, {"1", 1}}});
  // Age is banded; bands 1-3 cover the population under 15.
  ColumnRule age = categorical("age");
  age.drop_values = {"1", "2", "3"};
  s.columns.push_back(age);
  for (const char* name :
       {"household_position", "household_size", "prev_residence_place",
        "citizenship", "country_birth", "edu_level", "cur_eco_activity",
        "Marital_status"}) {
    s.columns.push_back(categorical(name));
  }
  ColumnRule status = categorical("economic_status");
  status.drop_values = {"unemployed", "120"};
  s.columns.push_back(status);
  s.columns.push_back(ColumnRule{.name = "weight", .kind = ColumnKind::kDrop});
  s.columns.push_back(ColumnRule{.name = "occupation",
                                 .kind = ColumnKind::kTarget,
                                 .ids = {{"4", 0},
                                         {"5", 0},
                                         {"9", 0},
                                         {"5_4_9", 0},
                                         {"1", 1},
                                         {"2", 1},
                                         {"2_1", 1}},
                                 .drop_unmapped = true});
  return s;
}

}  // namespace clipbound
