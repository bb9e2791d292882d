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

#ifndef CLIPBOUND_DATASETS_H_
#define CLIPBOUND_DATASETS_H_

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "clipbound/numkit.h"

namespace clipbound {

// Features (n x d), labels in [0, num_classes), optional protected groups in
// [0, num_groups).
struct Dataset {
  Matrix features;
  std::vector<int> labels;
  std::vector<int> groups;  // empty when no protected attribute
  int num_classes = 0;
  int num_groups = 0;

  Index size() const { return features.rows(); }
  Index dim() const { return features.cols(); }
  bool has_groups() const { return !groups.empty(); }

  // Throws ParameterError if the documented invariants do not hold.
  void Validate() const;

  // Rows at `indices`, in the given order.
  Dataset Select(const std::vector<Index>& indices) const;

  std::vector<Index> ClassCounts() const;
  std::vector<Index> GroupCounts() const;
};

// Two point clouds on the real line: floor(p_major * n) samples at
// mode_lo + N(0, jitter^2) with label 0, the rest at mode_hi with label 1.
Dataset GenBimodal(Index n, double p_major, double mode_lo, double mode_hi,
                   double jitter_std, Rng& rng);

// Keeps floor(keep_fraction * count) samples of `class_id`, chosen without
// replacement; other rows untouched and relative order preserved. When the
// class is absent the dataset is returned unchanged and `*class_absent` (if
// given) is set.
Dataset SkewClass(const Dataset& ds, int class_id, double keep_fraction,
                  Rng& rng, bool* class_absent = nullptr);

// Subsamples every protected group to the size of the smallest one.
Dataset BalanceByAttribute(const Dataset& ds, Rng& rng);

// Isotropic Gaussian blobs, one per class. Class means are placed so that
// every pair is `cluster_separation` apart (scaled basis vectors when
// K <= d; random directions at radius separation / 2 otherwise), then
// `minority_class` is subsampled with SkewClass.
Dataset GenSkewedClassification(Index n_per_class, int num_classes,
                                int minority_class, double keep_fraction,
                                double cluster_separation, Index dim,
                                Rng& rng);

// Same generator with an explicit class-mean matrix (num_classes x dim);
// lets train and test splits share their means.
Dataset GenBlobs(Index n_per_class, const Matrix& class_means, Rng& rng);
Matrix BlobMeans(int num_classes, double cluster_separation, Index dim,
                 Rng& rng);

// --- IDX (MNIST / Fashion-MNIST) ---------------------------------------

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

// n x (rows * cols) matrix of pixels scaled to [0, 1].
Matrix LoadIdxImages(const std::filesystem::path& path);
std::vector<int> LoadIdxLabels(const std::filesystem::path& path);

// Pairs an image file with its label file; throws FormatError on a count
// mismatch. num_classes is max(label) + 1.
Dataset LoadIdx(const std::filesystem::path& images,
                const std::filesystem::path& labels);

// Writes pixels (expected in [0, 1], rounded to bytes) / labels as IDX.
void WriteIdxImages(const std::filesystem::path& path, const Matrix& pixels,
                    int rows, int cols);
void WriteIdxLabels(const std::filesystem::path& path,
                    const std::vector<int>& labels);

// --- Tabular -------------------------------------------------------------

enum class ColumnKind {
  kNumeric,      // standardized
  kCategorical,  // one-hot, levels in lexicographic order
  kBinary,       // 1 if the (relabelled) value is in `positive`, else 0
  kDrop,
  kTarget,
  kProtected,
};

struct ColumnRule {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  // Level rewriting applied before encoding: value -> new value. When
  // `other_level` is set, values absent from `relabel` become `other_level`.
  std::map<std::string, std::string> relabel;
  std::optional<std::string> other_level;
  // Rows whose raw value is in this set are removed before anything else.
  std::set<std::string> drop_values;
  // kBinary: levels mapped to 1.
  std::set<std::string> positive;
  // kTarget / kProtected: level -> integer id. For kTarget, unmapped levels
  // drop the row when `drop_unmapped` is set and are an error otherwise.
  std::map<std::string, int> ids;
  bool drop_unmapped = false;
  // kNumeric: rows whose value is below this are removed.
  std::optional<double> min_value;
};

struct TabularSchema {
  std::vector<ColumnRule> columns;
  // Raw cell values treated as missing (row dropped).
  std::set<std::string> missing_tokens = {"", "?", "NA", "nan"};

  void Validate() const;
  const ColumnRule* Find(const std::string& name) const;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Comma-separated, header row first, double quotes for fields containing
// commas. Cells are trimmed of surrounding whitespace.
CsvTable ReadCsv(const std::filesystem::path& path);
CsvTable ParseCsv(const std::string& text);

// Standardization statistics and one-hot vocabularies fitted on a training
// table; Apply() reuses them on any other table with the same header.
class TabularEncoder {
 public:
  static TabularEncoder Fit(const CsvTable& train, const TabularSchema& schema);

  // Rows dropped by filters or missing values are counted in
  // `*dropped_rows` when given.
  Dataset Apply(const CsvTable& table, Index* dropped_rows = nullptr) const;

  const std::vector<std::string>& feature_names() const {
    return feature_names_;
  }

 private:
  struct Encoded {
    const ColumnRule* rule = nullptr;
    Index source_column = -1;
    double mean = 0.0;
    double scale = 1.0;
    std::vector<std::string> levels;  // kCategorical
  };

  std::vector<std::size_t> KeptRows(const CsvTable& table,
                                    Index* dropped_rows) const;

  TabularSchema schema_;
  std::vector<std::string> header_;
  std::vector<Encoded> encoded_;
  Index target_column_ = -1;
  Index protected_column_ = -1;
  int num_classes_ = 0;
  int num_groups_ = 0;
  std::vector<std::string> feature_names_;
};

// Fit on `rows` and encode them in one pass.
Dataset PreprocessTabular(const CsvTable& rows, const TabularSchema& schema,
                          Index* dropped_rows = nullptr);

// Adult census income: drops fnlwgt, collapses race to white (1) /
// non-white (0), target income >50K -> 1, protected sex (Female 0, Male 1).
TabularSchema AdultSchema();

// Dutch census: drops weight, underage rows and unemployed rows; occupation
// codes {4, 5, 9} -> 0 (low-level), {1, 2} -> 1 (high-level), everything
// else dropped; protected sex. Column names follow the common
// dutch_census_2001 export and can be edited after construction.
TabularSchema DutchSchema();

}  // namespace clipbound

#endif  // CLIPBOUND_DATASETS_H_
