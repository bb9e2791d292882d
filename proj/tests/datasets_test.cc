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

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "clipbound/errors.h"

namespace clipbound {
namespace {

namespace fs = std::filesystem;

fs::path TempDir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("clipbound_" + name);
  fs::create_directories(p);
  return p;
}

TEST(GenBimodalTest, ExactPointMasses) {
  Rng r(1);
  const Dataset ds = GenBimodal(10, 0.6, 0.0, 1.0, 0.0, r);
  ASSERT_EQ(ds.size(), 10);
  ASSERT_EQ(ds.dim(), 1);
  int zeros = 0, ones = 0;
  for (Index i = 0; i < 10; ++i) {
    if (ds.features(i, 0) == 0.0) ++zeros;
    if (ds.features(i, 0) == 1.0) ++ones;
    EXPECT_EQ(ds.labels[i], ds.features(i, 0) == 1.0 ? 1 : 0);
  }
  EXPECT_EQ(zeros, 6);
  EXPECT_EQ(ones, 4);
  EXPECT_DOUBLE_EQ(ds.features.col(0).mean(), 0.4);
}

TEST(GenBimodalTest, JitteredMean) {
  Rng r(2);
  const Dataset ds = GenBimodal(10000, 0.6, 0.0, 1.0, 0.05, r);
  EXPECT_NEAR(ds.features.col(0).mean(), 0.4, 0.02);
}

TEST(GenBimodalTest, Errors) {
  Rng r(1);
  EXPECT_THROW(GenBimodal(0, 0.6, 0, 1, 0, r), ParameterError);
  EXPECT_THROW(GenBimodal(10, 1.0, 0, 1, 0, r), ParameterError);
  EXPECT_THROW(GenBimodal(10, 0.6, 0, 1, -1, r), ParameterError);
}

Dataset Labelled(const std::vector<int>& labels, int k) {
  Dataset ds;
  ds.num_classes = k;
  ds.labels = labels;
  ds.features.resize(static_cast<Index>(labels.size()), 1);
  for (Index i = 0; i < ds.size(); ++i) ds.features(i, 0) = static_cast<double>(i);
  return ds;
}

TEST(SkewClassTest, KeepsFloorFractionAndOrder) {
  std::vector<int> labels;
  for (int i = 0; i < 100; ++i) labels.push_back(i % 2);
  const Dataset ds = Labelled(labels, 2);
  Rng r(3);
  const Dataset out = SkewClass(ds, 1, 0.25, r);
  const auto counts = out.ClassCounts();
  EXPECT_EQ(counts[0], 50);
  EXPECT_EQ(counts[1], 12);
  for (Index i = 1; i < out.size(); ++i) {
    EXPECT_LT(out.features(i - 1, 0), out.features(i, 0));
  }
  // Surviving rows keep their features and labels.
  for (Index i = 0; i < out.size(); ++i) {
    const auto src = static_cast<std::size_t>(out.features(i, 0));
    EXPECT_EQ(out.labels[i], labels[src]);
  }
}

TEST(SkewClassTest, SingleClassQuarter) {
  const Dataset ds = Labelled(std::vector<int>(100, 0), 1);
  Rng r(4);
  const Dataset out = SkewClass(ds, 0, 0.25, r);
  EXPECT_EQ(out.size(), 25);
  for (int y : out.labels) EXPECT_EQ(y, 0);
}

TEST(SkewClassTest, IdentityAndAbsentClass) {
  const Dataset ds = Labelled({0, 0, 2, 2}, 3);
  Rng r(5);
  EXPECT_EQ(SkewClass(ds, 0, 1.0, r).features, ds.features);
  bool absent = false;
  const Dataset same = SkewClass(ds, 1, 0.5, r, &absent);
  EXPECT_TRUE(absent);
  EXPECT_EQ(same.size(), 4);
  EXPECT_THROW(SkewClass(ds, 0, 0.0, r), ParameterError);
}

Dataset Grouped(const std::vector<int>& sizes) {
  std::vector<int> labels, groups;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    for (int i = 0; i < sizes[g]; ++i) {
      labels.push_back(i % 2);
      groups.push_back(static_cast<int>(g));
    }
  }
  Dataset ds = Labelled(labels, 2);
  ds.groups = groups;
  ds.num_groups = static_cast<int>(sizes.size());
  return ds;
}

TEST(BalanceByAttributeTest, MinimumGroupSize) {
  Rng r(6);
  auto counts = BalanceByAttribute(Grouped({100, 60}), r).GroupCounts();
  EXPECT_EQ(counts, (std::vector<Index>{60, 60}));
  counts = BalanceByAttribute(Grouped({50, 50}), r).GroupCounts();
  EXPECT_EQ(counts, (std::vector<Index>{50, 50}));
  counts = BalanceByAttribute(Grouped({90, 60, 30}), r).GroupCounts();
  EXPECT_EQ(counts, (std::vector<Index>{30, 30, 30}));
  EXPECT_THROW(BalanceByAttribute(Labelled({0, 1}, 2), r), ParameterError);
}

TEST(GenSkewedClassificationTest, Counts) {
  Rng r(7);
  const Dataset ds = GenSkewedClassification(1000, 2, 1, 0.1, 4.0, 2, r);
  EXPECT_EQ(ds.ClassCounts(), (std::vector<Index>{1000, 100}));
  Rng r2(7);
  const Dataset bal = GenSkewedClassification(50, 3, 0, 1.0, 4.0, 2, r2);
  EXPECT_EQ(bal.ClassCounts(), (std::vector<Index>{50, 50, 50}));
  EXPECT_THROW(GenSkewedClassification(10, 2, 0, 1.5, 4.0, 2, r),
               ParameterError);
  EXPECT_THROW(GenSkewedClassification(10, 1, 0, 0.5, 4.0, 2, r),
               ParameterError);
}

TEST(BlobMeansTest, PairwiseSeparation) {
  Rng r(8);
  for (int k : {3, 12}) {
    const Matrix m = BlobMeans(k, 4.0, 5, r);
    if (k <= 5) {
      for (int a = 0; a < k; ++a) {
        for (int b = a + 1; b < k; ++b) {
          EXPECT_NEAR((m.row(a) - m.row(b)).norm(), 4.0, 1e-12);
        }
      }
    } else {
      for (int a = 0; a < k; ++a) EXPECT_NEAR(m.row(a).norm(), 2.0, 1e-12);
    }
  }
}

TEST(IdxTest, RoundTrip) {
  const fs::path dir = TempDir("idx");
  Matrix pixels(3, 4);
  pixels << 0, 1, 0.5019607843137255, 1,  //
      0, 0, 0, 0,                          //
      1, 1, 1, 0.2;
  // Values representable as byte / 255 survive exactly.
  for (Index i = 0; i < pixels.size(); ++i) {
    pixels.data()[i] = std::round(pixels.data()[i] * 255.0) / 255.0;
  }
  WriteIdxImages(dir / "img", pixels, 2, 2);
  WriteIdxLabels(dir / "lab", {3, 0, 9});
  const Dataset ds = LoadIdx(dir / "img", dir / "lab");
  EXPECT_EQ(ds.features, pixels);
  EXPECT_EQ(ds.labels, (std::vector<int>{3, 0, 9}));
  EXPECT_EQ(ds.num_classes, 10);
  EXPECT_EQ(LoadIdxImages(dir / "img")(0, 1), 1.0);
}

TEST(IdxTest, HeaderDimensions) {
  const fs::path dir = TempDir("idx_dims");
  WriteIdxImages(dir / "img", Matrix::Zero(2, 28 * 28), 28, 28);
  std::ifstream in(dir / "img", std::ios::binary);
  unsigned char h[16];
  in.read(reinterpret_cast<char*>(h), 16);
  EXPECT_EQ(h[0], 0);
  EXPECT_EQ(h[1], 0);
  EXPECT_EQ(h[2], 8);
  EXPECT_EQ(h[3], 3);
  EXPECT_EQ(LoadIdxImages(dir / "img").cols(), 784);
}

TEST(IdxTest, Errors) {
  const fs::path dir = TempDir("idx_err");
  WriteIdxImages(dir / "img", Matrix::Zero(2, 4), 2, 2);
  WriteIdxLabels(dir / "lab3", {1, 2, 3});
  // Image magic in a label position.
  EXPECT_THROW(LoadIdxLabels(dir / "img"), FormatError);
  EXPECT_THROW(LoadIdx(dir / "img", dir / "lab3"), FormatError);
  // Truncated payload.
  {
    std::ifstream in(dir / "img", std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    std::ofstream out(dir / "short", std::ios::binary);
    out << bytes.substr(0, bytes.size() - 1);
  }
  EXPECT_THROW(LoadIdxImages(dir / "short"), FormatError);
  EXPECT_THROW(LoadIdxImages(dir / "missing"), FormatError);
}

TEST(CsvTest, QuotesAndTrim) {
  const CsvTable t = ParseCsv("a, b ,c\n1,\"x, y\", 3 \n");
  EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b", "c"}));
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0], (std::vector<std::string>{"1", "x, y", "3"}));
  EXPECT_THROW(ParseCsv("a,b\n1\n"), FormatError);
}

const char* kAdultHeader =
    "age,workclass,fnlwgt,education,education-num,marital-status,occupation,"
    "relationship,race,sex,capital-gain,capital-loss,hours-per-week,"
    "native-country,income\n";

TEST(AdultTest, EncodingRules) {
  const std::string csv =
      std::string(kAdultHeader) +
      "39,State-gov,77516,Bachelors,13,Never-married,Adm-clerical,"
      "Not-in-family,White,Male,2174,0,40,United-States,<=50K\n"
      "50,Private,83311,Bachelors,13,Married,Exec-managerial,Husband,Black,"
      "Female,0,0,13,United-States,>50K\n"
      "38,?,215646,HS-grad,9,Divorced,Handlers-cleaners,Not-in-family,"
      "Asian-Pac-Islander,Male,0,0,40,United-States,<=50K.\n"
      "28,Private,338409,HS-grad,9,Married,Prof-specialty,Wife,"
      "Amer-Indian-Eskimo,Female,0,0,40,Cuba,>50K.\n";
  const CsvTable table = ParseCsv(csv);
  const TabularEncoder enc = TabularEncoder::Fit(table, AdultSchema());
  Index dropped = 0;
  const Dataset ds = enc.Apply(table, &dropped);
  EXPECT_EQ(dropped, 1);  // the row with a missing workclass
  ASSERT_EQ(ds.size(), 3);
  EXPECT_EQ(ds.labels, (std::vector<int>{0, 1, 1}));
  EXPECT_EQ(ds.groups, (std::vector<int>{1, 0, 0}));
  EXPECT_EQ(ds.num_groups, 2);

  const auto& names = enc.feature_names();
  for (const auto& n : names) EXPECT_EQ(n.find("fnlwgt"), std::string::npos);
  const auto race = std::find(names.begin(), names.end(), "race") - names.begin();
  ASSERT_LT(race, static_cast<long>(names.size()));
  EXPECT_EQ(ds.features(0, race), 1.0);  // White
  EXPECT_EQ(ds.features(1, race), 0.0);  // Black -> non-white
  EXPECT_EQ(ds.features(2, race), 0.0);

  // capital-loss is constant: standardized to zeros.
  const auto loss = std::find(names.begin(), names.end(), "capital-loss") - names.begin();
  for (Index i = 0; i < ds.size(); ++i) EXPECT_EQ(ds.features(i, loss), 0.0);
  // Numeric columns have zero mean on the fitted rows.
  const auto age = std::find(names.begin(), names.end(), "age") - names.begin();
  EXPECT_NEAR(ds.features.col(age).mean(), 0.0, 1e-12);

  // One-hot blocks sum to one per row.
  for (const std::string col : {"workclass", "education", "native-country"}) {
    for (Index i = 0; i < ds.size(); ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < names.size(); ++j) {
        if (names[j].rfind(col + "=", 0) == 0) sum += ds.features(i, j);
      }
      EXPECT_EQ(sum, 1.0) << col;
    }
  }
  EXPECT_TRUE(ds.features.allFinite());
}

TEST(AdultTest, UnknownLevelNamesColumn) {
  const std::string train = std::string(kAdultHeader) +
                            "39,State-gov,1,Bachelors,13,Never-married,"
                            "Adm-clerical,Not-in-family,White,Male,0,0,40,"
                            "United-States,<=50K\n";
  const std::string test = std::string(kAdultHeader) +
                           "39,Self-emp,1,Bachelors,13,Never-married,"
                           "Adm-clerical,Not-in-family,White,Male,0,0,40,"
                           "United-States,<=50K\n";
  const TabularEncoder enc = TabularEncoder::Fit(ParseCsv(train), AdultSchema());
  try {
    enc.Apply(ParseCsv(test));
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("workclass"), std::string::npos);
  }
}

TEST(DutchTest, OccupationCodes) {
  const std::string csv =
      "sex,age,household_position,household_size,prev_residence_place,"
      "citizenship,country_birth,edu_level,economic_status,cur_eco_activity,"
      "Marital_status,occupation\n"
      "1,5,1131,112,1,1,1,3,111,135,1,4\n"
      "2,6,1131,112,1,1,1,4,111,135,2,2\n"
      "2,7,1131,112,1,1,1,4,111,135,2,3\n"
      "1,2,1131,112,1,1,1,4,111,135,2,1\n"
      "1,8,1131,112,1,1,1,4,120,135,2,5\n";
  Index dropped = 0;
  const Dataset ds = PreprocessTabular(ParseCsv(csv), DutchSchema(), &dropped);
  ASSERT_EQ(ds.size(), 2);
  EXPECT_EQ(dropped, 3);  // occupation 3, underage, economic status 120
  EXPECT_EQ(ds.labels, (std::vector<int>{0, 1}));
  EXPECT_EQ(ds.groups, (std::vector<int>{1, 0}));
}

TEST(SchemaTest, Validation) {
  TabularSchema s;
  s.columns.push_back({.name = "a", .kind = ColumnKind::kNumeric});
  EXPECT_THROW(s.Validate(), ParameterError);
  s.columns.push_back({.name = "y", .kind = ColumnKind::kTarget, .ids = {{"0", 0}}});
  EXPECT_NO_THROW(s.Validate());
  s.columns.push_back({.name = "y2", .kind = ColumnKind::kTarget, .ids = {{"0", 0}}});
  EXPECT_THROW(s.Validate(), ParameterError);
}

TEST(DatasetTest, ValidateCatchesBadLabels) {
  Dataset ds = Labelled({0, 1, 2}, 2);
  EXPECT_THROW(ds.Validate(), ParameterError);
  ds.num_classes = 3;
  EXPECT_NO_THROW(ds.Validate());
  ds.features(0, 0) = std::nan("");
  EXPECT_THROW(ds.Validate(), ParameterError);
}

}  // namespace
}  // namespace clipbound
