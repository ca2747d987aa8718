#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

using namespace claimnet;

namespace {

Dataset two_feature_dataset(std::size_t n_minority, std::size_t n_majority, Rng& rng,
                            double minority_center = 5.0) {
  std::vector<std::string> names = {"f1", "f2"};
  Dataset ds(names, std::vector<FeatureGroup>(2, FeatureGroup::Intrinsic));
  for (std::size_t r = 0; r < n_majority; ++r) {
    const double row[2] = {rng.normal(), rng.normal()};
    ds.add_row("maj" + std::to_string(r), row, 0);
  }
  for (std::size_t r = 0; r < n_minority; ++r) {
    const double row[2] = {minority_center + rng.normal(), minority_center + rng.normal()};
    ds.add_row("min" + std::to_string(r), row, 1);
  }
  return ds;
}

// is `point` on the segment between `a` and `b` (within eps)?
bool on_segment(std::span<const double> point, std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, len2 = 0.0;
  for (std::size_t c = 0; c < point.size(); ++c) {
    dot += (point[c] - a[c]) * (b[c] - a[c]);
    len2 += (b[c] - a[c]) * (b[c] - a[c]);
  }
  if (len2 == 0.0) {
    for (std::size_t c = 0; c < point.size(); ++c) {
      if (std::abs(point[c] - a[c]) > 1e-9) return false;
    }
    return true;
  }
  const double u = dot / len2;
  if (u < -1e-9 || u > 1.0 + 1e-9) return false;
  for (std::size_t c = 0; c < point.size(); ++c) {
    if (std::abs(point[c] - (a[c] + u * (b[c] - a[c]))) > 1e-9) return false;
  }
  return true;
}

}  // namespace

TEST(MakeTargets, DefinitionsFromLabels) {
  const std::vector<ClaimLabel> labels = {ClaimLabel::Fraud, ClaimLabel::NonFraud, ClaimLabel::Unknown};
  const auto [y_known, y_fraud] = make_targets(labels);
  EXPECT_EQ(y_known, (std::vector<int>{1, 1, 0}));
  EXPECT_EQ(y_fraud, (std::vector<int>{1, 0, 0}));

  const std::vector<ClaimLabel> all_unknown(4, ClaimLabel::Unknown);
  EXPECT_EQ(make_targets(all_unknown).first, std::vector<int>(4, 0));

  const std::vector<ClaimLabel> all_fraud(3, ClaimLabel::Fraud);
  const auto [k2, f2] = make_targets(all_fraud);
  EXPECT_EQ(k2, std::vector<int>(3, 1));
  EXPECT_EQ(f2, std::vector<int>(3, 1));
}

TEST(StratifiedSplit, ExactCountsAtRoundFractions) {
  Rng rng(1);
  const Dataset ds = two_feature_dataset(10, 90, rng);
  const Split split = stratified_split(ds, 0.30, 7);
  EXPECT_EQ(split.test.n_rows(), 30u);
  EXPECT_EQ(split.train.n_rows(), 70u);
  EXPECT_EQ(split.test.positives(), 3u);
  EXPECT_EQ(split.train.positives(), 7u);
}

TEST(StratifiedSplit, RoundingRuleForAwkwardCounts) {
  Rng rng(2);
  const Dataset ds = two_feature_dataset(7, 93, rng);
  const Split split = stratified_split(ds, 0.30, 7);
  // round(0.3 * 7) = 2 positives; round(0.3 * 93) = 28 negatives
  EXPECT_EQ(split.test.positives(), 2u);
  EXPECT_EQ(split.test.n_rows(), 30u);
}

TEST(StratifiedSplit, DeterministicUnderSeed) {
  Rng rng(3);
  const Dataset ds = two_feature_dataset(20, 80, rng);
  const Split a = stratified_split(ds, 0.25, 99);
  const Split b = stratified_split(ds, 0.25, 99);
  EXPECT_EQ(a.indices.test, b.indices.test);
  const Split c = stratified_split(ds, 0.25, 100);
  EXPECT_NE(a.indices.test, c.indices.test);
}

TEST(StratifiedSplit, DegenerateClassThrows) {
  Rng rng(4);
  const Dataset ds = two_feature_dataset(1, 50, rng);
  EXPECT_THROW(stratified_split(ds, 0.30, 1), DataError);
}

TEST(StratifiedFolds, PartitionAndBalance) {
  Rng data_rng(5);
  const Dataset ds = two_feature_dataset(30, 170, data_rng);
  Rng rng(12);
  const auto folds = stratified_folds(ds.targets(), 10, rng);
  validate_fold_partition(folds, ds.n_rows());
  for (const auto& f : folds) {
    std::size_t pos = 0;
    for (std::size_t i : f) pos += ds.target(i) == 1;
    EXPECT_EQ(pos, 3u);
    EXPECT_EQ(f.size(), 20u);
  }
}

TEST(StratifiedFolds, DegenerateFoldThrows) {
  Rng data_rng(6);
  const Dataset ds = two_feature_dataset(5, 100, data_rng);
  Rng rng(7);
  EXPECT_THROW(stratified_folds(ds.targets(), 10, rng), DataError);
}

// leakage-detector self-check: overlapping or incomplete folds must be flagged
TEST(FoldValidation, FlagsOverlapAndGaps) {
  std::vector<std::vector<std::size_t>> overlapping = {{0, 1, 2}, {2, 3}};
  EXPECT_THROW(validate_fold_partition(overlapping, 4), DataError);
  std::vector<std::vector<std::size_t>> gappy = {{0, 1}, {3}};
  EXPECT_THROW(validate_fold_partition(gappy, 4), DataError);
  std::vector<std::vector<std::size_t>> good = {{0, 3}, {1, 2}};
  EXPECT_NO_THROW(validate_fold_partition(good, 4));
}

TEST(Smote, ReachesTargetRatioWithinOneInstance) {
  // the documented pair: 180 of 10000 at 1.8% -> oversample x2 = 360 minority,
  // undersample the majority to 2040; 360 / 2400 = 15% exactly
  Rng data_rng(8);
  const Dataset ds = two_feature_dataset(180, 9820, data_rng);
  Rng rng(80);
  const SmoteResult res = smote(ds, SmoteOptions{}, rng);
  EXPECT_EQ(res.info.synthetic_rows, 180u);
  EXPECT_EQ(res.info.majority_kept, 2040u);
  EXPECT_EQ(res.data.n_rows(), 2400u);
  EXPECT_NEAR(res.data.minority_ratio(), 0.15, 1.0 / res.data.n_rows());
}

TEST(Smote, SyntheticsLieOnNeighborSegments) {
  Rng data_rng(9);
  const Dataset ds = two_feature_dataset(25, 400, data_rng);
  Rng rng(90);
  SmoteOptions opts;
  const SmoteResult res = smote(ds, opts, rng);
  ASSERT_GT(res.info.synthetic_rows, 0u);

  std::vector<std::size_t> minority_rows;
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    if (ds.target(r) == 1) minority_rows.push_back(r);
  }
  for (std::size_t r = 0; r < res.data.n_rows(); ++r) {
    if (res.data.row_id(r).rfind("synthetic_", 0) != 0) continue;
    bool ok = false;
    for (std::size_t a : minority_rows) {
      for (std::size_t b : minority_rows) {
        if (a == b) continue;
        if (on_segment(res.data.row(r), ds.row(a), ds.row(b))) {
          ok = true;
          break;
        }
      }
      if (ok) break;
    }
    EXPECT_TRUE(ok) << "synthetic row " << r << " is off every minority segment";
  }
}

TEST(Smote, ConvexHullBoundsRespected) {
  Rng data_rng(10);
  const Dataset ds = two_feature_dataset(20, 300, data_rng);
  double lo[2] = {1e300, 1e300}, hi[2] = {-1e300, -1e300};
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    if (ds.target(r) != 1) continue;
    for (std::size_t c = 0; c < 2; ++c) {
      lo[c] = std::min(lo[c], ds.at(r, c));
      hi[c] = std::max(hi[c], ds.at(r, c));
    }
  }
  Rng rng(100);
  const SmoteResult res = smote(ds, SmoteOptions{}, rng);
  for (std::size_t r = 0; r < res.data.n_rows(); ++r) {
    if (res.data.row_id(r).rfind("synthetic_", 0) != 0) continue;
    for (std::size_t c = 0; c < 2; ++c) {
      EXPECT_GE(res.data.at(r, c), lo[c] - 1e-9);
      EXPECT_LE(res.data.at(r, c), hi[c] + 1e-9);
    }
  }
}

TEST(Smote, FixedZeroInterpolationDuplicatesOriginals) {
  Rng data_rng(11);
  const Dataset ds = two_feature_dataset(15, 200, data_rng);
  Rng rng(110);
  SmoteOptions opts;
  opts.fixed_interpolation = 0.0;
  const SmoteResult res = smote(ds, opts, rng);
  for (std::size_t r = 0; r < res.data.n_rows(); ++r) {
    if (res.data.row_id(r).rfind("synthetic_", 0) != 0) continue;
    bool is_duplicate = false;
    for (std::size_t a = 0; a < ds.n_rows(); ++a) {
      if (ds.target(a) != 1) continue;
      if (std::equal(ds.row(a).begin(), ds.row(a).end(), res.data.row(r).begin())) {
        is_duplicate = true;
        break;
      }
    }
    EXPECT_TRUE(is_duplicate);
  }
}

TEST(Smote, TooFewMinorityThrows) {
  Rng data_rng(12);
  const Dataset ds = two_feature_dataset(4, 100, data_rng);  // k = 5 needs >= 6
  Rng rng(120);
  EXPECT_THROW(smote(ds, SmoteOptions{}, rng), DataError);
}

TEST(Smote, AlreadyBalancedIsANoOp) {
  Rng data_rng(13);
  const Dataset ds = two_feature_dataset(30, 70, data_rng);  // 30% minority
  Rng rng(130);
  const SmoteResult res = smote(ds, SmoteOptions{}, rng);
  EXPECT_FALSE(res.info.applied);
  EXPECT_EQ(res.data.n_rows(), ds.n_rows());
}

TEST(Smote, MinorityWinsTiesAndMajorityClassIsDetected) {
  // minority can be class 0 as well
  Rng data_rng(14);
  std::vector<std::string> names = {"f1", "f2"};
  Dataset ds(names, std::vector<FeatureGroup>(2, FeatureGroup::Intrinsic));
  for (int r = 0; r < 12; ++r) {
    const double row[2] = {data_rng.normal(), data_rng.normal()};
    ds.add_row("a" + std::to_string(r), row, 0);
  }
  for (int r = 0; r < 200; ++r) {
    const double row[2] = {data_rng.normal() + 3, data_rng.normal()};
    ds.add_row("b" + std::to_string(r), row, 1);
  }
  EXPECT_EQ(ds.minority_class(), 0);
  Rng rng(140);
  const SmoteResult res = smote(ds, SmoteOptions{}, rng);
  EXPECT_GT(res.data.minority_ratio(), 0.13);
}

TEST(CrossValidate, PerfectFeatureGivesAurocOne) {
  std::vector<std::string> names = {"oracle", "noise"};
  Dataset ds(names, std::vector<FeatureGroup>(2, FeatureGroup::Intrinsic));
  Rng rng(15);
  for (int r = 0; r < 400; ++r) {
    const int y = rng.uniform() < 0.2 ? 1 : 0;
    const double row[2] = {static_cast<double>(y), rng.normal()};
    ds.add_row("r" + std::to_string(r), row, y);
  }
  CvSpec spec;
  const CvResult cv = cross_validate(ds, 10, spec, 42);
  EXPECT_EQ(cv.fold_reports.size(), 10u);
  EXPECT_GT(cv.auroc.mean, 0.999);
}

TEST(CrossValidate, PureNoiseStaysNearHalf) {
  std::vector<std::string> names = {"n1", "n2", "n3"};
  Dataset ds(names, std::vector<FeatureGroup>(3, FeatureGroup::Intrinsic));
  Rng rng(16);
  for (int r = 0; r < 2000; ++r) {
    const double row[3] = {rng.normal(), rng.normal(), rng.normal()};
    ds.add_row("r" + std::to_string(r), row, rng.uniform() < 0.15 ? 1 : 0);
  }
  CvSpec spec;
  const CvResult cv = cross_validate(ds, 10, spec, 43);
  EXPECT_NEAR(cv.auroc.mean, 0.5, 0.05);
}

TEST(CrossValidate, DeterministicUnderSeed) {
  std::vector<std::string> names = {"x"};
  Dataset ds(names, {FeatureGroup::Intrinsic});
  Rng rng(17);
  for (int r = 0; r < 300; ++r) {
    const double v = rng.normal();
    ds.add_row("r" + std::to_string(r), std::span<const double>(&v, 1),
               rng.uniform() < 1.0 / (1.0 + std::exp(-v)) ? 1 : 0);
  }
  CvSpec spec;
  const CvResult a = cross_validate(ds, 5, spec, 7);
  const CvResult b = cross_validate(ds, 5, spec, 7);
  for (std::size_t f = 0; f < a.fold_reports.size(); ++f) {
    EXPECT_DOUBLE_EQ(a.fold_reports[f].auroc, b.fold_reports[f].auroc);
    EXPECT_DOUBLE_EQ(a.fold_reports[f].tdl, b.fold_reports[f].tdl);
  }
}

TEST(CrossValidate, MetricsCsvHasTheContractHeader) {
  testsupport::TempDir tmp("cv_csv");
  std::vector<std::string> names = {"x"};
  Dataset ds(names, {FeatureGroup::Intrinsic});
  Rng rng(18);
  for (int r = 0; r < 200; ++r) {
    const double v = rng.normal();
    ds.add_row("r" + std::to_string(r), std::span<const double>(&v, 1), rng.uniform() < 0.3 ? 1 : 0);
  }
  CvSpec spec;
  spec.apply_smote = false;
  const CvResult cv = cross_validate(ds, 4, spec, 9);
  write_cv_metrics_csv(tmp.path("cv.csv"), cv);
  const std::string content = testsupport::slurp(tmp.path("cv.csv"));
  EXPECT_EQ(content.substr(0, 20), "fold,auroc,aupr,tdl\n");
}

TEST(Dataset, RecomputedClassRatioAndValidation) {
  std::vector<std::string> names = {"x"};
  Dataset ds(names, {FeatureGroup::Intrinsic});
  const double v = 1.0;
  ds.add_row("a", std::span<const double>(&v, 1), 1);
  ds.add_row("b", std::span<const double>(&v, 1), 0);
  ds.add_row("c", std::span<const double>(&v, 1), 0);
  EXPECT_NEAR(ds.minority_ratio(), 1.0 / 3.0, 1e-15);

  const double nan_val = std::nan("");
  EXPECT_THROW(ds.add_row("bad", std::span<const double>(&nan_val, 1), 0), DataError);
  EXPECT_THROW(ds.add_row("bad2", std::span<const double>(&v, 1), 2), DataError);
}
