#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "claimnet/error.hpp"
#include "claimnet/labels.hpp"
#include "claimnet/random.hpp"
#include "claimnet/stats.hpp"

namespace claimnet {

enum class FeatureGroup : std::uint8_t { Intrinsic = 0, Score = 1, Neighborhood = 2 };

inline constexpr const char* to_string(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::Intrinsic: return "intrinsic";
    case FeatureGroup::Score: return "score";
    case FeatureGroup::Neighborhood: return "neighborhood";
  }
  return "?";
}

// Feature matrix with a binary target, named columns and per-column group
// tags. Row-major storage; rows carry external ids so datasets stay joinable
// and auditable.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<std::string> feature_names, std::vector<FeatureGroup> groups)
      : feature_names_(std::move(feature_names)), groups_(std::move(groups)) {
    if (feature_names_.size() != groups_.size()) {
      throw DataError("feature names and group tags differ in length");
    }
  }

  void add_row(std::string row_id, std::span<const double> features, int target) {
    if (features.size() != feature_names_.size()) {
      throw DataError("row '" + row_id + "' has " + std::to_string(features.size()) +
                      " features, expected " + std::to_string(feature_names_.size()));
    }
    if (target != 0 && target != 1) throw DataError("target must be 0/1");
    for (double v : features) {
      if (!std::isfinite(v)) throw DataError("row '" + row_id + "' contains a non-finite feature value");
    }
    row_ids_.push_back(std::move(row_id));
    x_.insert(x_.end(), features.begin(), features.end());
    y_.push_back(target);
  }

  std::size_t n_rows() const { return y_.size(); }
  std::size_t n_features() const { return feature_names_.size(); }

  std::span<const double> row(std::size_t r) const {
    return {x_.data() + r * n_features(), n_features()};
  }
  double at(std::size_t r, std::size_t c) const { return x_[r * n_features() + c]; }
  void set(std::size_t r, std::size_t c, double v) { x_[r * n_features() + c] = v; }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(n_rows());
    for (std::size_t r = 0; r < n_rows(); ++r) out[r] = at(r, c);
    return out;
  }

  const std::vector<int>& targets() const { return y_; }
  int target(std::size_t r) const { return y_[r]; }
  const std::string& row_id(std::size_t r) const { return row_ids_[r]; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<FeatureGroup>& groups() const { return groups_; }
  FeatureGroup group(std::size_t c) const { return groups_[c]; }

  std::size_t feature_index(std::string_view name) const {
    for (std::size_t c = 0; c < feature_names_.size(); ++c) {
      if (feature_names_[c] == name) return c;
    }
    throw DataError("unknown feature '" + std::string(name) + "'");
  }

  std::vector<std::size_t> columns_in_group(FeatureGroup g) const {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < groups_.size(); ++c) {
      if (groups_[c] == g) out.push_back(c);
    }
    return out;
  }

  std::vector<std::size_t> all_columns() const {
    std::vector<std::size_t> out(n_features());
    std::iota(out.begin(), out.end(), 0);
    return out;
  }

  std::size_t positives() const {
    std::size_t n = 0;
    for (int v : y_) n += v == 1;
    return n;
  }

  /// Which class is the minority (1 wins ties, matching the fraud targets).
  int minority_class() const {
    const std::size_t pos = positives();
    return pos <= n_rows() - pos ? 1 : 0;
  }

  /// Always recomputed from the current rows.
  double minority_ratio() const {
    if (n_rows() == 0) return 0.0;
    const std::size_t pos = positives();
    return static_cast<double>(std::min(pos, n_rows() - pos)) / static_cast<double>(n_rows());
  }

  Dataset subset(std::span<const std::size_t> rows) const {
    Dataset d(feature_names_, groups_);
    for (std::size_t r : rows) d.add_row(row_ids_.at(r), row(r), y_.at(r));
    return d;
  }

  Dataset with_columns(std::span<const std::size_t> cols) const {
    std::vector<std::string> names;
    std::vector<FeatureGroup> groups;
    for (std::size_t c : cols) {
      names.push_back(feature_names_.at(c));
      groups.push_back(groups_.at(c));
    }
    Dataset d(std::move(names), std::move(groups));
    std::vector<double> tmp(cols.size());
    for (std::size_t r = 0; r < n_rows(); ++r) {
      for (std::size_t k = 0; k < cols.size(); ++k) tmp[k] = at(r, cols[k]);
      d.add_row(row_ids_[r], tmp, y_[r]);
    }
    return d;
  }

 private:
  std::vector<std::string> feature_names_;
  std::vector<FeatureGroup> groups_;
  std::vector<std::string> row_ids_;
  std::vector<double> x_;
  std::vector<int> y_;
};

/// y_known = 1 iff the claim was investigated (fraud or non-fraud label);
/// y_fraud = 1 iff the claim has a fraud label.
inline std::pair<std::vector<int>, std::vector<int>> make_targets(std::span<const ClaimLabel> labels) {
  std::vector<int> y_known(labels.size()), y_fraud(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    y_known[i] = labels[i] != ClaimLabel::Unknown;
    y_fraud[i] = labels[i] == ClaimLabel::Fraud;
  }
  return {std::move(y_known), std::move(y_fraud)};
}

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Class-stratified train/test split: each class contributes
/// round(test_fraction * class_size) rows to the test side, so the class
/// ratios stay within one instance of the original.
inline SplitIndices stratified_split_indices(std::span<const int> y, double test_fraction, Rng& rng) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < y.size(); ++i) (y[i] == 1 ? pos : neg).push_back(i);
  if (pos.size() < 2 || neg.size() < 2) {
    throw DataError("degenerate class: both classes need at least 2 rows to split");
  }

  SplitIndices out;
  for (auto* cls : {&pos, &neg}) {
    rng.shuffle(*cls);
    const auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(cls->size())));
    for (std::size_t k = 0; k < cls->size(); ++k) {
      (k < n_test ? out.test : out.train).push_back((*cls)[k]);
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

struct Split {
  Dataset train;
  Dataset test;
  SplitIndices indices;
};

inline Split stratified_split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  Rng rng(seed);
  SplitIndices idx = stratified_split_indices(ds.targets(), test_fraction, rng);
  return Split{ds.subset(idx.train), ds.subset(idx.test), std::move(idx)};
}

/// Stratified k folds: shuffled class members are dealt round-robin, so fold
/// sizes differ by at most one per class.
inline std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> y, int k, Rng& rng) {
  if (k < 2) throw ConfigError("need at least 2 folds");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < y.size(); ++i) (y[i] == 1 ? pos : neg).push_back(i);
  if (pos.size() < static_cast<std::size_t>(k) || neg.size() < static_cast<std::size_t>(k)) {
    throw DataError("degenerate fold: each class needs at least one row per fold");
  }
  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  for (auto* cls : {&pos, &neg}) {
    rng.shuffle(*cls);
    for (std::size_t i = 0; i < cls->size(); ++i) {
      folds[i % static_cast<std::size_t>(k)].push_back((*cls)[i]);
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

/// Leakage guard: folds must partition [0, n) with no overlap.
inline void validate_fold_partition(const std::vector<std::vector<std::size_t>>& folds, std::size_t n) {
  std::vector<std::uint8_t> seen(n, 0);
  std::size_t total = 0;
  for (const auto& fold : folds) {
    for (std::size_t i : fold) {
      if (i >= n) throw DataError("fold index out of range");
      if (seen[i]) throw DataError("leakage: row " + std::to_string(i) + " appears in two folds");
      seen[i] = 1;
      ++total;
    }
  }
  if (total != n) throw DataError("folds do not cover every row");
}

struct SmoteOptions {
  double target_minority_ratio = 0.15;
  int k_neighbors = 5;
  // Oversample pair: first grow the minority by this factor, then undersample
  // the majority to hit the target ratio. If even the whole majority is too
  // small for that pair, the minority is grown further instead.
  double oversample_factor = 2.0;
  std::optional<double> fixed_interpolation = std::nullopt;  // pins u (tests)
};

struct SmoteInfo {
  std::size_t minority_before = 0, majority_before = 0;
  std::size_t synthetic_rows = 0, majority_kept = 0;
  double achieved_ratio = 0.0;
  bool applied = false;
};

struct SmoteResult {
  Dataset data;
  SmoteInfo info;
};

// SMOTE rebalancing: synthetic minority rows are convex combinations
// x + u * (nn - x) with nn one of the k nearest minority neighbours
// (Euclidean distance on z-standardized features), the majority is randomly
// undersampled to reach the target ratio.
inline SmoteResult smote(const Dataset& ds, const SmoteOptions& opts, Rng& rng) {
  if (!(opts.target_minority_ratio > 0.0 && opts.target_minority_ratio < 0.5)) {
    throw ConfigError("target minority ratio must lie in (0, 0.5)");
  }
  if (opts.k_neighbors < 1) throw ConfigError("smote needs k >= 1");

  const int minority = ds.minority_class();
  std::vector<std::size_t> min_rows, maj_rows;
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    (ds.target(r) == minority ? min_rows : maj_rows).push_back(r);
  }
  SmoteInfo info;
  info.minority_before = min_rows.size();
  info.majority_before = maj_rows.size();

  if (min_rows.size() < static_cast<std::size_t>(opts.k_neighbors) + 1) {
    throw DataError("too few minority rows for smote: need at least k+1 = " +
                    std::to_string(opts.k_neighbors + 1));
  }
  if (ds.minority_ratio() >= opts.target_minority_ratio) {
    SmoteResult res{ds, info};
    res.info.majority_kept = maj_rows.size();
    res.info.achieved_ratio = ds.minority_ratio();
    return res;
  }

  const double t = opts.target_minority_ratio;
  std::size_t n_min_new = static_cast<std::size_t>(std::llround(opts.oversample_factor * static_cast<double>(min_rows.size())));
  n_min_new = std::max(n_min_new, min_rows.size());
  std::size_t n_maj_new = static_cast<std::size_t>(std::llround(static_cast<double>(n_min_new) * (1.0 - t) / t));
  if (n_maj_new > maj_rows.size()) {
    // the majority cannot be undersampled "up"; oversample further instead
    n_maj_new = maj_rows.size();
    n_min_new = static_cast<std::size_t>(std::llround(static_cast<double>(n_maj_new) * t / (1.0 - t)));
    n_min_new = std::max(n_min_new, min_rows.size());
  }
  const std::size_t n_synth = n_min_new - min_rows.size();

  // standardization for the distance metric only
  const std::size_t p = ds.n_features();
  std::vector<double> mu(p, 0.0), sd(p, 1.0);
  for (std::size_t c = 0; c < p; ++c) {
    const auto col = ds.column(c);
    mu[c] = mean(col);
    const double s = stddev(col, mu[c]);
    sd[c] = s > 0.0 ? s : 1.0;
  }
  auto dist2 = [&](std::size_t a, std::size_t b) {
    double acc = 0.0;
    for (std::size_t c = 0; c < p; ++c) {
      const double d = (ds.at(a, c) - ds.at(b, c)) / sd[c];
      acc += d * d;
    }
    return acc;
  };

  // k nearest minority neighbours of every minority row
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(opts.k_neighbors), min_rows.size() - 1);
  std::vector<std::vector<std::size_t>> nn(min_rows.size());
  std::vector<std::pair<double, std::size_t>> cand;
  for (std::size_t a = 0; a < min_rows.size(); ++a) {
    cand.clear();
    for (std::size_t b = 0; b < min_rows.size(); ++b) {
      if (b == a) continue;
      cand.emplace_back(dist2(min_rows[a], min_rows[b]), min_rows[b]);
    }
    std::sort(cand.begin(), cand.end());
    nn[a].reserve(k);
    for (std::size_t i = 0; i < k; ++i) nn[a].push_back(cand[i].second);
  }

  Dataset out(ds.feature_names(), ds.groups());
  for (std::size_t r : min_rows) out.add_row(ds.row_id(r), ds.row(r), ds.target(r));
  std::vector<double> synth(p);
  for (std::size_t s = 0; s < n_synth; ++s) {
    const std::size_t a = rng.uniform_index(min_rows.size());
    const std::size_t b = nn[a][rng.uniform_index(nn[a].size())];
    const double u = opts.fixed_interpolation ? *opts.fixed_interpolation : rng.uniform();
    for (std::size_t c = 0; c < p; ++c) {
      synth[c] = ds.at(min_rows[a], c) + u * (ds.at(b, c) - ds.at(min_rows[a], c));
    }
    out.add_row("synthetic_" + std::to_string(s), synth, minority);
  }
  std::vector<std::size_t> maj_shuffled = maj_rows;
  rng.shuffle(maj_shuffled);
  for (std::size_t i = 0; i < n_maj_new; ++i) {
    out.add_row(ds.row_id(maj_shuffled[i]), ds.row(maj_shuffled[i]), ds.target(maj_shuffled[i]));
  }

  info.synthetic_rows = n_synth;
  info.majority_kept = n_maj_new;
  info.achieved_ratio = out.minority_ratio();
  info.applied = true;
  return SmoteResult{std::move(out), info};
}

}  // namespace claimnet
