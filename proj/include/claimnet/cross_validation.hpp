#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "claimnet/csv.hpp"
#include "claimnet/dataset.hpp"
#include "claimnet/logistic.hpp"
#include "claimnet/metrics.hpp"

namespace claimnet {

struct CvSpec {
  std::vector<std::size_t> feature_columns;  // empty means all columns
  bool apply_smote = true;
  double smote_target_ratio = 0.15;
  int smote_k = 5;
  LogisticOptions logistic;
};

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;
};

struct CvResult {
  std::vector<MetricsReport> fold_reports;
  MetricSummary auroc, aupr, tdl;
};

namespace detail {

inline MetricSummary summarize(const std::vector<double>& v) {
  MetricSummary s;
  s.mean = mean(v);
  s.stddev = stddev(v, s.mean);
  return s;
}

}  // namespace detail

// Stratified k-fold cross-validation. SMOTE and standardization are fit
// inside each training fold only; the validation fold is scored untouched.
// RNG streams are split per fold from the master seed, so results do not
// depend on evaluation order.
inline CvResult cross_validate(const Dataset& ds, int folds, const CvSpec& spec, std::uint64_t seed) {
  Rng master(seed);
  Rng fold_rng = master.split(0);
  const auto fold_indices = stratified_folds(ds.targets(), folds, fold_rng);
  validate_fold_partition(fold_indices, ds.n_rows());

  const std::vector<std::size_t> cols = spec.feature_columns.empty() ? ds.all_columns() : spec.feature_columns;

  CvResult result;
  std::vector<double> aurocs, auprs, tdls;
  for (std::size_t f = 0; f < fold_indices.size(); ++f) {
    std::vector<std::size_t> train_idx;
    for (std::size_t g = 0; g < fold_indices.size(); ++g) {
      if (g == f) continue;
      train_idx.insert(train_idx.end(), fold_indices[g].begin(), fold_indices[g].end());
    }
    std::sort(train_idx.begin(), train_idx.end());

    // restrict to the modeled feature set first, so SMOTE distances and the
    // fit both see exactly those columns
    Dataset train = ds.subset(train_idx).with_columns(cols);
    Dataset valid = ds.subset(fold_indices[f]).with_columns(cols);

    if (spec.apply_smote) {
      Rng smote_rng = master.split(100 + f);
      SmoteOptions opts;
      opts.target_minority_ratio = spec.smote_target_ratio;
      opts.k_neighbors = spec.smote_k;
      train = smote(train, opts, smote_rng).data;
    }

    const ModelFit fit = fit_logistic(train, spec.logistic);
    const auto scores = fit.predict(valid);
    MetricsReport report = compute_metrics(scores, valid.targets());
    aurocs.push_back(report.auroc);
    auprs.push_back(report.aupr);
    tdls.push_back(report.tdl);
    result.fold_reports.push_back(std::move(report));
  }

  result.auroc = detail::summarize(aurocs);
  result.aupr = detail::summarize(auprs);
  result.tdl = detail::summarize(tdls);
  return result;
}

/// `fold,auroc,aupr,tdl` per-fold metrics.
inline void write_cv_metrics_csv(const std::string& path, const CvResult& cv) {
  CsvWriter w(path);
  w.write_row({"fold", "auroc", "aupr", "tdl"});
  for (std::size_t f = 0; f < cv.fold_reports.size(); ++f) {
    const auto& r = cv.fold_reports[f];
    w.write_row({std::to_string(f), format_double(r.auroc), format_double(r.aupr), format_double(r.tdl)});
  }
  w.close();
}

}  // namespace claimnet
