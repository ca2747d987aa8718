#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "claimnet/error.hpp"

namespace claimnet {

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
};

namespace detail {

struct ClassCounts {
  std::size_t pos = 0, neg = 0;
};

inline ClassCounts count_classes(std::span<const int> y) {
  ClassCounts c;
  for (int v : y) {
    if (v == 1) {
      ++c.pos;
    } else if (v == 0) {
      ++c.neg;
    } else {
      throw DataError("targets must be 0/1");
    }
  }
  return c;
}

inline std::vector<std::size_t> order_by_score_desc(std::span<const double> s) {
  std::vector<std::size_t> idx(s.size());
  std::iota(idx.begin(), idx.end(), 0);
  // stable: ties keep input order
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  return idx;
}

}  // namespace detail

/// Area under the ROC curve as the Mann-Whitney statistic; tied scores count
/// one half, so constant scores give exactly 0.5.
inline double auroc(std::span<const double> scores, std::span<const int> y) {
  if (scores.size() != y.size() || y.empty()) throw DataError("scores/targets size mismatch");
  const auto counts = detail::count_classes(y);
  if (counts.pos == 0 || counts.neg == 0) throw DataError("auroc needs both classes present");

  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // average ranks over tie groups, accumulate positive ranks
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based ranks i+1 .. j
    for (std::size_t k = i; k < j; ++k) {
      if (y[idx[k]] == 1) rank_sum_pos += avg_rank;
    }
    i = j;
  }
  const double n1 = static_cast<double>(counts.pos);
  const double n0 = static_cast<double>(counts.neg);
  const double u = rank_sum_pos - n1 * (n1 + 1.0) / 2.0;
  return u / (n1 * n0);
}

/// Area under the precision-recall curve in the average-precision convention,
/// with tied scores processed as one block. A constant score vector yields the
/// positive-class ratio exactly.
inline double aupr(std::span<const double> scores, std::span<const int> y) {
  if (scores.size() != y.size() || y.empty()) throw DataError("scores/targets size mismatch");
  const auto counts = detail::count_classes(y);
  if (counts.pos == 0 || counts.neg == 0) throw DataError("aupr needs both classes present");

  const auto idx = detail::order_by_score_desc(scores);
  double ap = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    for (std::size_t k = i; k < j; ++k) {
      if (y[idx[k]] == 1) {
        ++tp;
      } else {
        ++fp;
      }
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(counts.pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

/// Top-decile lift: fraud rate among the ceil(decile * n) highest-scored rows
/// divided by the base fraud rate. Score ties are broken by input order.
inline double tdl(std::span<const double> scores, std::span<const int> y, double decile = 0.10) {
  if (scores.size() != y.size() || y.empty()) throw DataError("scores/targets size mismatch");
  if (!(decile > 0.0 && decile <= 1.0)) throw DataError("decile must be in (0, 1]");
  const auto counts = detail::count_classes(y);
  if (counts.pos == 0) throw DataError("tdl needs at least one positive");

  const auto idx = detail::order_by_score_desc(scores);
  const auto top = static_cast<std::size_t>(
      std::ceil(decile * static_cast<double>(y.size()) - 1e-12));
  std::size_t hits = 0;
  for (std::size_t k = 0; k < top; ++k) hits += y[idx[k]] == 1;
  const double top_rate = static_cast<double>(hits) / static_cast<double>(top);
  const double base_rate = static_cast<double>(counts.pos) / static_cast<double>(y.size());
  return top_rate / base_rate;
}

/// ROC curve points (fpr, tpr), one per distinct score level, starting at (0,0).
inline std::vector<CurvePoint> roc_curve(std::span<const double> scores, std::span<const int> y) {
  const auto counts = detail::count_classes(y);
  if (counts.pos == 0 || counts.neg == 0) throw DataError("roc curve needs both classes present");
  const auto idx = detail::order_by_score_desc(scores);
  std::vector<CurvePoint> pts{{0.0, 0.0}};
  std::size_t tp = 0, fp = 0, i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    for (std::size_t k = i; k < j; ++k) {
      if (y[idx[k]] == 1) {
        ++tp;
      } else {
        ++fp;
      }
    }
    pts.push_back({static_cast<double>(fp) / static_cast<double>(counts.neg),
                   static_cast<double>(tp) / static_cast<double>(counts.pos)});
    i = j;
  }
  return pts;
}

/// PR curve points (recall, precision), one per distinct score level.
inline std::vector<CurvePoint> pr_curve(std::span<const double> scores, std::span<const int> y) {
  const auto counts = detail::count_classes(y);
  if (counts.pos == 0 || counts.neg == 0) throw DataError("pr curve needs both classes present");
  const auto idx = detail::order_by_score_desc(scores);
  std::vector<CurvePoint> pts;
  std::size_t tp = 0, fp = 0, i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    for (std::size_t k = i; k < j; ++k) {
      if (y[idx[k]] == 1) {
        ++tp;
      } else {
        ++fp;
      }
    }
    pts.push_back({static_cast<double>(tp) / static_cast<double>(counts.pos),
                   static_cast<double>(tp) / static_cast<double>(tp + fp)});
    i = j;
  }
  return pts;
}

struct MetricsReport {
  double auroc = 0.0;
  double aupr = 0.0;
  double tdl = 0.0;
  std::vector<CurvePoint> roc;
  std::vector<CurvePoint> pr;
};

inline MetricsReport compute_metrics(std::span<const double> scores, std::span<const int> y,
                                     bool with_curves = false) {
  MetricsReport r;
  r.auroc = auroc(scores, y);
  r.aupr = aupr(scores, y);
  r.tdl = tdl(scores, y);
  if (with_curves) {
    r.roc = roc_curve(scores, y);
    r.pr = pr_curve(scores, y);
  }
  return r;
}

}  // namespace claimnet
