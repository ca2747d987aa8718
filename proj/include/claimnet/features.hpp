#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "claimnet/birank.hpp"
#include "claimnet/csv.hpp"
#include "claimnet/graph.hpp"
#include "claimnet/labels.hpp"
#include "claimnet/stats.hpp"

namespace claimnet {

struct ScoreFeatures {
  double scores0 = 0.0;
  double n1_q1 = 0.0, n1_med = 0.0, n1_max = 0.0;
  double n2_q1 = 0.0, n2_med = 0.0, n2_max = 0.0;
};

struct NeighborhoodFeatures {
  std::size_t n1_size = 0;
  std::size_t n2_size = 0;
  double n2_ratio_fraud = 0.0;
  double n2_ratio_nonfraud = 0.0;
  int n2_bin_fraud = 0;
};

struct NetworkFeatureRow {
  std::uint32_t claim = 0;
  ScoreFeatures score;
  NeighborhoodFeatures nbh;
};

// Statistics of the fraud-score distribution over the claim itself and its
// first/second order neighborhoods. Empty-neighborhood statistics are 0.
inline ScoreFeatures score_features(const BipartiteGraph& g, const ScoreSet& scores, NodeId claim) {
  if (claim.kind != NodeKind::Claim) throw DataError("score features are defined for claim nodes");
  if (claim.index >= g.claim_count()) {
    throw DataError("unknown claim node index " + std::to_string(claim.index));
  }
  ScoreFeatures out;
  out.scores0 = scores.claim_scores.at(claim.index);

  const Neighborhood n1 = g.neighborhood(claim, 1);
  if (!n1.members.empty()) {
    std::vector<double> vals;
    vals.reserve(n1.members.size());
    for (std::uint32_t j : n1.members) vals.push_back(scores.party_scores.at(j));
    std::sort(vals.begin(), vals.end());
    out.n1_q1 = quantile_sorted(vals, 0.25);
    out.n1_med = quantile_sorted(vals, 0.50);
    out.n1_max = vals.back();
  }

  const Neighborhood n2 = g.neighborhood(claim, 2);
  if (!n2.members.empty()) {
    std::vector<double> vals;
    vals.reserve(n2.members.size());
    for (std::uint32_t i : n2.members) vals.push_back(scores.claim_scores.at(i));
    std::sort(vals.begin(), vals.end());
    out.n2_q1 = quantile_sorted(vals, 0.25);
    out.n2_med = quantile_sorted(vals, 0.50);
    out.n2_max = vals.back();
  }
  return out;
}

// Neighborhood sizes and label mix. Ratios divide by the full second-order
// size including unknown claims; an empty neighborhood yields all zeros.
inline NeighborhoodFeatures neighborhood_features(const BipartiteGraph& g, const LabelMap& labels,
                                                  NodeId claim) {
  if (claim.kind != NodeKind::Claim) throw DataError("neighborhood features are defined for claim nodes");
  if (claim.index >= g.claim_count()) {
    throw DataError("unknown claim node index " + std::to_string(claim.index));
  }
  NeighborhoodFeatures out;
  out.n1_size = g.neighborhood(claim, 1).size();

  const Neighborhood n2 = g.neighborhood(claim, 2);
  out.n2_size = n2.size();
  if (!n2.members.empty()) {
    std::size_t fraud = 0, nonfraud = 0;
    for (std::uint32_t i : n2.members) {
      const ClaimLabel l = labels.label(i);
      fraud += l == ClaimLabel::Fraud;
      nonfraud += l == ClaimLabel::NonFraud;
    }
    out.n2_ratio_fraud = static_cast<double>(fraud) / static_cast<double>(n2.size());
    out.n2_ratio_nonfraud = static_cast<double>(nonfraud) / static_cast<double>(n2.size());
    out.n2_bin_fraud = fraud > 0 ? 1 : 0;
  }
  return out;
}

class FeatureFrame {
 public:
  static const std::vector<std::string>& column_names() {
    static const std::vector<std::string> names = {
        "claim_id", "scores0", "n1.q1",   "n1.med",  "n1.max",       "n2.q1",           "n2.med",
        "n2.max",   "n1.size", "n2.size", "n2.ratioFraud", "n2.ratioNonFraud", "n2.binFraud"};
    return names;
  }

  std::size_t size() const { return rows_.size(); }
  const NetworkFeatureRow& row(std::size_t k) const { return rows_.at(k); }
  const std::string& claim_id(std::size_t k) const { return claim_ids_.at(k); }
  const std::vector<NetworkFeatureRow>& rows() const { return rows_; }
  bool scores_converged() const { return scores_converged_; }

  void write_csv(const std::string& path) const {
    CsvWriter w(path);
    w.write_row(column_names());
    for (std::size_t k = 0; k < rows_.size(); ++k) {
      const auto& r = rows_[k];
      w.write_row({claim_ids_[k], format_double(r.score.scores0), format_double(r.score.n1_q1),
                   format_double(r.score.n1_med), format_double(r.score.n1_max),
                   format_double(r.score.n2_q1), format_double(r.score.n2_med),
                   format_double(r.score.n2_max), std::to_string(r.nbh.n1_size),
                   std::to_string(r.nbh.n2_size), format_double(r.nbh.n2_ratio_fraud),
                   format_double(r.nbh.n2_ratio_nonfraud), std::to_string(r.nbh.n2_bin_fraud)});
    }
    w.close();
  }

 private:
  std::vector<std::string> claim_ids_;
  std::vector<NetworkFeatureRow> rows_;
  bool scores_converged_ = true;

  friend FeatureFrame featurize_claims(const BipartiteGraph&, const ScoreSet&, const LabelMap&,
                                       std::span<const std::uint32_t>);
};

/// One row per target claim, ordered by claim index. Pure function of its
/// inputs; a non-converged score set is carried as a frame-level warning.
inline FeatureFrame featurize_claims(const BipartiteGraph& g, const ScoreSet& scores,
                                     const LabelMap& labels, std::span<const std::uint32_t> targets) {
  FeatureFrame frame;
  frame.scores_converged_ = scores.converged;
  std::vector<std::uint32_t> order(targets.begin(), targets.end());
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());
  frame.rows_.reserve(order.size());
  frame.claim_ids_.reserve(order.size());
  for (std::uint32_t i : order) {
    NetworkFeatureRow row;
    row.claim = i;
    row.score = score_features(g, scores, claim_node(i));
    row.nbh = neighborhood_features(g, labels, claim_node(i));
    frame.rows_.push_back(row);
    frame.claim_ids_.push_back(g.claim_id(i));
  }
  return frame;
}

}  // namespace claimnet
