#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "claimnet/csv.hpp"
#include "claimnet/graph.hpp"
#include "claimnet/labels.hpp"
#include "claimnet/random.hpp"

namespace claimnet {

/// Per-claim prior fraud mass (the parties carry no prior).
struct QueryVector {
  std::vector<double> values;
  bool allow_zero = false;
  bool no_sources_warning = false;  // set when built from labels that contain no historic fraud

  bool all_zero() const {
    for (double v : values) {
      if (v != 0.0) return false;
    }
    return true;
  }
};

enum class BiRankInit : std::uint8_t { UniformDeterministic = 0, SeededRandom = 1 };

struct BiRankConfig {
  double alpha = 0.85;
  double tolerance = 1e-8;     // relative L1 change of the stacked (c, p) vector
  int max_iterations = 1000;
  BiRankInit init = BiRankInit::UniformDeterministic;
  std::uint64_t seed = 0;
  bool normalize_query = false;  // optional sum-to-one rescaling of the query, off by default

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in [0, 1]");
    if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
    if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  }
};

struct ScoreSet {
  std::vector<double> claim_scores;
  std::vector<double> party_scores;
  int iterations_used = 0;
  double first_residual = 0.0;
  double final_residual = 0.0;
  bool converged = false;
};

// The symmetrically normalized weight matrix S with entries
// w_ij / (sqrt(d_i) * sqrt(d_j)), applied matrix-free in either orientation.
class NormalizedOperator {
 public:
  explicit NormalizedOperator(const BipartiteGraph& g) : g_(&g) {
    claim_inv_sqrt_.reserve(g.claim_count());
    for (double d : g.claim_degrees()) {
      if (!(d > 0.0)) throw DataError("zero-degree claim node");
      claim_inv_sqrt_.push_back(1.0 / std::sqrt(d));
    }
    party_inv_sqrt_.reserve(g.party_count());
    for (double d : g.party_degrees()) {
      if (!(d > 0.0)) throw DataError("zero-degree party node");
      party_inv_sqrt_.push_back(1.0 / std::sqrt(d));
    }
  }

  const BipartiteGraph& graph() const { return *g_; }

  /// out = S p  (length n_claims)
  void apply_to_claims(std::span<const double> p, std::span<double> out) const {
    for (std::uint32_t i = 0; i < g_->claim_count(); ++i) {
      auto nbrs = g_->claim_parties(i);
      auto wts = g_->claim_party_weights(i);
      double acc = 0.0;
      for (std::size_t k = 0; k < nbrs.size(); ++k) {
        acc += wts[k] * party_inv_sqrt_[nbrs[k]] * p[nbrs[k]];
      }
      out[i] = acc * claim_inv_sqrt_[i];
    }
  }

  /// out = S^T c  (length n_parties)
  void apply_to_parties(std::span<const double> c, std::span<double> out) const {
    for (std::uint32_t j = 0; j < g_->party_count(); ++j) {
      auto nbrs = g_->party_claims(j);
      auto wts = g_->party_claim_weights(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < nbrs.size(); ++k) {
        acc += wts[k] * claim_inv_sqrt_[nbrs[k]] * c[nbrs[k]];
      }
      out[j] = acc * party_inv_sqrt_[j];
    }
  }

  double entry(std::uint32_t claim, std::uint32_t party) const {
    const double w = g_->edge_weight(claim, party);
    return w == 0.0 ? 0.0 : w * claim_inv_sqrt_[claim] * party_inv_sqrt_[party];
  }

  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g_->claim_count()),
                                              static_cast<Eigen::Index>(g_->party_count()));
    for (std::uint32_t i = 0; i < g_->claim_count(); ++i) {
      auto nbrs = g_->claim_parties(i);
      auto wts = g_->claim_party_weights(i);
      for (std::size_t k = 0; k < nbrs.size(); ++k) {
        s(i, nbrs[k]) = wts[k] * claim_inv_sqrt_[i] * party_inv_sqrt_[nbrs[k]];
      }
    }
    return s;
  }

 private:
  const BipartiteGraph* g_;
  std::vector<double> claim_inv_sqrt_, party_inv_sqrt_;
};

namespace detail {

inline std::vector<double> prepared_query(const BipartiteGraph& g, const QueryVector& q,
                                          bool normalize) {
  if (q.values.size() != g.claim_count()) {
    throw DataError("query vector length " + std::to_string(q.values.size()) +
                    " does not match claim count " + std::to_string(g.claim_count()));
  }
  double sum = 0.0;
  for (double v : q.values) {
    if (v < 0.0) throw DataError("query vector entries must be non-negative");
    sum += v;
  }
  if (sum == 0.0 && !q.allow_zero) {
    throw DataError("query vector is all-zero; set allow_zero to permit it");
  }
  std::vector<double> out = q.values;
  if (normalize && sum > 0.0) {
    for (double& v : out) v /= sum;
  }
  return out;
}

}  // namespace detail

/// Iterative fraud scoring: repeat  c <- alpha * S p + (1 - alpha) * c0,
/// p <- S^T c  until the relative L1 change of the stacked score vector drops
/// below the tolerance or the iteration budget runs out.
inline ScoreSet birank(const BipartiteGraph& g, const QueryVector& query, const BiRankConfig& cfg = {}) {
  cfg.validate();
  const std::vector<double> c0 = detail::prepared_query(g, query, cfg.normalize_query);
  const std::size_t n_c = g.claim_count();
  const std::size_t n_p = g.party_count();

  ScoreSet result;
  bool zero_query = true;
  for (double v : c0) {
    if (v != 0.0) {
      zero_query = false;
      break;
    }
  }
  if (zero_query && cfg.alpha < 1.0) {
    // The unique fixed point of c = alpha * S S^T c with alpha < 1 is zero.
    result.claim_scores.assign(n_c, 0.0);
    result.party_scores.assign(n_p, 0.0);
    result.converged = true;
    return result;
  }

  NormalizedOperator op(g);
  std::vector<double> c(n_c), p(n_p);
  if (cfg.init == BiRankInit::UniformDeterministic) {
    const double v = 1.0 / static_cast<double>(n_c + n_p);
    std::fill(c.begin(), c.end(), v);
    std::fill(p.begin(), p.end(), v);
  } else {
    Rng rng(cfg.seed);
    for (double& v : c) v = rng.uniform();
    for (double& v : p) v = rng.uniform();
  }

  std::vector<double> c_prev(n_c), p_prev(n_p);
  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    c_prev = c;
    p_prev = p;
    op.apply_to_claims(p_prev, c);
    for (std::size_t i = 0; i < n_c; ++i) c[i] = cfg.alpha * c[i] + (1.0 - cfg.alpha) * c0[i];
    op.apply_to_parties(c, p);

    double change = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < n_c; ++i) {
      change += std::abs(c[i] - c_prev[i]);
      norm += std::abs(c_prev[i]);
    }
    for (std::size_t j = 0; j < n_p; ++j) {
      change += std::abs(p[j] - p_prev[j]);
      norm += std::abs(p_prev[j]);
    }
    const double residual = norm > 0.0 ? change / norm : change;
    if (iter == 1) result.first_residual = residual;
    result.final_residual = residual;
    result.iterations_used = iter;
    if (residual < cfg.tolerance) {
      result.converged = true;
      break;
    }
  }

  result.claim_scores = std::move(c);
  result.party_scores = std::move(p);
  return result;
}

/// Direct-solve oracle: c* = (1 - alpha) (I - alpha S S^T)^-1 c0, p* = S^T c*.
/// Dense solve, guarded to small graphs; used to validate the iteration.
inline ScoreSet birank_direct(const BipartiteGraph& g, const QueryVector& query, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in [0, 1]");
  if (g.claim_count() + g.party_count() > 5000) {
    throw ConfigError("graph too large for the dense direct solver (limit 5000 nodes)");
  }
  if (alpha == 1.0) {
    // I - S S^T is singular: sqrt(d) is an eigenvector of S S^T with eigenvalue 1.
    throw ConfigError("direct solver is singular at alpha = 1");
  }
  const std::vector<double> c0 = detail::prepared_query(g, query, false);

  NormalizedOperator op(g);
  const Eigen::MatrixXd s = op.dense();
  const auto n_c = static_cast<Eigen::Index>(g.claim_count());
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n_c, n_c) - alpha * (s * s.transpose());
  Eigen::VectorXd rhs(n_c);
  for (Eigen::Index i = 0; i < n_c; ++i) rhs(i) = (1.0 - alpha) * c0[static_cast<std::size_t>(i)];
  const Eigen::VectorXd c = m.partialPivLu().solve(rhs);
  const Eigen::VectorXd p = s.transpose() * c;

  ScoreSet result;
  result.claim_scores.assign(c.data(), c.data() + c.size());
  result.party_scores.assign(p.data(), p.data() + p.size());
  result.converged = true;
  return result;
}

enum class QueryMode : std::uint8_t { BinaryHistoricFraud = 0 };

/// Query vector from labels: 1 for claims known fraudulent with a filing date
/// at or before the cutoff, 0 otherwise.
inline QueryVector build_query_vector(const BipartiteGraph& g, const LabelMap& labels, Date cutoff,
                                      QueryMode mode = QueryMode::BinaryHistoricFraud) {
  (void)mode;
  if (labels.size() != g.claim_count()) {
    throw DataError("label map size does not match graph claim count");
  }
  QueryVector q;
  q.values.assign(g.claim_count(), 0.0);
  std::size_t sources = 0;
  for (std::uint32_t i = 0; i < g.claim_count(); ++i) {
    if (labels.label(i) != ClaimLabel::Fraud) continue;
    const auto filed = labels.filing_date(i);
    if (filed && *filed <= cutoff) {
      q.values[i] = 1.0;
      ++sources;
    }
  }
  if (sources == 0) {
    q.allow_zero = true;
    q.no_sources_warning = true;
  }
  return q;
}

/// `node_kind,node_id,score` rows, claims first then parties.
inline void write_scores_csv(const std::string& path, const BipartiteGraph& g, const ScoreSet& scores) {
  CsvWriter w(path);
  w.write_row({"node_kind", "node_id", "score"});
  for (std::uint32_t i = 0; i < g.claim_count(); ++i) {
    w.write_row({"claim", g.claim_id(i), format_double(scores.claim_scores[i])});
  }
  for (std::uint32_t j = 0; j < g.party_count(); ++j) {
    w.write_row({"party", g.party_id(j), format_double(scores.party_scores[j])});
  }
  w.close();
}

inline ScoreSet read_scores_csv(const std::string& path, const BipartiteGraph& g) {
  CsvReader reader(path);
  const std::size_t c_kind = reader.require_column("node_kind");
  const std::size_t c_id = reader.require_column("node_id");
  const std::size_t c_score = reader.require_column("score");
  ScoreSet s;
  s.claim_scores.assign(g.claim_count(), 0.0);
  s.party_scores.assign(g.party_count(), 0.0);
  s.converged = true;
  std::vector<std::string> f;
  while (reader.read_row(f)) {
    const double v = parse_double(f[c_score], "score");
    if (f[c_kind] == "claim") {
      auto idx = g.find_claim(f[c_id]);
      if (!idx) throw DataError("scores reference unknown claim '" + f[c_id] + "'");
      s.claim_scores[*idx] = v;
    } else if (f[c_kind] == "party") {
      auto idx = g.find_party(f[c_id]);
      if (!idx) throw DataError("scores reference unknown party '" + f[c_id] + "'");
      s.party_scores[*idx] = v;
    } else {
      throw DataError("bad node_kind '" + f[c_kind] + "' in " + path);
    }
  }
  return s;
}

}  // namespace claimnet
