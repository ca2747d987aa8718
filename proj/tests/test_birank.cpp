#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

using namespace claimnet;
using testsupport::sample_network;
using testsupport::sample_query;

namespace {

QueryVector random_sparse_query(const BipartiteGraph& g, Rng& rng) {
  QueryVector q;
  q.values.assign(g.claim_count(), 0.0);
  q.allow_zero = true;
  for (std::size_t i = 0; i < g.claim_count(); ++i) {
    if (rng.uniform() < 0.3) q.values[i] = rng.uniform();
  }
  if (q.all_zero()) q.values[rng.uniform_index(g.claim_count())] = 1.0;
  return q;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(NormalizedOperator, SampleNetworkEntry) {
  const BipartiteGraph g = sample_network();
  NormalizedOperator op(g);
  // d(C1) = 3, d(P1) = 2 -> 1/sqrt(6)
  EXPECT_NEAR(op.entry(*g.find_claim("C1"), *g.find_party("P1")), 1.0 / std::sqrt(6.0), 1e-12);
  EXPECT_DOUBLE_EQ(op.entry(*g.find_claim("C4"), *g.find_party("P1")), 0.0);
}

TEST(NormalizedOperator, OneEdgeGraphIsIdentity) {
  const BipartiteGraph g = build_graph(std::vector<EdgeRecord>{{"c", "p", PartyKind::Broker, 1.0, std::nullopt}});
  NormalizedOperator op(g);
  EXPECT_DOUBLE_EQ(op.entry(0, 0), 1.0);
}

TEST(NormalizedOperator, UniformStarEntries) {
  const std::size_t m = 7;
  std::vector<EdgeRecord> records;
  for (std::size_t j = 0; j < m; ++j) {
    records.push_back({"hub", "leaf" + std::to_string(j), PartyKind::Policyholder, 1.0, std::nullopt});
  }
  const BipartiteGraph g = build_graph(records);
  NormalizedOperator op(g);
  for (std::uint32_t j = 0; j < m; ++j) {
    EXPECT_NEAR(op.entry(0, j), 1.0 / std::sqrt(static_cast<double>(m)), 1e-12);
  }
}

// Published worked example: C4 is the only source, alpha = 0.85.
TEST(BiRank, WorkedExampleScoreOfC1) {
  const BipartiteGraph g = sample_network();
  BiRankConfig cfg;
  cfg.alpha = 0.85;
  cfg.tolerance = 1e-10;
  const ScoreSet s = birank(g, sample_query(g), cfg);
  ASSERT_TRUE(s.converged);
  EXPECT_NEAR(s.claim_scores[*g.find_claim("C1")], 0.1440, 5e-4);
  // source keeps the largest claim score
  EXPECT_GT(s.claim_scores[*g.find_claim("C4")], s.claim_scores[*g.find_claim("C1")]);
}

TEST(BiRank, AlphaZeroReturnsQueryExactly) {
  const BipartiteGraph g = sample_network();
  QueryVector q = sample_query(g);
  BiRankConfig cfg;
  cfg.alpha = 0.0;
  const ScoreSet s = birank(g, q, cfg);
  ASSERT_TRUE(s.converged);
  for (std::size_t i = 0; i < q.values.size(); ++i) {
    EXPECT_DOUBLE_EQ(s.claim_scores[i], q.values[i]);
  }
  // p = S^T c0
  NormalizedOperator op(g);
  std::vector<double> expected(g.party_count());
  op.apply_to_parties(q.values, expected);
  EXPECT_LT(max_abs_diff(s.party_scores, expected), 1e-15);
}

TEST(BiRank, ZeroQueryGivesZeroScores) {
  const BipartiteGraph g = sample_network();
  QueryVector q;
  q.values.assign(g.claim_count(), 0.0);
  q.allow_zero = true;
  BiRankConfig cfg;
  cfg.alpha = 0.85;
  const ScoreSet s = birank(g, q, cfg);
  ASSERT_TRUE(s.converged);
  for (double v : s.claim_scores) EXPECT_NEAR(v, 0.0, 1e-12);
  for (double v : s.party_scores) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(BiRank, ZeroQueryWithoutPermissionThrows) {
  const BipartiteGraph g = sample_network();
  QueryVector q;
  q.values.assign(g.claim_count(), 0.0);
  EXPECT_THROW(birank(g, q), DataError);
}

// 2-claim/2-party 4-cycle with c0 = (1,0), alpha = 0.5. The fixed point is
// (0.75, 0.25): SS^T has all entries 1/2, so (I - 0.5 SS^T)^-1 =
// [[1.5, 0.5], [0.5, 1.5]] and c* = 0.5 * (1.5, 0.5).
TEST(BiRank, FourCycleFixedPointByHand) {
  const std::vector<EdgeRecord> records = {{"a", "x", PartyKind::Policyholder, 1.0, std::nullopt},
                                           {"a", "y", PartyKind::Policyholder, 1.0, std::nullopt},
                                           {"b", "x", PartyKind::Policyholder, 1.0, std::nullopt},
                                           {"b", "y", PartyKind::Policyholder, 1.0, std::nullopt}};
  const BipartiteGraph g = build_graph(records);
  QueryVector q;
  q.values = {1.0, 0.0};

  const ScoreSet direct = birank_direct(g, q, 0.5);
  EXPECT_NEAR(direct.claim_scores[0], 0.75, 1e-12);
  EXPECT_NEAR(direct.claim_scores[1], 0.25, 1e-12);

  BiRankConfig cfg;
  cfg.alpha = 0.5;
  cfg.tolerance = 1e-14;
  cfg.max_iterations = 10000;
  const ScoreSet iter = birank(g, q, cfg);
  EXPECT_NEAR(iter.claim_scores[0], 0.75, 1e-10);
  EXPECT_NEAR(iter.claim_scores[1], 0.25, 1e-10);
}

TEST(BiRank, IterativeMatchesDirectSolveOnRandomGraphs) {
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    testsupport::RandomGraphOptions opts;
    opts.weighted = trial % 2 == 1;
    const BipartiteGraph g = build_graph(testsupport::random_edges(rng, opts));
    const QueryVector q = random_sparse_query(g, rng);
    for (double alpha : {0.1, 0.5, 0.85}) {
      BiRankConfig cfg;
      cfg.alpha = alpha;
      cfg.tolerance = 1e-12;
      cfg.max_iterations = 100000;
      const ScoreSet iter = birank(g, q, cfg);
      const ScoreSet direct = birank_direct(g, q, alpha);
      ASSERT_TRUE(iter.converged);
      EXPECT_LT(max_abs_diff(iter.claim_scores, direct.claim_scores), 1e-6);
      EXPECT_LT(max_abs_diff(iter.party_scores, direct.party_scores), 1e-6);
    }
  }
}

TEST(BiRank, NonNegativityOfConvergedScores) {
  Rng rng(31337);
  for (int trial = 0; trial < 10; ++trial) {
    const BipartiteGraph g = build_graph(testsupport::random_edges(rng));
    const QueryVector q = random_sparse_query(g, rng);
    BiRankConfig cfg;
    cfg.alpha = 0.85;
    const ScoreSet s = birank(g, q, cfg);
    for (double v : s.claim_scores) EXPECT_GE(v, -1e-15);
    for (double v : s.party_scores) EXPECT_GE(v, -1e-15);
  }
}

// Adding query mass never decreases any converged claim score.
TEST(BiRank, MonotonicityInSources) {
  Rng rng(404);
  for (int trial = 0; trial < 10; ++trial) {
    const BipartiteGraph g = build_graph(testsupport::random_edges(rng));
    QueryVector q = random_sparse_query(g, rng);
    const ScoreSet base = birank_direct(g, q, 0.85);
    QueryVector boosted = q;
    boosted.values[rng.uniform_index(g.claim_count())] += 0.5;
    const ScoreSet more = birank_direct(g, boosted, 0.85);
    for (std::size_t i = 0; i < g.claim_count(); ++i) {
      EXPECT_GE(more.claim_scores[i], base.claim_scores[i] - 1e-12);
    }
  }
}

// S S^T has eigenvalue 1 with eigenvector sqrt(d_C): one round trip through
// the operator reproduces the vector exactly.
TEST(BiRank, SqrtDegreeEigenIdentity) {
  Rng rng(60601);
  for (int trial = 0; trial < 15; ++trial) {
    testsupport::RandomGraphOptions opts;
    opts.weighted = true;
    const BipartiteGraph g = build_graph(testsupport::random_edges(rng, opts));
    NormalizedOperator op(g);
    std::vector<double> v(g.claim_count());
    for (std::uint32_t i = 0; i < g.claim_count(); ++i) v[i] = std::sqrt(g.claim_degree(i));
    std::vector<double> p(g.party_count()), back(g.claim_count());
    op.apply_to_parties(v, p);
    op.apply_to_claims(p, back);
    EXPECT_LT(max_abs_diff(v, back), 1e-10);
  }
}

TEST(BiRank, PermutationEquivariance) {
  Rng rng(8080);
  auto records = testsupport::random_edges(rng);
  const BipartiteGraph g1 = build_graph(records);

  auto relabeled = records;
  std::reverse(relabeled.begin(), relabeled.end());
  for (auto& r : relabeled) {
    r.claim_id = "z" + r.claim_id;
    r.party_id = "z" + r.party_id;
  }
  const BipartiteGraph g2 = build_graph(relabeled);

  QueryVector q1 = random_sparse_query(g1, rng);
  QueryVector q2;
  q2.values.assign(g2.claim_count(), 0.0);
  q2.allow_zero = true;
  for (std::uint32_t i = 0; i < g1.claim_count(); ++i) {
    q2.values[*g2.find_claim("z" + g1.claim_id(i))] = q1.values[i];
  }

  BiRankConfig cfg;
  cfg.alpha = 0.7;
  cfg.tolerance = 1e-12;
  const ScoreSet s1 = birank(g1, q1, cfg);
  const ScoreSet s2 = birank(g2, q2, cfg);
  for (std::uint32_t i = 0; i < g1.claim_count(); ++i) {
    EXPECT_NEAR(s1.claim_scores[i], s2.claim_scores[*g2.find_claim("z" + g1.claim_id(i))], 1e-9);
  }
}

TEST(BiRank, InitializationIndependence) {
  const BipartiteGraph g = sample_network();
  const QueryVector q = sample_query(g);
  BiRankConfig a;
  a.alpha = 0.85;
  a.tolerance = 1e-12;
  a.init = BiRankInit::SeededRandom;
  a.seed = 1;
  BiRankConfig b = a;
  b.seed = 987654321;
  const ScoreSet sa = birank(g, q, a);
  const ScoreSet sb = birank(g, q, b);
  ASSERT_TRUE(sa.converged);
  ASSERT_TRUE(sb.converged);
  EXPECT_LT(max_abs_diff(sa.claim_scores, sb.claim_scores), 10 * a.tolerance);
  EXPECT_LT(max_abs_diff(sa.party_scores, sb.party_scores), 10 * a.tolerance);
}

TEST(BiRank, ResidualShrinksFromFirstIteration) {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const BipartiteGraph g = build_graph(testsupport::random_edges(rng));
    const QueryVector q = random_sparse_query(g, rng);
    BiRankConfig cfg;
    cfg.alpha = 0.85;
    const ScoreSet s = birank(g, q, cfg);
    EXPECT_LE(s.final_residual, s.first_residual);
  }
}

TEST(BiRank, RawQueryIsLinearInMass) {
  const BipartiteGraph g = sample_network();
  QueryVector q = sample_query(g);
  const ScoreSet s1 = birank_direct(g, q, 0.85);
  for (double& v : q.values) v *= 2.0;
  const ScoreSet s2 = birank_direct(g, q, 0.85);
  for (std::size_t i = 0; i < g.claim_count(); ++i) {
    EXPECT_NEAR(s2.claim_scores[i], 2.0 * s1.claim_scores[i], 1e-12);
  }
}

TEST(BiRank, OptionalQueryNormalizationRescales) {
  const BipartiteGraph g = sample_network();
  QueryVector q = sample_query(g);
  q.values[*g.find_claim("C2")] = 1.0;  // sum = 2
  BiRankConfig raw;
  raw.tolerance = 1e-12;
  BiRankConfig norm = raw;
  norm.normalize_query = true;
  const ScoreSet s_raw = birank(g, q, raw);
  const ScoreSet s_norm = birank(g, q, norm);
  for (std::size_t i = 0; i < g.claim_count(); ++i) {
    EXPECT_NEAR(s_norm.claim_scores[i], 0.5 * s_raw.claim_scores[i], 1e-9);
  }
}

TEST(BiRank, DimensionMismatchThrows) {
  const BipartiteGraph g = sample_network();
  QueryVector q;
  q.values = {1.0, 0.0};
  EXPECT_THROW(birank(g, q), DataError);
  EXPECT_THROW(birank_direct(g, q, 0.5), DataError);
}

TEST(BiRank, ConfigValidation) {
  const BipartiteGraph g = sample_network();
  const QueryVector q = sample_query(g);
  BiRankConfig bad;
  bad.alpha = 1.5;
  EXPECT_THROW(birank(g, q, bad), ConfigError);
  bad = BiRankConfig{};
  bad.tolerance = 0.0;
  EXPECT_THROW(birank(g, q, bad), ConfigError);
  bad = BiRankConfig{};
  bad.max_iterations = 0;
  EXPECT_THROW(birank(g, q, bad), ConfigError);
}

TEST(BiRankDirect, SingularAtAlphaOneAndSizeGuard) {
  const BipartiteGraph g = sample_network();
  const QueryVector q = sample_query(g);
  EXPECT_THROW(birank_direct(g, q, 1.0), ConfigError);
}

TEST(BiRank, NonConvergenceIsReportedNotThrown) {
  const BipartiteGraph g = sample_network();
  const QueryVector q = sample_query(g);
  BiRankConfig cfg;
  cfg.alpha = 0.85;
  cfg.tolerance = 1e-12;
  cfg.max_iterations = 3;
  const ScoreSet s = birank(g, q, cfg);
  EXPECT_FALSE(s.converged);
  EXPECT_EQ(s.iterations_used, 3);
  EXPECT_GT(s.final_residual, cfg.tolerance);
}

TEST(QueryVector, BuiltFromHistoricFraudLabels) {
  const BipartiteGraph g = sample_network();
  const LabelMap labels(g, testsupport::sample_network_labels());
  const QueryVector q = build_query_vector(g, labels, testsupport::sample_cutoff());
  const std::vector<double> expected = {0.0, 0.0, 0.0, 1.0, 0.0};
  EXPECT_EQ(q.values, expected);
  EXPECT_FALSE(q.no_sources_warning);
}

TEST(QueryVector, NoHistoricFraudGivesZeroVectorWithWarning) {
  const BipartiteGraph g = sample_network();
  auto recs = testsupport::sample_network_labels();
  for (auto& r : recs) {
    if (r.label == ClaimLabel::Fraud) r.filing_date = parse_date("2023-02-01");  // after cutoff
  }
  const LabelMap labels(g, recs);
  const QueryVector q = build_query_vector(g, labels, testsupport::sample_cutoff());
  EXPECT_TRUE(q.all_zero());
  EXPECT_TRUE(q.no_sources_warning);
  EXPECT_TRUE(q.allow_zero);
}

TEST(QueryVector, AllFraudGivesAllOnes) {
  const BipartiteGraph g = sample_network();
  std::vector<LabelRecord> recs;
  for (std::uint32_t i = 0; i < g.claim_count(); ++i) {
    recs.push_back({g.claim_id(i), ClaimLabel::Fraud, parse_date("2020-01-01")});
  }
  const LabelMap labels(g, recs);
  const QueryVector q = build_query_vector(g, labels, testsupport::sample_cutoff());
  for (double v : q.values) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(QueryVector, UnknownClaimIdInLabelsThrows) {
  const BipartiteGraph g = sample_network();
  std::vector<LabelRecord> recs = {{"NOT_A_CLAIM", ClaimLabel::Fraud, parse_date("2020-01-01")}};
  EXPECT_THROW(LabelMap(g, recs), DataError);
}
