#include <gtest/gtest.h>

#include <array>
#include <set>

#include "test_support.hpp"

using namespace claimnet;
using testsupport::sample_network;

namespace {

using EdgeSet = std::set<std::pair<std::uint32_t, std::uint32_t>>;

EdgeSet cycle_edges(const CycleRecord& r) {
  EdgeSet edges;
  const int half = r.length / 2;
  for (int k = 0; k < half; ++k) {
    // walk claims[k] - parties[k] - claims[k+1]
    edges.emplace(r.claims[static_cast<std::size_t>(k)], r.parties[static_cast<std::size_t>(k)]);
    edges.emplace(r.claims[static_cast<std::size_t>((k + 1) % half)], r.parties[static_cast<std::size_t>(k)]);
  }
  return edges;
}

std::set<EdgeSet> as_edge_sets(const std::vector<CycleRecord>& cycles) {
  std::set<EdgeSet> out;
  for (const auto& c : cycles) out.insert(cycle_edges(c));
  return out;
}

// Independent oracle: every (claim pair, party pair) whose four edges exist.
std::set<EdgeSet> brute_force_4cycles(const BipartiteGraph& g) {
  std::set<EdgeSet> out;
  for (std::uint32_t a = 0; a < g.claim_count(); ++a) {
    for (std::uint32_t b = a + 1; b < g.claim_count(); ++b) {
      for (std::uint32_t p = 0; p < g.party_count(); ++p) {
        for (std::uint32_t q = p + 1; q < g.party_count(); ++q) {
          if (g.has_edge(a, p) && g.has_edge(a, q) && g.has_edge(b, p) && g.has_edge(b, q)) {
            out.insert(EdgeSet{{a, p}, {a, q}, {b, p}, {b, q}});
          }
        }
      }
    }
  }
  return out;
}

// Independent oracle: claim triples with an injective assignment of parties to
// the three claim-pair slots.
std::set<EdgeSet> brute_force_6cycles(const BipartiteGraph& g) {
  auto common = [&](std::uint32_t c1, std::uint32_t c2) {
    std::vector<std::uint32_t> out;
    auto n1 = g.claim_parties(c1);
    auto n2 = g.claim_parties(c2);
    std::set_intersection(n1.begin(), n1.end(), n2.begin(), n2.end(), std::back_inserter(out));
    return out;
  };
  std::set<EdgeSet> out;
  for (std::uint32_t a = 0; a < g.claim_count(); ++a) {
    for (std::uint32_t b = a + 1; b < g.claim_count(); ++b) {
      const auto ab = common(a, b);
      if (ab.empty()) continue;
      for (std::uint32_t c = b + 1; c < g.claim_count(); ++c) {
        const auto bc = common(b, c);
        const auto ca = common(c, a);
        for (std::uint32_t x : ab) {
          for (std::uint32_t y : bc) {
            if (y == x) continue;
            for (std::uint32_t z : ca) {
              if (z == x || z == y) continue;
              out.insert(EdgeSet{{a, x}, {b, x}, {b, y}, {c, y}, {c, z}, {a, z}});
            }
          }
        }
      }
    }
  }
  return out;
}

BipartiteGraph complete_bipartite(std::size_t n_claims, std::size_t n_parties) {
  std::vector<EdgeRecord> records;
  for (std::size_t i = 0; i < n_claims; ++i) {
    for (std::size_t j = 0; j < n_parties; ++j) {
      records.push_back({"c" + std::to_string(i), "p" + std::to_string(j), PartyKind::Policyholder,
                         1.0, std::nullopt});
    }
  }
  return build_graph(records);
}

}  // namespace

TEST(Cycles4, SampleNetworkHasExactlyOne) {
  const BipartiteGraph g = sample_network();
  const auto cycles = enumerate_4cycles(g);
  ASSERT_EQ(cycles.size(), 1u);
  const CycleRecord& c = cycles[0];
  EXPECT_EQ(g.claim_id(c.claims[0]), "C1");
  EXPECT_EQ(g.claim_id(c.claims[1]), "C3");
  EXPECT_EQ(g.party_id(c.parties[0]), "P2");
  EXPECT_EQ(g.party_id(c.parties[1]), "P3");
}

TEST(Cycles6, SampleNetworkHasExactlyOne) {
  const BipartiteGraph g = sample_network();
  const auto cycles = enumerate_6cycles(g);
  ASSERT_EQ(cycles.size(), 1u);
  const EdgeSet expected = {
      {*g.find_claim("C1"), *g.find_party("P1")}, {*g.find_claim("C2"), *g.find_party("P1")},
      {*g.find_claim("C2"), *g.find_party("P4")}, {*g.find_claim("C5"), *g.find_party("P4")},
      {*g.find_claim("C5"), *g.find_party("P3")}, {*g.find_claim("C1"), *g.find_party("P3")}};
  EXPECT_EQ(cycle_edges(cycles[0]), expected);
}

TEST(Cycles4, StarHasNone) {
  std::vector<EdgeRecord> records;
  for (int i = 0; i < 12; ++i) {
    records.push_back({"c" + std::to_string(i), "hub", PartyKind::Expert, 1.0, std::nullopt});
  }
  const BipartiteGraph g = build_graph(records);
  EXPECT_TRUE(enumerate_4cycles(g).empty());
  EXPECT_TRUE(enumerate_6cycles(g).empty());
}

TEST(Cycles4, CompleteBipartite2x2HasOne) {
  const BipartiteGraph g = complete_bipartite(2, 2);
  EXPECT_EQ(enumerate_4cycles(g).size(), 1u);
  EXPECT_TRUE(enumerate_6cycles(g).empty());
}

TEST(Cycles6, CompleteBipartite3x3HasSix) {
  const BipartiteGraph g = complete_bipartite(3, 3);
  const auto cycles = enumerate_6cycles(g);
  EXPECT_EQ(cycles.size(), 6u);
  EXPECT_EQ(as_edge_sets(cycles).size(), 6u);  // all distinct
  EXPECT_EQ(brute_force_6cycles(g).size(), 6u);
}

TEST(Cycles, MatchBruteForceOnRandomGraphs) {
  Rng rng(515);
  for (int trial = 0; trial < 20; ++trial) {
    testsupport::RandomGraphOptions opts;
    opts.max_claims = 14;
    opts.max_parties = 10;
    const BipartiteGraph g = build_graph(testsupport::random_edges(rng, opts));

    const auto found4 = enumerate_4cycles(g);
    EXPECT_EQ(as_edge_sets(found4).size(), found4.size()) << "duplicate 4-cycles";
    EXPECT_EQ(as_edge_sets(found4), brute_force_4cycles(g));

    const auto found6 = enumerate_6cycles(g);
    EXPECT_EQ(as_edge_sets(found6).size(), found6.size()) << "duplicate 6-cycles";
    EXPECT_EQ(as_edge_sets(found6), brute_force_6cycles(g));
  }
}

TEST(Cycles, CanonicalFormInvariants) {
  Rng rng(616);
  testsupport::RandomGraphOptions opts;
  opts.max_claims = 12;
  opts.max_parties = 8;
  const BipartiteGraph g = build_graph(testsupport::random_edges(rng, opts));
  for (const auto& c : enumerate_4cycles(g)) {
    EXPECT_LT(c.claims[0], c.claims[1]);
    EXPECT_LT(c.parties[0], c.parties[1]);
  }
  for (const auto& c : enumerate_6cycles(g)) {
    EXPECT_LT(c.claims[0], c.claims[1]);
    EXPECT_LT(c.claims[0], c.claims[2]);
    EXPECT_LT(c.parties[0], c.parties[2]);  // direction rule: smaller incident party first
  }
}

TEST(Cycles, RelabelingPreservesTheCycleMultiset) {
  Rng rng(4242);
  auto records = testsupport::random_edges(rng);
  const BipartiteGraph g1 = build_graph(records);
  auto relabeled = records;
  std::reverse(relabeled.begin(), relabeled.end());
  for (auto& r : relabeled) {
    r.claim_id = "q" + r.claim_id;
    r.party_id = "q" + r.party_id;
  }
  const BipartiteGraph g2 = build_graph(relabeled);

  auto id_sets = [](const BipartiteGraph& g, const std::vector<CycleRecord>& cycles, bool strip) {
    std::set<std::set<std::pair<std::string, std::string>>> out;
    for (const auto& c : cycles) {
      std::set<std::pair<std::string, std::string>> edges;
      for (const auto& [ci, pj] : cycle_edges(c)) {
        std::string a = g.claim_id(ci), b = g.party_id(pj);
        if (strip) {
          a = a.substr(1);
          b = b.substr(1);
        }
        edges.emplace(a, b);
      }
      out.insert(edges);
    }
    return out;
  };
  EXPECT_EQ(id_sets(g1, enumerate_4cycles(g1), false), id_sets(g2, enumerate_4cycles(g2), true));
  EXPECT_EQ(id_sets(g1, enumerate_6cycles(g1), false), id_sets(g2, enumerate_6cycles(g2), true));
}

// #4-cycles == sum over claim pairs of C(shared_parties, 2)
TEST(Cycles, CountCrossCheck) {
  Rng rng(2718);
  for (int trial = 0; trial < 10; ++trial) {
    const BipartiteGraph g = build_graph(testsupport::random_edges(rng));
    std::size_t expected = 0;
    for (std::uint32_t a = 0; a < g.claim_count(); ++a) {
      for (std::uint32_t b = a + 1; b < g.claim_count(); ++b) {
        std::vector<std::uint32_t> shared;
        auto pa = g.claim_parties(a);
        auto pb = g.claim_parties(b);
        std::set_intersection(pa.begin(), pa.end(), pb.begin(), pb.end(), std::back_inserter(shared));
        expected += shared.size() * (shared.size() - 1) / 2;
      }
    }
    EXPECT_EQ(enumerate_4cycles(g).size(), expected);
  }
}

TEST(Cycles, DegreeCapSkipsHubs) {
  // hub party with degree 5 plus a small clean square
  std::vector<EdgeRecord> records;
  for (int i = 0; i < 5; ++i) {
    records.push_back({"h" + std::to_string(i), "hub", PartyKind::Broker, 1.0, std::nullopt});
    records.push_back({"h" + std::to_string(i), "side", PartyKind::Broker, 1.0, std::nullopt});
  }
  records.push_back({"a", "x", PartyKind::Policyholder, 1.0, std::nullopt});
  records.push_back({"a", "y", PartyKind::Policyholder, 1.0, std::nullopt});
  records.push_back({"b", "x", PartyKind::Policyholder, 1.0, std::nullopt});
  records.push_back({"b", "y", PartyKind::Policyholder, 1.0, std::nullopt});
  const BipartiteGraph g = build_graph(records);

  EXPECT_EQ(enumerate_4cycles(g).size(), 10u + 1u);  // C(5,2) through hub+side, plus the square

  MotifOptions capped;
  capped.degree_cap = 4;  // drops hub and side (both degree 5)
  std::size_t count = 0;
  const MotifStats stats = for_each_4cycle(g, capped, [&](const CycleRecord&) { ++count; });
  EXPECT_EQ(count, 1u);
  EXPECT_EQ(stats.skipped_hub_parties, 2u);
}

TEST(Homophily, WorkedExampleHasNoFullyLabeledCycles) {
  const BipartiteGraph g = sample_network();
  const LabelMap labels(g, testsupport::sample_network_labels());
  const HomophilyReport report = homophily_report(g, labels);
  EXPECT_TRUE(report.cycle4.empty());
  EXPECT_TRUE(report.cycle6.empty());
}

TEST(Homophily, TwoDisjoint4CyclesHistogram) {
  std::vector<EdgeRecord> records = {
      {"f1", "pa", PartyKind::Policyholder, 1.0, std::nullopt},
      {"f1", "pb", PartyKind::Policyholder, 1.0, std::nullopt},
      {"f2", "pa", PartyKind::Policyholder, 1.0, std::nullopt},
      {"f2", "pb", PartyKind::Policyholder, 1.0, std::nullopt},
      {"n1", "pc", PartyKind::Policyholder, 1.0, std::nullopt},
      {"n1", "pd", PartyKind::Policyholder, 1.0, std::nullopt},
      {"n2", "pc", PartyKind::Policyholder, 1.0, std::nullopt},
      {"n2", "pd", PartyKind::Policyholder, 1.0, std::nullopt},
  };
  const BipartiteGraph g = build_graph(records);
  std::vector<LabelRecord> labels = {{"f1", ClaimLabel::Fraud, std::nullopt},
                                     {"f2", ClaimLabel::Fraud, std::nullopt},
                                     {"n1", ClaimLabel::NonFraud, std::nullopt},
                                     {"n2", ClaimLabel::NonFraud, std::nullopt}};
  const HomophilyReport report = homophily_report(g, LabelMap(g, labels));
  ASSERT_EQ(report.cycle4.support, 2u);
  const auto freq = report.cycle4.frequencies();
  EXPECT_DOUBLE_EQ(freq[0], 0.5);
  EXPECT_DOUBLE_EQ(freq[1], 0.0);
  EXPECT_DOUBLE_EQ(freq[2], 0.5);
}

TEST(Homophily, HistogramMatchesBruteForceOnRandomLabeledGraphs) {
  Rng rng(321);
  for (int trial = 0; trial < 10; ++trial) {
    testsupport::RandomGraphOptions opts;
    opts.max_claims = 12;
    opts.max_parties = 8;
    const BipartiteGraph g = build_graph(testsupport::random_edges(rng, opts));
    const LabelMap labels = testsupport::random_labels(g, rng, 0.4, 0.4);
    const HomophilyReport report = homophily_report(g, labels);

    std::array<std::size_t, 3> expected4{};
    std::size_t support4 = 0;
    for (const auto& edges : brute_force_4cycles(g)) {
      std::set<std::uint32_t> claims;
      for (const auto& [c, p] : edges) claims.insert(c);
      std::size_t fraud = 0;
      bool all_labeled = true;
      for (std::uint32_t c : claims) {
        if (labels.label(c) == ClaimLabel::Unknown) all_labeled = false;
        fraud += labels.label(c) == ClaimLabel::Fraud;
      }
      if (!all_labeled) continue;
      ++expected4[fraud];
      ++support4;
    }
    EXPECT_EQ(report.cycle4.support, support4);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(report.cycle4.counts[k], expected4[k]);

    if (support4 > 0) {
      double sum = 0.0;
      for (double f : report.cycle4.frequencies()) sum += f;
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(Homophily, PartyCompositionSplitUsesKindMapping) {
  // square with one garage: composition = person & company
  std::vector<EdgeRecord> records = {
      {"f1", "person", PartyKind::Broker, 1.0, std::nullopt},
      {"f1", "shop", PartyKind::Garage, 1.0, std::nullopt},
      {"f2", "person", PartyKind::Broker, 1.0, std::nullopt},
      {"f2", "shop", PartyKind::Garage, 1.0, std::nullopt},
  };
  const BipartiteGraph g = build_graph(records);
  std::vector<LabelRecord> labels = {{"f1", ClaimLabel::Fraud, std::nullopt},
                                     {"f2", ClaimLabel::Fraud, std::nullopt}};
  const HomophilyReport report = homophily_report(g, LabelMap(g, labels));
  EXPECT_EQ(report.cycle4_by_composition[static_cast<int>(PartyComposition::PersonCompany)].support, 1u);
  EXPECT_EQ(report.cycle4_by_composition[static_cast<int>(PartyComposition::TwoPeople)].support, 0u);
}

TEST(Homophily, NeighborhoodRatiosOnTheWorkedExample) {
  const BipartiteGraph g = sample_network();
  const LabelMap labels(g, testsupport::sample_network_labels());
  const HomophilyReport report = homophily_report(g, labels);
  // fraud origin: C4, N2 = {C1, C3, C5} all unknown -> ratios 0
  EXPECT_EQ(report.nbh2.origin_count[0], 1u);
  EXPECT_DOUBLE_EQ(report.nbh2.mean_fraud_ratio[0], 0.0);
  // nonfraud origin: C2, N2 = {C1, C5}, both unknown -> ratios 0
  EXPECT_EQ(report.nbh2.origin_count[1], 1u);
  EXPECT_DOUBLE_EQ(report.nbh2.mean_nonfraud_ratio[1], 0.0);
}

TEST(Homophily, ReportFilesAreWritten) {
  testsupport::TempDir tmp("homophily");
  const BipartiteGraph g = sample_network();
  const LabelMap labels(g, testsupport::sample_network_labels());
  const HomophilyReport report = homophily_report(g, labels);
  write_homophily_report(tmp.path("homophily.txt"), tmp.path("homophily"), report);
  EXPECT_NE(testsupport::slurp(tmp.path("homophily.txt")).find("cycle4.support: 0"), std::string::npos);
  EXPECT_FALSE(testsupport::slurp(tmp.path("homophily_cycle4.csv")).empty());
  EXPECT_FALSE(testsupport::slurp(tmp.path("homophily_cycle6.csv")).empty());
}
