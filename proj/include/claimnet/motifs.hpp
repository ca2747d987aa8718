#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "claimnet/csv.hpp"
#include "claimnet/graph.hpp"
#include "claimnet/labels.hpp"

namespace claimnet {

// Canonical alternating cycle. For length 4 the stored sequence is
// (claims[0], parties[0], claims[1], parties[1]) with claims[0] < claims[1]
// and parties[0] < parties[1]; for length 6 the walk claims[0]-parties[0]-
// claims[1]-parties[1]-claims[2]-parties[2] starts at the smallest claim and
// runs toward its smaller incident party, which makes the sequence the
// lexicographically smallest rotation/reflection.
struct CycleRecord {
  int length = 4;
  std::array<std::uint32_t, 3> claims{};   // first length/2 entries used
  std::array<std::uint32_t, 3> parties{};  // first length/2 entries used

  friend auto operator<=>(const CycleRecord&, const CycleRecord&) = default;
};

struct MotifOptions {
  // Nodes with degree above the cap are skipped during enumeration to guard
  // against super-hub blowup; every skip is counted.
  std::size_t degree_cap = 10000;
};

struct MotifStats {
  std::size_t skipped_hub_claims = 0;
  std::size_t skipped_hub_parties = 0;
};

namespace detail {

inline std::size_t claim_arity(const BipartiteGraph& g, std::uint32_t i) {
  return g.claim_parties(i).size();
}
inline std::size_t party_arity(const BipartiteGraph& g, std::uint32_t j) {
  return g.party_claims(j).size();
}

}  // namespace detail

/// Visits every 4-cycle exactly once in canonical form.
template <typename Fn>
MotifStats for_each_4cycle(const BipartiteGraph& g, const MotifOptions& opts, Fn&& fn) {
  MotifStats stats;
  // Wedge approach anchored at the smaller claim: for claims a < b, every
  // unordered pair of shared parties is one 4-cycle.
  std::vector<std::uint32_t> shared;
  for (std::uint32_t a = 0; a < g.claim_count(); ++a) {
    if (detail::claim_arity(g, a) > opts.degree_cap) {
      ++stats.skipped_hub_claims;
      continue;
    }
    auto a_parties = g.claim_parties(a);
    // Candidate partners: claims > a reachable through a's parties.
    std::vector<std::uint32_t> partners;
    for (std::uint32_t p : a_parties) {
      if (detail::party_arity(g, p) > opts.degree_cap) continue;  // counted below, once
      for (std::uint32_t b : g.party_claims(p)) {
        if (b > a) partners.push_back(b);
      }
    }
    std::sort(partners.begin(), partners.end());
    partners.erase(std::unique(partners.begin(), partners.end()), partners.end());
    for (std::uint32_t b : partners) {
      if (detail::claim_arity(g, b) > opts.degree_cap) continue;
      shared.clear();
      auto b_parties = g.claim_parties(b);
      std::set_intersection(a_parties.begin(), a_parties.end(), b_parties.begin(), b_parties.end(),
                            std::back_inserter(shared));
      // drop capped hub parties from the shared set
      shared.erase(std::remove_if(shared.begin(), shared.end(),
                                  [&](std::uint32_t p) { return detail::party_arity(g, p) > opts.degree_cap; }),
                   shared.end());
      for (std::size_t x = 0; x + 1 < shared.size(); ++x) {
        for (std::size_t y = x + 1; y < shared.size(); ++y) {
          CycleRecord rec;
          rec.length = 4;
          rec.claims = {a, b, 0};
          rec.parties = {shared[x], shared[y], 0};
          fn(rec);
        }
      }
    }
  }
  for (std::uint32_t p = 0; p < g.party_count(); ++p) {
    if (detail::party_arity(g, p) > opts.degree_cap) ++stats.skipped_hub_parties;
  }
  return stats;
}

/// Visits every 6-cycle exactly once in canonical form. The anchor is the
/// smallest claim; the reflection is collapsed by requiring the second
/// claim (reached first) to be smaller than the third.
template <typename Fn>
MotifStats for_each_6cycle(const BipartiteGraph& g, const MotifOptions& opts, Fn&& fn) {
  MotifStats stats;
  std::vector<std::uint32_t> common;
  for (std::uint32_t a = 0; a < g.claim_count(); ++a) {
    if (detail::claim_arity(g, a) > opts.degree_cap) {
      ++stats.skipped_hub_claims;
      continue;
    }
    auto a_parties = g.claim_parties(a);
    for (std::uint32_t x : a_parties) {
      if (detail::party_arity(g, x) > opts.degree_cap) continue;
      for (std::uint32_t b : g.party_claims(x)) {
        if (b <= a || detail::claim_arity(g, b) > opts.degree_cap) continue;
        for (std::uint32_t z : a_parties) {
          if (z == x || detail::party_arity(g, z) > opts.degree_cap) continue;
          for (std::uint32_t c : g.party_claims(z)) {
            if (c <= b || detail::claim_arity(g, c) > opts.degree_cap) continue;
            // parties adjacent to both b and c, excluding x and z
            common.clear();
            auto bp = g.claim_parties(b);
            auto cp = g.claim_parties(c);
            std::set_intersection(bp.begin(), bp.end(), cp.begin(), cp.end(),
                                  std::back_inserter(common));
            for (std::uint32_t y : common) {
              if (y == x || y == z) continue;
              if (detail::party_arity(g, y) > opts.degree_cap) continue;
              CycleRecord rec;
              rec.length = 6;
              // Walk a-x-b-y-c-z; store the direction whose first party is smaller.
              if (x < z) {
                rec.claims = {a, b, c};
                rec.parties = {x, y, z};
              } else {
                rec.claims = {a, c, b};
                rec.parties = {z, y, x};
              }
              fn(rec);
            }
          }
        }
      }
    }
  }
  for (std::uint32_t p = 0; p < g.party_count(); ++p) {
    if (detail::party_arity(g, p) > opts.degree_cap) ++stats.skipped_hub_parties;
  }
  return stats;
}

inline std::vector<CycleRecord> enumerate_4cycles(const BipartiteGraph& g, const MotifOptions& opts = {}) {
  std::vector<CycleRecord> out;
  for_each_4cycle(g, opts, [&](const CycleRecord& r) { out.push_back(r); });
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<CycleRecord> enumerate_6cycles(const BipartiteGraph& g, const MotifOptions& opts = {}) {
  std::vector<CycleRecord> out;
  for_each_6cycle(g, opts, [&](const CycleRecord& r) { out.push_back(r); });
  std::sort(out.begin(), out.end());
  return out;
}

/// Relative label frequencies over fully labeled cycles.
struct CycleHistogram {
  std::vector<std::size_t> counts;  // index = number of fraud claims in the cycle
  std::size_t support = 0;

  bool empty() const { return support == 0; }
  std::vector<double> frequencies() const {
    std::vector<double> f(counts.size(), 0.0);
    if (support == 0) return f;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      f[i] = static_cast<double>(counts[i]) / static_cast<double>(support);
    }
    return f;
  }
};

enum class PartyComposition : std::uint8_t { TwoPeople = 0, PersonCompany = 1, TwoCompanies = 2 };

inline constexpr const char* to_string(PartyComposition c) {
  switch (c) {
    case PartyComposition::TwoPeople: return "two_people";
    case PartyComposition::PersonCompany: return "person_company";
    case PartyComposition::TwoCompanies: return "two_companies";
  }
  return "?";
}

/// Mean fraud / non-fraud ratios in the k-th order neighborhoods of labeled
/// claims, denominators including unknown claims. Indexed by origin label.
struct NeighborhoodHomophily {
  int order = 2;
  std::array<std::size_t, 2> origin_count{};        // [fraud origins, nonfraud origins]
  std::array<double, 2> mean_fraud_ratio{};         // mean over origins with that label
  std::array<double, 2> mean_nonfraud_ratio{};
};

struct HomophilyReport {
  CycleHistogram cycle4;                                 // support {0,1,2} fraud claims
  std::array<CycleHistogram, 3> cycle4_by_composition;   // indexed by PartyComposition
  CycleHistogram cycle6;                                 // support {0,1,2,3} fraud claims
  NeighborhoodHomophily nbh2;
  NeighborhoodHomophily nbh4;
  MotifStats stats4, stats6;
};

inline HomophilyReport homophily_report(const BipartiteGraph& g, const LabelMap& labels,
                                        const MotifOptions& opts = {}) {
  HomophilyReport report;
  report.cycle4.counts.assign(3, 0);
  for (auto& h : report.cycle4_by_composition) h.counts.assign(3, 0);
  report.cycle6.counts.assign(4, 0);

  auto label_of = [&](std::uint32_t claim) { return labels.label(claim); };

  report.stats4 = for_each_4cycle(g, opts, [&](const CycleRecord& r) {
    const ClaimLabel l0 = label_of(r.claims[0]);
    const ClaimLabel l1 = label_of(r.claims[1]);
    if (l0 == ClaimLabel::Unknown || l1 == ClaimLabel::Unknown) return;
    const std::size_t frauds = (l0 == ClaimLabel::Fraud) + (l1 == ClaimLabel::Fraud);
    ++report.cycle4.counts[frauds];
    ++report.cycle4.support;
    const int companies = g.party_is_company(r.parties[0]) + g.party_is_company(r.parties[1]);
    auto& split = report.cycle4_by_composition[static_cast<std::size_t>(companies)];
    ++split.counts[frauds];
    ++split.support;
  });

  report.stats6 = for_each_6cycle(g, opts, [&](const CycleRecord& r) {
    std::size_t frauds = 0;
    for (int k = 0; k < 3; ++k) {
      const ClaimLabel l = label_of(r.claims[static_cast<std::size_t>(k)]);
      if (l == ClaimLabel::Unknown) return;
      frauds += l == ClaimLabel::Fraud;
    }
    ++report.cycle6.counts[frauds];
    ++report.cycle6.support;
  });

  for (int order : {2, 4}) {
    NeighborhoodHomophily& nbh = order == 2 ? report.nbh2 : report.nbh4;
    nbh.order = order;
    std::array<double, 2> fraud_sum{}, nonfraud_sum{};
    for (std::uint32_t i = 0; i < g.claim_count(); ++i) {
      const ClaimLabel l = labels.label(i);
      if (l == ClaimLabel::Unknown) continue;
      const std::size_t origin = l == ClaimLabel::Fraud ? 0 : 1;
      const Neighborhood n = g.neighborhood(claim_node(i), order);
      double rf = 0.0, rn = 0.0;
      if (!n.members.empty()) {
        std::size_t fraud = 0, nonfraud = 0;
        for (std::uint32_t m : n.members) {
          const ClaimLabel lm = labels.label(m);
          fraud += lm == ClaimLabel::Fraud;
          nonfraud += lm == ClaimLabel::NonFraud;
        }
        rf = static_cast<double>(fraud) / static_cast<double>(n.size());
        rn = static_cast<double>(nonfraud) / static_cast<double>(n.size());
      }
      ++nbh.origin_count[origin];
      fraud_sum[origin] += rf;
      nonfraud_sum[origin] += rn;
    }
    for (std::size_t o = 0; o < 2; ++o) {
      if (nbh.origin_count[o] > 0) {
        nbh.mean_fraud_ratio[o] = fraud_sum[o] / static_cast<double>(nbh.origin_count[o]);
        nbh.mean_nonfraud_ratio[o] = nonfraud_sum[o] / static_cast<double>(nbh.origin_count[o]);
      }
    }
  }
  return report;
}

inline void write_cycles_csv(const std::string& path, const BipartiteGraph& g,
                             std::span<const CycleRecord> cycles, int length) {
  CsvWriter w(path);
  std::vector<std::string> header{"length"};
  for (int k = 0; k < length / 2; ++k) header.push_back("claim_" + std::to_string(k + 1));
  for (int k = 0; k < length / 2; ++k) header.push_back("party_" + std::to_string(k + 1));
  w.write_row(header);
  for (const CycleRecord& r : cycles) {
    std::vector<std::string> row{std::to_string(r.length)};
    for (int k = 0; k < length / 2; ++k) row.push_back(g.claim_id(r.claims[static_cast<std::size_t>(k)]));
    for (int k = 0; k < length / 2; ++k) row.push_back(g.party_id(r.parties[static_cast<std::size_t>(k)]));
    w.write_row(row);
  }
  w.close();
}

inline void write_homophily_report(const std::string& text_path, const std::string& csv_prefix,
                                   const HomophilyReport& report) {
  {
    std::ofstream out(text_path);
    if (!out) throw IoError("cannot open '" + text_path + "'");
    auto hist_line = [&](const std::string& key, const CycleHistogram& h) {
      out << key << ".support: " << h.support << "\n";
      const auto freq = h.frequencies();
      for (std::size_t i = 0; i < freq.size(); ++i) {
        out << key << ".fraud" << i << ": " << (h.empty() ? "n/a" : format_double(freq[i])) << "\n";
      }
    };
    hist_line("cycle4", report.cycle4);
    for (std::size_t c = 0; c < 3; ++c) {
      hist_line("cycle4." + std::string(to_string(static_cast<PartyComposition>(c))),
                report.cycle4_by_composition[c]);
    }
    hist_line("cycle6", report.cycle6);
    for (const auto* nbh : {&report.nbh2, &report.nbh4}) {
      const std::string key = "n" + std::to_string(nbh->order);
      const char* origins[2] = {"fraud", "nonfraud"};
      for (std::size_t o = 0; o < 2; ++o) {
        out << key << ".origin_" << origins[o] << ".count: " << nbh->origin_count[o] << "\n";
        out << key << ".origin_" << origins[o] << ".mean_fraud_ratio: " << format_double(nbh->mean_fraud_ratio[o]) << "\n";
        out << key << ".origin_" << origins[o] << ".mean_nonfraud_ratio: " << format_double(nbh->mean_nonfraud_ratio[o]) << "\n";
      }
    }
    out << "cycle4.skipped_hub_parties: " << report.stats4.skipped_hub_parties << "\n";
    out << "cycle6.skipped_hub_parties: " << report.stats6.skipped_hub_parties << "\n";
  }
  for (const auto& [name, hist] : std::initializer_list<std::pair<std::string, const CycleHistogram*>>{
           {"cycle4", &report.cycle4}, {"cycle6", &report.cycle6}}) {
    CsvWriter w(csv_prefix + "_" + name + ".csv");
    w.write_row({"fraud_claims", "count", "relative_frequency"});
    const auto freq = hist->frequencies();
    for (std::size_t i = 0; i < hist->counts.size(); ++i) {
      w.write_row({std::to_string(i), std::to_string(hist->counts[i]), format_double(freq[i])});
    }
    w.close();
  }
}

}  // namespace claimnet
