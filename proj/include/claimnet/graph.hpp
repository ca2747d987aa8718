#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "claimnet/error.hpp"

namespace claimnet {

enum class NodeKind : std::uint8_t { Claim = 0, Party = 1 };

enum class PartyKind : std::uint8_t { Policyholder = 0, Broker = 1, Expert = 2, Garage = 3 };

inline constexpr const char* to_string(PartyKind k) {
  switch (k) {
    case PartyKind::Policyholder: return "policyholder";
    case PartyKind::Broker: return "broker";
    case PartyKind::Expert: return "expert";
    case PartyKind::Garage: return "garage";
  }
  return "?";
}

/// Case-insensitive parse of a party kind name.
inline std::optional<PartyKind> parse_party_kind(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "policyholder") return PartyKind::Policyholder;
  if (lower == "broker") return PartyKind::Broker;
  if (lower == "expert") return PartyKind::Expert;
  if (lower == "garage") return PartyKind::Garage;
  return std::nullopt;
}

/// Dense node handle: kind plus a stable 0-based index within that kind.
struct NodeId {
  NodeKind kind = NodeKind::Claim;
  std::uint32_t index = 0;

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

inline NodeId claim_node(std::uint32_t i) { return NodeId{NodeKind::Claim, i}; }
inline NodeId party_node(std::uint32_t j) { return NodeId{NodeKind::Party, j}; }

/// One ingested edge. Weight defaults to 1 (unweighted network).
struct EdgeRecord {
  std::string claim_id;
  std::string party_id;
  PartyKind party_kind = PartyKind::Policyholder;
  double weight = 1.0;
  std::optional<bool> is_company;  // optional override of the kind-derived person/company split
};

/// Exact k-step shell around an origin node: members are all the nodes at
/// graph distance exactly k. Shells of different order are disjoint and the
/// origin is never a member.
struct Neighborhood {
  NodeId origin;
  int order = 1;
  NodeKind member_kind = NodeKind::Party;
  std::vector<std::uint32_t> members;  // sorted, duplicate-free

  std::size_t size() const { return members.size(); }
  bool contains(std::uint32_t idx) const {
    return std::binary_search(members.begin(), members.end(), idx);
  }
};

// Immutable bipartite claim-party network. Both adjacency orientations are
// stored in CSR form with neighbor lists sorted ascending; degrees are the
// per-node sums of incident edge weights.
class BipartiteGraph {
 public:
  std::size_t claim_count() const { return claim_ids_.size(); }
  std::size_t party_count() const { return party_ids_.size(); }
  std::size_t edge_count() const { return claim_adj_.size(); }

  double total_edge_weight() const { return total_weight_; }

  std::span<const std::uint32_t> claim_parties(std::uint32_t i) const {
    check_claim(i);
    return {claim_adj_.data() + claim_offsets_[i], claim_adj_.data() + claim_offsets_[i + 1]};
  }
  std::span<const double> claim_party_weights(std::uint32_t i) const {
    check_claim(i);
    return {claim_w_.data() + claim_offsets_[i], claim_w_.data() + claim_offsets_[i + 1]};
  }
  std::span<const std::uint32_t> party_claims(std::uint32_t j) const {
    check_party(j);
    return {party_adj_.data() + party_offsets_[j], party_adj_.data() + party_offsets_[j + 1]};
  }
  std::span<const double> party_claim_weights(std::uint32_t j) const {
    check_party(j);
    return {party_w_.data() + party_offsets_[j], party_w_.data() + party_offsets_[j + 1]};
  }

  double claim_degree(std::uint32_t i) const {
    check_claim(i);
    return claim_degrees_[i];
  }
  double party_degree(std::uint32_t j) const {
    check_party(j);
    return party_degrees_[j];
  }

  double degree(NodeId node) const {
    return node.kind == NodeKind::Claim ? claim_degree(node.index) : party_degree(node.index);
  }

  const std::vector<double>& claim_degrees() const { return claim_degrees_; }
  const std::vector<double>& party_degrees() const { return party_degrees_; }

  PartyKind party_kind(std::uint32_t j) const {
    check_party(j);
    return party_kinds_[j];
  }

  /// Person/company attribution: explicit ingestion flag when present,
  /// otherwise derived from the kind (garages are companies, the rest people).
  bool party_is_company(std::uint32_t j) const {
    check_party(j);
    if (party_company_[j] >= 0) return party_company_[j] != 0;
    return party_kinds_[j] == PartyKind::Garage;
  }

  /// Raw ingestion flag: -1 when the is_company column was absent.
  std::int8_t party_company_flag(std::uint32_t j) const {
    check_party(j);
    return party_company_[j];
  }

  const std::string& claim_id(std::uint32_t i) const {
    check_claim(i);
    return claim_ids_[i];
  }
  const std::string& party_id(std::uint32_t j) const {
    check_party(j);
    return party_ids_[j];
  }

  std::optional<std::uint32_t> find_claim(std::string_view id) const {
    auto it = claim_index_.find(std::string(id));
    if (it == claim_index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<std::uint32_t> find_party(std::string_view id) const {
    auto it = party_index_.find(std::string(id));
    if (it == party_index_.end()) return std::nullopt;
    return it->second;
  }

  std::uint32_t require_claim(std::string_view id) const {
    if (auto c = find_claim(id)) return *c;
    throw DataError("unknown claim id '" + std::string(id) + "'");
  }

  bool has_edge(std::uint32_t claim, std::uint32_t party) const {
    auto nbrs = claim_parties(claim);
    return std::binary_search(nbrs.begin(), nbrs.end(), party);
  }

  double edge_weight(std::uint32_t claim, std::uint32_t party) const {
    auto nbrs = claim_parties(claim);
    auto it = std::lower_bound(nbrs.begin(), nbrs.end(), party);
    if (it == nbrs.end() || *it != party) return 0.0;
    return claim_w_[claim_offsets_[claim] + static_cast<std::size_t>(it - nbrs.begin())];
  }

  /// Exact k-step shell; k in {1, 2, 3, 4}.
  Neighborhood neighborhood(NodeId origin, int order) const;

  friend bool operator==(const BipartiteGraph& a, const BipartiteGraph& b) {
    return a.claim_ids_ == b.claim_ids_ && a.party_ids_ == b.party_ids_ &&
           a.party_kinds_ == b.party_kinds_ && a.party_company_ == b.party_company_ &&
           a.claim_offsets_ == b.claim_offsets_ && a.claim_adj_ == b.claim_adj_ &&
           a.claim_w_ == b.claim_w_;
  }

 private:
  void check_claim(std::uint32_t i) const {
    if (i >= claim_ids_.size()) throw DataError("unknown claim node index " + std::to_string(i));
  }
  void check_party(std::uint32_t j) const {
    if (j >= party_ids_.size()) throw DataError("unknown party node index " + std::to_string(j));
  }

  std::vector<std::string> claim_ids_, party_ids_;
  std::unordered_map<std::string, std::uint32_t> claim_index_, party_index_;
  std::vector<PartyKind> party_kinds_;
  std::vector<std::int8_t> party_company_;  // -1 = not provided

  std::vector<std::size_t> claim_offsets_;
  std::vector<std::uint32_t> claim_adj_;
  std::vector<double> claim_w_;
  std::vector<std::size_t> party_offsets_;
  std::vector<std::uint32_t> party_adj_;
  std::vector<double> party_w_;

  std::vector<double> claim_degrees_, party_degrees_;
  double total_weight_ = 0.0;

  friend BipartiteGraph build_graph(std::span<const EdgeRecord>);
};

/// Builds the finalized graph from an edge stream. Duplicate (claim, party)
/// pairs are merged by summing weights; indices are assigned in first-seen
/// order.
inline BipartiteGraph build_graph(std::span<const EdgeRecord> records) {
  if (records.empty()) throw DataError("empty edge input: a graph needs at least one edge");

  BipartiteGraph g;
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> edges;
  edges.reserve(records.size());

  std::size_t row = 0;
  for (const EdgeRecord& rec : records) {
    ++row;
    if (!(rec.weight > 0.0)) {
      throw DataError("non-positive weight at edge row " + std::to_string(row) + " (" + rec.claim_id +
                      "," + rec.party_id + ")");
    }
    auto [cit, cnew] = g.claim_index_.try_emplace(rec.claim_id, static_cast<std::uint32_t>(g.claim_ids_.size()));
    if (cnew) g.claim_ids_.push_back(rec.claim_id);
    auto [pit, pnew] = g.party_index_.try_emplace(rec.party_id, static_cast<std::uint32_t>(g.party_ids_.size()));
    if (pnew) {
      g.party_ids_.push_back(rec.party_id);
      g.party_kinds_.push_back(rec.party_kind);
      g.party_company_.push_back(rec.is_company ? static_cast<std::int8_t>(*rec.is_company) : std::int8_t{-1});
    } else {
      if (g.party_kinds_[pit->second] != rec.party_kind) {
        throw DataError("conflicting party kind for '" + rec.party_id + "'");
      }
      if (rec.is_company) {
        std::int8_t& flag = g.party_company_[pit->second];
        if (flag >= 0 && flag != static_cast<std::int8_t>(*rec.is_company)) {
          throw DataError("conflicting is_company flag for '" + rec.party_id + "'");
        }
        flag = static_cast<std::int8_t>(*rec.is_company);
      }
    }
    edges.emplace_back(cit->second, pit->second, rec.weight);
  }

  // Merge duplicates deterministically: sort by (claim, party), sum weights.
  std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> merged;
  merged.reserve(edges.size());
  for (const auto& e : edges) {
    if (!merged.empty() && std::get<0>(merged.back()) == std::get<0>(e) &&
        std::get<1>(merged.back()) == std::get<1>(e)) {
      std::get<2>(merged.back()) += std::get<2>(e);
    } else {
      merged.push_back(e);
    }
  }

  const std::size_t n_c = g.claim_ids_.size();
  const std::size_t n_p = g.party_ids_.size();

  g.claim_offsets_.assign(n_c + 1, 0);
  g.party_offsets_.assign(n_p + 1, 0);
  for (const auto& [c, p, w] : merged) {
    ++g.claim_offsets_[c + 1];
    ++g.party_offsets_[p + 1];
  }
  for (std::size_t i = 0; i < n_c; ++i) g.claim_offsets_[i + 1] += g.claim_offsets_[i];
  for (std::size_t j = 0; j < n_p; ++j) g.party_offsets_[j + 1] += g.party_offsets_[j];

  g.claim_adj_.resize(merged.size());
  g.claim_w_.resize(merged.size());
  g.party_adj_.resize(merged.size());
  g.party_w_.resize(merged.size());
  g.claim_degrees_.assign(n_c, 0.0);
  g.party_degrees_.assign(n_p, 0.0);

  std::vector<std::size_t> cpos(g.claim_offsets_.begin(), g.claim_offsets_.end() - 1);
  std::vector<std::size_t> ppos(g.party_offsets_.begin(), g.party_offsets_.end() - 1);
  for (const auto& [c, p, w] : merged) {
    g.claim_adj_[cpos[c]] = p;
    g.claim_w_[cpos[c]] = w;
    ++cpos[c];
    g.party_adj_[ppos[p]] = c;
    g.party_w_[ppos[p]] = w;
    ++ppos[p];
    g.claim_degrees_[c] += w;
    g.party_degrees_[p] += w;
    g.total_weight_ += w;
  }
  // Per-claim lists are already sorted by party (global sort order); the
  // party-side lists are sorted by claim because edges were visited in
  // ascending claim order.
  return g;
}

inline Neighborhood BipartiteGraph::neighborhood(NodeId origin, int order) const {
  if (order < 1 || order > 4) {
    throw DataError("unsupported neighborhood order " + std::to_string(order) + " (supported: 1..4)");
  }
  if (origin.kind == NodeKind::Claim) {
    check_claim(origin.index);
  } else {
    check_party(origin.index);
  }

  // BFS shells. visited flags per kind keep shells disjoint and exclude the
  // origin from even-order shells.
  std::vector<std::uint8_t> seen_claim(claim_count(), 0), seen_party(party_count(), 0);
  std::vector<std::uint32_t> frontier{origin.index};
  NodeKind frontier_kind = origin.kind;
  if (frontier_kind == NodeKind::Claim) {
    seen_claim[origin.index] = 1;
  } else {
    seen_party[origin.index] = 1;
  }

  for (int step = 0; step < order; ++step) {
    std::vector<std::uint32_t> next;
    auto& seen_next = frontier_kind == NodeKind::Claim ? seen_party : seen_claim;
    for (std::uint32_t u : frontier) {
      auto nbrs = frontier_kind == NodeKind::Claim ? claim_parties(u) : party_claims(u);
      for (std::uint32_t v : nbrs) {
        if (!seen_next[v]) {
          seen_next[v] = 1;
          next.push_back(v);
        }
      }
    }
    frontier = std::move(next);
    frontier_kind = frontier_kind == NodeKind::Claim ? NodeKind::Party : NodeKind::Claim;
  }

  std::sort(frontier.begin(), frontier.end());
  return Neighborhood{origin, order, frontier_kind, std::move(frontier)};
}

}  // namespace claimnet
