#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "claimnet/csv.hpp"
#include "claimnet/date.hpp"
#include "claimnet/error.hpp"
#include "claimnet/graph.hpp"
#include "claimnet/labels.hpp"
#include "claimnet/random.hpp"

namespace claimnet {

// Synthetic claim-party networks with planted fraud rings. Ring claims share
// dedicated parties, which creates the 4-/6-cycle structure that collusion
// leaves in a real portfolio; fraud concentrates on ring claims in proportion
// to homophily_strength.
struct SynthConfig {
  std::size_t n_claims = 50000;
  std::size_t n_policyholders = 19200;
  std::size_t n_brokers = 80;
  std::size_t n_experts = 75;
  std::size_t n_garages = 645;

  double claim_degree_mean = 3.79;  // extra party slots are 1 + Poisson(mean - 1)
  // popularity skew per kind (zipf exponent): larger means heavier hubs
  double zipf_policyholder = 0.6;
  double zipf_broker = 1.0;
  double zipf_expert = 1.1;
  double zipf_garage = 0.9;
  // kind mix for the non-policyholder slots of a claim
  double slot_policyholder = 0.30;
  double slot_broker = 0.38;
  double slot_expert = 0.21;
  double slot_garage = 0.11;
  std::size_t max_party_degree = 50000;

  std::size_t n_rings = 150;
  std::size_t ring_size = 6;            // claims per ring
  std::size_t ring_shared_parties = 2;  // dedicated parties shared by the whole ring

  double fraud_rate = 0.02;
  double homophily_strength = 0.9;  // probability a fraud draw lands on a ring claim
  double label_known_rate = 0.04;   // baseline investigation probability
  double fraud_label_boost = 15.0;  // investigation multiplier for fraud claims
  // Investigations are not uniform: claim handlers flag claims close to fraud
  // circles, so non-fraud claims touching a ring party are investigated more.
  double investigation_bias = 6.0;

  // Intrinsic features: amount/daysReport/police pick up signal when
  // intrinsic_signal_strength > 0; the default of 0 keeps them pure noise.
  double intrinsic_signal_strength = 0.0;
  std::size_t n_noise_features = 3;

  int horizon_years = 6;
  std::string start_date = "2018-01-01";
  std::uint64_t seed = 42;

  void validate() const {
    auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
    if (n_claims == 0) throw ConfigError("n_claims must be positive");
    if (n_policyholders == 0) throw ConfigError("need at least one policyholder");
    if (!rate_ok(fraud_rate) || !rate_ok(homophily_strength) || !rate_ok(label_known_rate)) {
      throw ConfigError("rates must lie in [0, 1]");
    }
    if (claim_degree_mean < 1.0) throw ConfigError("claim_degree_mean must be >= 1");
    if (horizon_years < 1) throw ConfigError("horizon_years must be >= 1");
    if (fraud_label_boost < 0.0 || investigation_bias < 0.0) {
      throw ConfigError("label multipliers must be non-negative");
    }
    if (n_rings > 0) {
      if (ring_size < 2) throw ConfigError("ring_size must be >= 2");
      if (ring_shared_parties < 1) throw ConfigError("ring_shared_parties must be >= 1");
      if (n_rings * ring_size > n_claims) {
        throw ConfigError("infeasible config: ring_size * n_rings exceeds n_claims");
      }
    }
    const double slot_sum = slot_policyholder + slot_broker + slot_expert + slot_garage;
    if (std::abs(slot_sum - 1.0) > 1e-9) throw ConfigError("slot kind mix must sum to 1");
  }

  nlohmann::json to_json() const;
  static SynthConfig from_json(const nlohmann::json& j);
};

inline nlohmann::json SynthConfig::to_json() const {
  return nlohmann::json{{"n_claims", n_claims},
                        {"n_policyholders", n_policyholders},
                        {"n_brokers", n_brokers},
                        {"n_experts", n_experts},
                        {"n_garages", n_garages},
                        {"claim_degree_mean", claim_degree_mean},
                        {"zipf_policyholder", zipf_policyholder},
                        {"zipf_broker", zipf_broker},
                        {"zipf_expert", zipf_expert},
                        {"zipf_garage", zipf_garage},
                        {"slot_policyholder", slot_policyholder},
                        {"slot_broker", slot_broker},
                        {"slot_expert", slot_expert},
                        {"slot_garage", slot_garage},
                        {"max_party_degree", max_party_degree},
                        {"n_rings", n_rings},
                        {"ring_size", ring_size},
                        {"ring_shared_parties", ring_shared_parties},
                        {"fraud_rate", fraud_rate},
                        {"homophily_strength", homophily_strength},
                        {"label_known_rate", label_known_rate},
                        {"fraud_label_boost", fraud_label_boost},
                        {"investigation_bias", investigation_bias},
                        {"intrinsic_signal_strength", intrinsic_signal_strength},
                        {"n_noise_features", n_noise_features},
                        {"horizon_years", horizon_years},
                        {"start_date", start_date},
                        {"seed", seed}};
}

inline SynthConfig SynthConfig::from_json(const nlohmann::json& j) {
  SynthConfig cfg;
  if (!j.contains("seed")) throw ConfigError("synth config requires an explicit seed");
  cfg.seed = j.at("seed").get<std::uint64_t>();
  auto opt = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  opt("n_claims", cfg.n_claims);
  opt("n_policyholders", cfg.n_policyholders);
  opt("n_brokers", cfg.n_brokers);
  opt("n_experts", cfg.n_experts);
  opt("n_garages", cfg.n_garages);
  opt("claim_degree_mean", cfg.claim_degree_mean);
  opt("zipf_policyholder", cfg.zipf_policyholder);
  opt("zipf_broker", cfg.zipf_broker);
  opt("zipf_expert", cfg.zipf_expert);
  opt("zipf_garage", cfg.zipf_garage);
  opt("slot_policyholder", cfg.slot_policyholder);
  opt("slot_broker", cfg.slot_broker);
  opt("slot_expert", cfg.slot_expert);
  opt("slot_garage", cfg.slot_garage);
  opt("max_party_degree", cfg.max_party_degree);
  opt("n_rings", cfg.n_rings);
  opt("ring_size", cfg.ring_size);
  opt("ring_shared_parties", cfg.ring_shared_parties);
  opt("fraud_rate", cfg.fraud_rate);
  opt("homophily_strength", cfg.homophily_strength);
  opt("label_known_rate", cfg.label_known_rate);
  opt("fraud_label_boost", cfg.fraud_label_boost);
  opt("investigation_bias", cfg.investigation_bias);
  opt("intrinsic_signal_strength", cfg.intrinsic_signal_strength);
  opt("n_noise_features", cfg.n_noise_features);
  opt("horizon_years", cfg.horizon_years);
  opt("start_date", cfg.start_date);
  cfg.validate();
  return cfg;
}

struct IntrinsicTable {
  std::vector<std::string> columns;  // feature names, excluding claim_id and fraud
  std::vector<std::string> claim_ids;
  std::vector<std::vector<double>> rows;
  std::vector<ClaimLabel> fraud_column;  // mirrors the observed label
};

struct SynthData {
  std::vector<EdgeRecord> edges;
  std::vector<LabelRecord> labels;   // one row per claim, all with filing dates
  IntrinsicTable intrinsic;
  std::vector<std::vector<std::uint32_t>> rings;  // claim indices per planted ring
  std::vector<bool> true_fraud;                   // ground truth before label subsampling
  std::vector<bool> ring_adjacent;                // shares at least one party with a ring claim
};

namespace detail {

class PartyPool {
 public:
  PartyPool(std::string prefix, PartyKind kind, std::size_t n, double zipf_s, std::size_t max_degree)
      : prefix_(std::move(prefix)), kind_(kind), degree_(n, 0), max_degree_(max_degree) {
    cumulative_.reserve(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += 1.0 / std::pow(static_cast<double>(i + 1), zipf_s);
      cumulative_.push_back(acc);
    }
  }

  PartyKind kind() const { return kind_; }

  /// Popularity-weighted draw honoring the degree cap.
  std::size_t draw(Rng& rng) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      const double u = rng.uniform() * cumulative_.back();
      const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
      const auto idx = static_cast<std::size_t>(it - cumulative_.begin());
      if (degree_[idx] < max_degree_) {
        ++degree_[idx];
        return idx;
      }
    }
    throw ConfigError("max_party_degree too tight: cannot place edges");
  }

  std::string id(std::size_t idx) const {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%06zu", prefix_.c_str(), idx + 1);
    return buf;
  }

 private:
  std::string prefix_;
  PartyKind kind_;
  std::vector<double> cumulative_;
  std::vector<std::size_t> degree_;
  std::size_t max_degree_;
};

inline std::string claim_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "C%07zu", i + 1);
  return buf;
}

}  // namespace detail

inline SynthData generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng root(cfg.seed);
  Rng rng_dates = root.split(1);
  Rng rng_edges = root.split(2);
  Rng rng_rings = root.split(3);
  Rng rng_fraud = root.split(4);
  Rng rng_labels = root.split(5);
  Rng rng_intr = root.split(6);

  const Date start = parse_date(cfg.start_date);
  const int horizon_days = cfg.horizon_years * 365;

  SynthData data;
  const std::size_t n = cfg.n_claims;

  // filing dates, uniform over the horizon
  std::vector<Date> filing(n);
  for (std::size_t i = 0; i < n; ++i) {
    filing[i] = Date{start.days + static_cast<std::int32_t>(rng_dates.uniform_index(static_cast<std::uint64_t>(horizon_days)))};
  }

  // ring membership
  std::vector<std::int32_t> ring_of(n, -1);
  {
    std::vector<std::uint32_t> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    rng_rings.shuffle(ids);
    std::size_t next = 0;
    data.rings.resize(cfg.n_rings);
    for (std::size_t r = 0; r < cfg.n_rings; ++r) {
      for (std::size_t k = 0; k < cfg.ring_size; ++k) {
        const std::uint32_t c = ids[next++];
        ring_of[c] = static_cast<std::int32_t>(r);
        data.rings[r].push_back(c);
      }
      std::sort(data.rings[r].begin(), data.rings[r].end());
    }
  }

  // ground-truth fraud: each draw lands on a ring claim with probability
  // homophily_strength (while ring claims remain), otherwise anywhere
  data.true_fraud.assign(n, false);
  {
    const auto n_fraud = static_cast<std::size_t>(std::llround(cfg.fraud_rate * static_cast<double>(n)));
    std::vector<std::uint32_t> ring_pool;
    for (std::size_t i = 0; i < n; ++i) {
      if (ring_of[i] >= 0) ring_pool.push_back(static_cast<std::uint32_t>(i));
    }
    std::vector<std::uint32_t> global_pool(n);
    std::iota(global_pool.begin(), global_pool.end(), 0);

    auto pop_random = [](std::vector<std::uint32_t>& pool, Rng& rng) {
      const std::size_t k = rng.uniform_index(pool.size());
      const std::uint32_t v = pool[k];
      pool[k] = pool.back();
      pool.pop_back();
      return v;
    };

    std::size_t placed = 0;
    while (placed < n_fraud) {
      const bool use_ring = !ring_pool.empty() && rng_fraud.uniform() < cfg.homophily_strength;
      auto& pool = use_ring ? ring_pool : global_pool;
      if (pool.empty()) break;
      const std::uint32_t c = pop_random(pool, rng_fraud);
      if (data.true_fraud[c]) continue;  // already drawn via the other pool
      data.true_fraud[c] = true;
      ++placed;
    }
  }

  // edges: every claim gets one policyholder plus Poisson extra slots
  detail::PartyPool pool_ph("PH", PartyKind::Policyholder, cfg.n_policyholders, cfg.zipf_policyholder, cfg.max_party_degree);
  detail::PartyPool pool_br("BR", PartyKind::Broker, std::max<std::size_t>(cfg.n_brokers, 1), cfg.zipf_broker, cfg.max_party_degree);
  detail::PartyPool pool_ex("EX", PartyKind::Expert, std::max<std::size_t>(cfg.n_experts, 1), cfg.zipf_expert, cfg.max_party_degree);
  detail::PartyPool pool_ga("GA", PartyKind::Garage, std::max<std::size_t>(cfg.n_garages, 1), cfg.zipf_garage, cfg.max_party_degree);

  std::vector<std::size_t> edge_begin(n), edge_end(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string claim_id = detail::claim_name(i);
    edge_begin[i] = data.edges.size();
    std::unordered_set<std::string> used;
    auto add_edge = [&](const std::string& party_id, PartyKind kind) {
      if (!used.insert(party_id).second) return false;
      data.edges.push_back(EdgeRecord{claim_id, party_id, kind, 1.0, std::nullopt});
      return true;
    };

    add_edge(pool_ph.id(pool_ph.draw(rng_edges)), PartyKind::Policyholder);
    const int extra = rng_edges.poisson(cfg.claim_degree_mean - 1.0);
    for (int s = 0; s < extra; ++s) {
      const double u = rng_edges.uniform();
      detail::PartyPool* pool = nullptr;
      if (u < cfg.slot_policyholder) {
        pool = &pool_ph;
      } else if (u < cfg.slot_policyholder + cfg.slot_broker) {
        pool = &pool_br;
      } else if (u < cfg.slot_policyholder + cfg.slot_broker + cfg.slot_expert) {
        pool = &pool_ex;
      } else {
        pool = &pool_ga;
      }
      for (int attempt = 0; attempt < 8; ++attempt) {
        if (add_edge(pool->id(pool->draw(rng_edges)), pool->kind())) break;
      }
    }

    if (ring_of[i] >= 0) {
      for (std::size_t s = 0; s < cfg.ring_shared_parties; ++s) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "RP%05d_%zu", ring_of[i], s + 1);
        add_edge(buf, PartyKind::Policyholder);
      }
    }
    edge_end[i] = data.edges.size();
  }

  // ring adjacency: any claim that shares a party with a ring claim
  data.ring_adjacent.assign(n, false);
  {
    std::unordered_set<std::string> ring_parties;
    for (std::size_t i = 0; i < n; ++i) {
      if (ring_of[i] < 0) continue;
      for (std::size_t e = edge_begin[i]; e < edge_end[i]; ++e) {
        ring_parties.insert(data.edges[e].party_id);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t e = edge_begin[i]; e < edge_end[i]; ++e) {
        if (ring_parties.count(data.edges[e].party_id)) {
          data.ring_adjacent[i] = true;
          break;
        }
      }
    }
  }

  // observed labels: investigation subsampling, biased toward fraud and
  // toward claims in or next to fraud circles (the business-rule effect)
  data.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double factor = 1.0;
    if (data.true_fraud[i]) {
      factor = cfg.fraud_label_boost;
    } else if (data.ring_adjacent[i]) {
      factor = cfg.investigation_bias;
    }
    const double p_label = std::min(1.0, cfg.label_known_rate * factor);
    const bool investigated = rng_labels.bernoulli(p_label);
    LabelRecord rec;
    rec.claim_id = detail::claim_name(i);
    rec.label = investigated ? (data.true_fraud[i] ? ClaimLabel::Fraud : ClaimLabel::NonFraud)
                             : ClaimLabel::Unknown;
    rec.filing_date = filing[i];
    data.labels.push_back(std::move(rec));
  }

  // intrinsic features; signal enters amount / daysReport / police when
  // intrinsic_signal_strength > 0
  auto& tab = data.intrinsic;
  tab.columns = {"age", "numContracts", "claimAge", "nClaims5", "amount", "daysReport", "police"};
  for (std::size_t k = 0; k < cfg.n_noise_features; ++k) {
    tab.columns.push_back("noise" + std::to_string(k + 1));
  }
  const double sig = cfg.intrinsic_signal_strength;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row;
    row.reserve(tab.columns.size());
    const double is_fraud = data.true_fraud[i] ? 1.0 : 0.0;
    row.push_back(std::clamp(std::round(rng_intr.normal(45.0, 12.0)), 18.0, 90.0));
    row.push_back(1.0 + rng_intr.poisson(1.5));
    row.push_back(std::round(rng_intr.uniform(0.0, 120.0)));
    row.push_back(static_cast<double>(rng_intr.poisson(1.2)));
    row.push_back(std::round(std::exp(rng_intr.normal(7.2, 1.0) + sig * is_fraud) * 100.0) / 100.0);
    row.push_back(static_cast<double>(rng_intr.poisson(5.0)) + std::round(3.0 * sig) * is_fraud);
    row.push_back(rng_intr.bernoulli(std::min(0.95, 0.3 + 0.3 * sig * is_fraud)) ? 1.0 : 0.0);
    for (std::size_t k = 0; k < cfg.n_noise_features; ++k) row.push_back(rng_intr.normal());
    tab.claim_ids.push_back(detail::claim_name(i));
    tab.rows.push_back(std::move(row));
    tab.fraud_column.push_back(data.labels[i].label);
  }
  return data;
}

inline void write_intrinsic_csv(const std::string& path, const IntrinsicTable& tab) {
  CsvWriter w(path);
  std::vector<std::string> header{"claim_id"};
  header.insert(header.end(), tab.columns.begin(), tab.columns.end());
  header.push_back("fraud");
  w.write_row(header);
  for (std::size_t r = 0; r < tab.rows.size(); ++r) {
    std::vector<std::string> row{tab.claim_ids[r]};
    for (double v : tab.rows[r]) row.push_back(format_double(v));
    switch (tab.fraud_column[r]) {
      case ClaimLabel::Fraud: row.push_back("yes"); break;
      case ClaimLabel::NonFraud: row.push_back("no"); break;
      case ClaimLabel::Unknown: row.push_back("unknown"); break;
    }
    w.write_row(row);
  }
  w.close();
}

struct SynthPaths {
  std::string edges;
  std::string intrinsic;
  std::string labels;
};

inline SynthPaths write_synth_files(const SynthData& data, const std::string& out_dir) {
  SynthPaths paths{out_dir + "/edges.csv", out_dir + "/intrinsic.csv", out_dir + "/labels.csv"};
  {
    CsvWriter w(paths.edges);
    w.write_row({"claim_id", "party_id", "party_kind"});
    for (const EdgeRecord& e : data.edges) {
      w.write_row({e.claim_id, e.party_id, to_string(e.party_kind)});
    }
    w.close();
  }
  write_intrinsic_csv(paths.intrinsic, data.intrinsic);
  write_label_csv(paths.labels, data.labels);
  return paths;
}

}  // namespace claimnet
