#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "claimnet/birank.hpp"
#include "claimnet/cross_validation.hpp"
#include "claimnet/csv.hpp"
#include "claimnet/dataset.hpp"
#include "claimnet/date.hpp"
#include "claimnet/features.hpp"
#include "claimnet/graph_io.hpp"
#include "claimnet/labels.hpp"
#include "claimnet/logistic.hpp"
#include "claimnet/motifs.hpp"
#include "claimnet/synth.hpp"
#include "claimnet/version.hpp"

namespace claimnet {

struct PipelineConfig {
  std::string edges_path;
  std::string intrinsic_path;
  std::string labels_path;
  std::string cutoff;  // ISO date separating the historic and target periods

  double alpha = 0.85;
  double tolerance = 1e-8;
  int max_iterations = 1000;

  std::size_t sample_size = 20000;  // unlabeled target-period claims added to the datasets
  double smote_ratio = 0.15;
  int smote_k = 5;
  int cv_folds = 10;
  double test_fraction = 0.30;
  int permutation_repeats = 5;

  std::uint64_t seed = 42;
  std::string out_dir = "out";
  int threads = 1;
  bool strict = false;
  std::size_t motif_degree_cap = 10000;

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in [0, 1]");
    if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
    if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction must be in (0, 1)");
    if (!(smote_ratio > 0.0 && smote_ratio < 1.0)) throw ConfigError("smote_ratio must be in (0, 1)");
    if (cv_folds < 2) throw ConfigError("cv_folds must be >= 2");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (permutation_repeats < 1) throw ConfigError("permutation_repeats must be >= 1");
  }

  nlohmann::json to_json() const {
    return nlohmann::json{{"edges", edges_path},
                          {"intrinsic", intrinsic_path},
                          {"labels", labels_path},
                          {"cutoff", cutoff},
                          {"alpha", alpha},
                          {"tolerance", tolerance},
                          {"max_iterations", max_iterations},
                          {"sample_size", sample_size},
                          {"smote_ratio", smote_ratio},
                          {"smote_k", smote_k},
                          {"cv_folds", cv_folds},
                          {"test_fraction", test_fraction},
                          {"permutation_repeats", permutation_repeats},
                          {"seed", seed},
                          {"out_dir", out_dir},
                          {"threads", threads},
                          {"strict", strict},
                          {"motif_degree_cap", motif_degree_cap}};
  }

  static PipelineConfig from_json(const nlohmann::json& j) {
    PipelineConfig c;
    auto opt = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    opt("edges", c.edges_path);
    opt("intrinsic", c.intrinsic_path);
    opt("labels", c.labels_path);
    opt("cutoff", c.cutoff);
    opt("alpha", c.alpha);
    opt("tolerance", c.tolerance);
    opt("max_iterations", c.max_iterations);
    opt("sample_size", c.sample_size);
    opt("smote_ratio", c.smote_ratio);
    opt("smote_k", c.smote_k);
    opt("cv_folds", c.cv_folds);
    opt("test_fraction", c.test_fraction);
    opt("permutation_repeats", c.permutation_repeats);
    opt("seed", c.seed);
    opt("out_dir", c.out_dir);
    opt("threads", c.threads);
    opt("strict", c.strict);
    opt("motif_degree_cap", c.motif_degree_cap);
    c.validate();
    return c;
  }

  static PipelineConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return from_json(j);
  }
};

// Timings are deliberately written next to, not into, the manifest: manifests
// must be byte-identical across reruns of the same seeded config.
class StageClock {
 public:
  template <typename Fn>
  auto time(const std::string& stage, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record(stage, start);
    } else {
      auto result = fn();
      record(stage, start);
      return result;
    }
  }

  void write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "'");
    for (const auto& [stage, ms] : entries_) {
      out << stage << ": " << ms << " ms\n";
    }
  }

  const std::vector<std::pair<std::string, double>>& entries() const { return entries_; }

 private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point start) {
    const auto end = std::chrono::steady_clock::now();
    entries_.emplace_back(stage, std::chrono::duration<double, std::milli>(end - start).count());
  }
  std::vector<std::pair<std::string, double>> entries_;
};

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

inline void write_manifest(const std::string& path, const nlohmann::json& manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "'");
  out << manifest.dump(2) << "\n";
  if (!out) throw IoError("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// intrinsic feature ingestion

struct IntrinsicData {
  std::vector<std::string> feature_names;  // after one-hot expansion
  std::unordered_map<std::string, std::vector<double>> rows;  // claim_id -> features
  std::unordered_map<std::string, ClaimLabel> fraud;          // from the fraud column, if present
};

/// `claim_id,<features...>[,fraud]`. Columns that fail to parse as numbers are
/// one-hot encoded over their observed categories (sorted, first category
/// dropped as the reference level). Missing values are rejected.
inline IntrinsicData load_intrinsic_csv(const std::string& path) {
  CsvReader reader(path);
  const std::size_t c_id = reader.require_column("claim_id");
  const auto c_fraud = reader.column("fraud");

  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < reader.header().size(); ++c) {
    if (c != c_id && (!c_fraud || c != *c_fraud)) feature_cols.push_back(c);
  }

  std::vector<std::vector<std::string>> raw;
  std::vector<std::string> f;
  while (reader.read_row(f)) raw.push_back(f);

  // decide numeric vs categorical per column
  std::vector<bool> numeric(feature_cols.size(), true);
  std::vector<std::set<std::string>> categories(feature_cols.size());
  for (const auto& row : raw) {
    for (std::size_t k = 0; k < feature_cols.size(); ++k) {
      const std::string& v = row[feature_cols[k]];
      if (v.empty()) {
        throw DataError("'" + path + "': missing value in column '" + reader.header()[feature_cols[k]] +
                        "' for claim " + row[c_id]);
      }
      double parsed = 0.0;
      auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), parsed);
      if (ec != std::errc{} || p != v.data() + v.size()) numeric[k] = false;
      categories[k].insert(v);
    }
  }

  IntrinsicData data;
  std::vector<std::vector<std::string>> onehot_levels(feature_cols.size());
  for (std::size_t k = 0; k < feature_cols.size(); ++k) {
    const std::string& name = reader.header()[feature_cols[k]];
    if (numeric[k]) {
      data.feature_names.push_back(name);
    } else {
      std::vector<std::string> levels(categories[k].begin(), categories[k].end());
      // first level is the reference and gets no indicator
      for (std::size_t l = 1; l < levels.size(); ++l) {
        data.feature_names.push_back(name + "=" + levels[l]);
      }
      onehot_levels[k] = std::move(levels);
    }
  }

  for (const auto& row : raw) {
    std::vector<double> values;
    values.reserve(data.feature_names.size());
    for (std::size_t k = 0; k < feature_cols.size(); ++k) {
      const std::string& v = row[feature_cols[k]];
      if (numeric[k]) {
        values.push_back(parse_double(v, "intrinsic feature"));
      } else {
        for (std::size_t l = 1; l < onehot_levels[k].size(); ++l) {
          values.push_back(v == onehot_levels[k][l] ? 1.0 : 0.0);
        }
      }
    }
    if (!data.rows.emplace(row[c_id], std::move(values)).second) {
      throw DataError("'" + path + "': duplicate claim_id " + row[c_id]);
    }
    if (c_fraud) {
      auto label = parse_claim_label(row[*c_fraud]);
      if (!label) throw DataError("'" + path + "': bad fraud value '" + row[*c_fraud] + "'");
      data.fraud.emplace(row[c_id], *label);
    }
  }
  return data;
}

// ---------------------------------------------------------------------------
// dataset assembly (the temporal protocol)

struct AssembledDataset {
  std::string name;  // "known" or "fraud"
  Dataset full;
  Dataset train;
  Dataset test;
  std::vector<std::string> split_membership;  // per full-row: "train" / "test"
};

struct AssemblyResult {
  AssembledDataset known;
  AssembledDataset fraud;
  std::vector<std::uint32_t> dataset_claims;  // graph claim indices, ascending
  std::size_t n_labeled = 0, n_unlabeled_sampled = 0, n_unlabeled_available = 0;
  std::size_t n_query_sources = 0;
};

namespace detail {

inline void check_cutoff_range(const LabelMap& labels, Date cutoff) {
  const auto lo = labels.min_filing_date();
  const auto hi = labels.max_filing_date();
  if (!lo || !hi) throw DataError("labels carry no filing dates; cannot apply a temporal cutoff");
  if (!(*lo <= cutoff) || !(cutoff < *hi)) {
    throw DataError("cutoff " + format_date(cutoff) + " is not strictly inside the data's time range [" +
                    format_date(*lo) + ", " + format_date(*hi) + "]");
  }
}

}  // namespace detail

/// Builds D_known / D_fraud: all labeled target-period claims plus a seeded
/// sample of unlabeled target-period ones, joined to intrinsic features and
/// network features, with per-dataset stratified train/test splits.
inline AssemblyResult assemble_datasets(const BipartiteGraph& g, const LabelMap& labels,
                                        const IntrinsicData& intrinsic, const FeatureFrame& features,
                                        const QueryVector& query, const PipelineConfig& cfg) {
  detail::check_cutoff_range(labels, parse_date(cfg.cutoff));
  const Date cutoff = parse_date(cfg.cutoff);

  if (cfg.sample_size == 0) {
    throw ConfigError("degenerate target: sample_size 0 would make y_known identically 1");
  }

  std::vector<std::uint32_t> labeled, unlabeled;
  for (std::uint32_t i = 0; i < g.claim_count(); ++i) {
    const auto filed = labels.filing_date(i);
    if (!filed || !(*filed > cutoff)) continue;  // historic or undated claims never enter
    if (labels.label(i) == ClaimLabel::Unknown) {
      unlabeled.push_back(i);
    } else {
      labeled.push_back(i);
    }
  }
  if (labeled.empty()) throw DataError("no labeled claims in the target period");
  if (unlabeled.empty()) throw DataError("degenerate target: no unlabeled claims to sample");

  Rng sample_rng = Rng(cfg.seed).split(11);
  std::vector<std::uint32_t> sampled = unlabeled;
  sample_rng.shuffle(sampled);
  if (sampled.size() > cfg.sample_size) sampled.resize(cfg.sample_size);

  AssemblyResult result;
  result.n_labeled = labeled.size();
  result.n_unlabeled_available = unlabeled.size();
  result.n_unlabeled_sampled = sampled.size();

  std::vector<std::uint32_t> rows = labeled;
  rows.insert(rows.end(), sampled.begin(), sampled.end());
  std::sort(rows.begin(), rows.end());
  result.dataset_claims = rows;

  // hard temporal-leakage assertions: no dataset row may be a query source
  for (std::uint32_t i = 0; i < g.claim_count(); ++i) {
    if (query.values[i] > 0.0) {
      ++result.n_query_sources;
      const auto filed = labels.filing_date(i);
      if (!filed || !(*filed <= cutoff)) {
        throw DataError("internal check failed: query source filed after the cutoff");
      }
    }
  }
  for (std::uint32_t i : rows) {
    if (query.values[i] > 0.0) {
      throw DataError("internal check failed: dataset row is a query-vector source");
    }
  }

  // feature layout: intrinsic columns, then score features, then neighborhood
  std::vector<std::string> names = intrinsic.feature_names;
  std::vector<FeatureGroup> groups(names.size(), FeatureGroup::Intrinsic);
  const std::vector<std::string> score_names = {"scores0", "n1.q1", "n1.med", "n1.max",
                                                "n2.q1",   "n2.med", "n2.max"};
  const std::vector<std::string> nbh_names = {"n1.size", "n2.size", "n2.ratioFraud",
                                              "n2.ratioNonFraud", "n2.binFraud"};
  for (const auto& s : score_names) {
    names.push_back(s);
    groups.push_back(FeatureGroup::Score);
  }
  for (const auto& s : nbh_names) {
    names.push_back(s);
    groups.push_back(FeatureGroup::Neighborhood);
  }

  std::unordered_map<std::uint32_t, const NetworkFeatureRow*> frow;
  for (const auto& r : features.rows()) frow.emplace(r.claim, &r);

  auto build = [&](std::span<const int> target) {
    Dataset ds(names, groups);
    std::vector<double> row;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const std::uint32_t i = rows[k];
      const std::string& id = g.claim_id(i);
      auto intr = intrinsic.rows.find(id);
      if (intr == intrinsic.rows.end()) {
        throw DataError("claim " + id + " has no intrinsic feature row");
      }
      auto net = frow.find(i);
      if (net == frow.end()) {
        throw DataError("claim " + id + " was not featurized");
      }
      row.assign(intr->second.begin(), intr->second.end());
      const NetworkFeatureRow& nf = *net->second;
      row.insert(row.end(), {nf.score.scores0, nf.score.n1_q1, nf.score.n1_med, nf.score.n1_max,
                             nf.score.n2_q1, nf.score.n2_med, nf.score.n2_max});
      row.insert(row.end(),
                 {static_cast<double>(nf.nbh.n1_size), static_cast<double>(nf.nbh.n2_size),
                  nf.nbh.n2_ratio_fraud, nf.nbh.n2_ratio_nonfraud, static_cast<double>(nf.nbh.n2_bin_fraud)});
      ds.add_row(id, row, target[k]);
    }
    return ds;
  };

  std::vector<int> y_known(rows.size()), y_fraud(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const ClaimLabel l = labels.label(rows[k]);
    y_known[k] = l != ClaimLabel::Unknown;
    y_fraud[k] = l == ClaimLabel::Fraud;
  }

  auto split_one = [&](const std::string& name, std::span<const int> target, std::uint64_t stream) {
    AssembledDataset a;
    a.name = name;
    a.full = build(target);
    Rng rng = Rng(cfg.seed).split(stream);
    SplitIndices idx = stratified_split_indices(a.full.targets(), cfg.test_fraction, rng);
    a.train = a.full.subset(idx.train);
    a.test = a.full.subset(idx.test);
    a.split_membership.assign(a.full.n_rows(), "train");
    for (std::size_t t : idx.test) a.split_membership[t] = "test";
    return a;
  };

  result.known = split_one("known", y_known, 12);
  result.fraud = split_one("fraud", y_fraud, 13);
  return result;
}

inline void write_dataset_csv(const std::string& path, const AssembledDataset& a) {
  CsvWriter w(path);
  std::vector<std::string> header{"claim_id"};
  for (const auto& n : a.full.feature_names()) header.push_back(n);
  header.push_back("y");
  header.push_back("split");
  w.write_row(header);
  for (std::size_t r = 0; r < a.full.n_rows(); ++r) {
    std::vector<std::string> row{a.full.row_id(r)};
    for (double v : a.full.row(r)) row.push_back(format_double(v));
    row.push_back(std::to_string(a.full.target(r)));
    row.push_back(a.split_membership[r]);
    w.write_row(row);
  }
  w.close();
}

/// Rebuilds an assembled dataset from its CSV. Network feature columns are
/// recognized by name; everything else is intrinsic.
inline AssembledDataset read_dataset_csv(const std::string& path, const std::string& name) {
  CsvReader reader(path);
  const std::size_t c_id = reader.require_column("claim_id");
  const std::size_t c_y = reader.require_column("y");
  const std::size_t c_split = reader.require_column("split");

  const std::set<std::string> score_names = {"scores0", "n1.q1", "n1.med", "n1.max",
                                             "n2.q1",   "n2.med", "n2.max"};
  const std::set<std::string> nbh_names = {"n1.size", "n2.size", "n2.ratioFraud",
                                           "n2.ratioNonFraud", "n2.binFraud"};
  std::vector<std::size_t> feat_cols;
  std::vector<std::string> names;
  std::vector<FeatureGroup> groups;
  for (std::size_t c = 0; c < reader.header().size(); ++c) {
    if (c == c_id || c == c_y || c == c_split) continue;
    const std::string& n = reader.header()[c];
    feat_cols.push_back(c);
    names.push_back(n);
    if (score_names.count(n)) {
      groups.push_back(FeatureGroup::Score);
    } else if (nbh_names.count(n)) {
      groups.push_back(FeatureGroup::Neighborhood);
    } else {
      groups.push_back(FeatureGroup::Intrinsic);
    }
  }

  AssembledDataset a;
  a.name = name;
  a.full = Dataset(names, groups);
  std::vector<std::size_t> train_idx, test_idx;
  std::vector<std::string> f;
  std::vector<double> row(feat_cols.size());
  while (reader.read_row(f)) {
    for (std::size_t k = 0; k < feat_cols.size(); ++k) row[k] = parse_double(f[feat_cols[k]], "feature");
    const int y = static_cast<int>(parse_long(f[c_y], "target"));
    a.full.add_row(f[c_id], row, y);
    a.split_membership.push_back(f[c_split]);
    if (f[c_split] == "test") {
      test_idx.push_back(a.full.n_rows() - 1);
    } else if (f[c_split] == "train") {
      train_idx.push_back(a.full.n_rows() - 1);
    } else {
      throw DataError("'" + path + "': bad split value '" + f[c_split] + "'");
    }
  }
  a.train = a.full.subset(train_idx);
  a.test = a.full.subset(test_idx);
  return a;
}

// ---------------------------------------------------------------------------
// experiment protocol

struct GroupCurvePoint {
  std::size_t n_features = 0;
  std::string feature_added;
  CvResult cv;
};

struct ExperimentGroupResult {
  std::string dataset;
  std::string group;  // "intrinsic", "score", "neighborhood", "all"
  std::vector<FeatureImportance> importance;
  std::vector<GroupCurvePoint> curve;
  ModelFit final_model;
  MetricsReport test_metrics;
  CvResult full_model_cv;
};

struct ExperimentResult {
  std::vector<ExperimentGroupResult> groups;

  const ExperimentGroupResult& find(const std::string& dataset, const std::string& group) const {
    for (const auto& g : groups) {
      if (g.dataset == dataset && g.group == group) return g;
    }
    throw DataError("no experiment result for " + dataset + "/" + group);
  }
};

namespace detail {

inline std::vector<std::size_t> group_columns(const Dataset& ds, const std::string& group) {
  if (group == "all") return ds.all_columns();
  if (group == "intrinsic") return ds.columns_in_group(FeatureGroup::Intrinsic);
  if (group == "score") return ds.columns_in_group(FeatureGroup::Score);
  if (group == "neighborhood") return ds.columns_in_group(FeatureGroup::Neighborhood);
  throw ConfigError("unknown feature group '" + group + "'");
}

}  // namespace detail

/// The per-dataset, per-group protocol: permutation-importance ranking on an
/// internal holdout, incremental-feature CV curves, stepwise final model on
/// the SMOTE-rebalanced training set, held-out test metrics.
inline ExperimentGroupResult run_group_experiment(const AssembledDataset& data, const std::string& group,
                                                  const PipelineConfig& cfg, std::uint64_t stream_base) {
  ExperimentGroupResult out;
  out.dataset = data.name;
  out.group = group;

  const auto cols = detail::group_columns(data.train, group);
  if (cols.empty()) throw DataError("feature group '" + group + "' has no columns");
  Dataset train = data.train.with_columns(cols);
  Dataset test = data.test.with_columns(cols);

  Rng master = Rng(cfg.seed).split(stream_base);

  // importance via an internal stratified holdout of the training set
  {
    Rng holdout_rng = master.split(1);
    SplitIndices idx = stratified_split_indices(train.targets(), 0.25, holdout_rng);
    Dataset sub_train = train.subset(idx.train);
    Dataset sub_valid = train.subset(idx.test);
    Rng smote_rng = master.split(2);
    SmoteOptions sopts;
    sopts.target_minority_ratio = cfg.smote_ratio;
    sopts.k_neighbors = cfg.smote_k;
    Dataset balanced = smote(sub_train, sopts, smote_rng).data;
    const ModelFit full_fit = fit_logistic(balanced);
    out.importance = permutation_importance(full_fit, sub_valid, cfg.permutation_repeats, master.split(3));
  }

  // incremental-feature CV curves in decreasing importance order
  std::vector<std::size_t> ranked;
  for (const auto& imp : out.importance) ranked.push_back(train.feature_index(imp.feature));
  CvSpec spec;
  spec.apply_smote = true;
  spec.smote_target_ratio = cfg.smote_ratio;
  spec.smote_k = cfg.smote_k;
  for (std::size_t k = 1; k <= ranked.size(); ++k) {
    spec.feature_columns.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k));
    GroupCurvePoint pt;
    pt.n_features = k;
    pt.feature_added = out.importance[k - 1].feature;
    pt.cv = cross_validate(train, cfg.cv_folds, spec, master.split(10 + k).seed());
    out.curve.push_back(std::move(pt));
  }
  out.full_model_cv = out.curve.back().cv;

  // stepwise final model on the SMOTE-rebalanced full training set
  {
    Rng smote_rng = master.split(4);
    SmoteOptions sopts;
    sopts.target_minority_ratio = cfg.smote_ratio;
    sopts.k_neighbors = cfg.smote_k;
    Dataset balanced = smote(train, sopts, smote_rng).data;
    out.final_model = stepwise_select(balanced, balanced.all_columns());
  }

  const auto test_scores = out.final_model.predict(test);
  out.test_metrics = compute_metrics(test_scores, test.targets(), /*with_curves=*/true);
  return out;
}

inline ExperimentResult run_experiment(const AssembledDataset& known, const AssembledDataset& fraud,
                                       const PipelineConfig& cfg) {
  ExperimentResult result;
  const std::vector<std::string> groups = {"intrinsic", "score", "neighborhood", "all"};
  std::uint64_t stream = 100;
  for (const AssembledDataset* data : {&known, &fraud}) {
    for (const auto& group : groups) {
      result.groups.push_back(run_group_experiment(*data, group, cfg, stream));
      stream += 1;
    }
  }
  return result;
}

inline void write_experiment_outputs(const ExperimentResult& result, const std::string& out_dir) {
  {
    CsvWriter w(out_dir + "/summary.csv");
    w.write_row({"dataset", "feature_group", "auroc", "aupr", "tdl"});
    for (const auto& g : result.groups) {
      w.write_row({g.dataset, g.group, format_double(g.test_metrics.auroc),
                   format_double(g.test_metrics.aupr), format_double(g.test_metrics.tdl)});
    }
    w.close();
  }
  for (const auto& g : result.groups) {
    const std::string tag = g.dataset + "_" + g.group;
    {
      CsvWriter w(out_dir + "/importance_" + tag + ".csv");
      w.write_row({"rank", "feature", "importance"});
      for (std::size_t k = 0; k < g.importance.size(); ++k) {
        w.write_row({std::to_string(k + 1), g.importance[k].feature, format_double(g.importance[k].importance)});
      }
      w.close();
    }
    {
      CsvWriter w(out_dir + "/cv_curve_" + tag + ".csv");
      w.write_row({"n_features", "feature_added", "auroc_mean", "auroc_sd", "aupr_mean", "aupr_sd",
                   "tdl_mean", "tdl_sd"});
      for (const auto& pt : g.curve) {
        w.write_row({std::to_string(pt.n_features), pt.feature_added, format_double(pt.cv.auroc.mean),
                     format_double(pt.cv.auroc.stddev), format_double(pt.cv.aupr.mean),
                     format_double(pt.cv.aupr.stddev), format_double(pt.cv.tdl.mean),
                     format_double(pt.cv.tdl.stddev)});
      }
      w.close();
    }
    write_cv_metrics_csv(out_dir + "/cv_metrics_" + tag + ".csv", g.full_model_cv);
    {
      nlohmann::json j = g.final_model.to_json();
      j["dataset"] = g.dataset;
      j["feature_group"] = g.group;
      j["metrics"] = {{"auroc", g.test_metrics.auroc},
                      {"aupr", g.test_metrics.aupr},
                      {"tdl", g.test_metrics.tdl}};
      write_manifest(out_dir + "/model_" + tag + ".json", j);
    }
  }
}

// ---------------------------------------------------------------------------
// whole-pipeline driver

struct PipelineOutcome {
  bool birank_converged = true;
  ExperimentResult experiment;
  nlohmann::json manifest;
};

inline PipelineOutcome run_pipeline(const PipelineConfig& cfg, bool with_experiment = true) {
  cfg.validate();
  if (cfg.edges_path.empty() || cfg.labels_path.empty() || cfg.intrinsic_path.empty() || cfg.cutoff.empty()) {
    throw ConfigError("pipeline needs edges, intrinsic, labels and cutoff");
  }
  ensure_dir(cfg.out_dir);
  StageClock clock;
  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = cfg.to_json();

  const auto records = clock.time("load_edges", [&] { return load_edge_csv(cfg.edges_path); });
  const BipartiteGraph g = clock.time("build_graph", [&] { return build_graph(records); });
  manifest["graph"] = {{"n_claims", g.claim_count()},
                       {"n_parties", g.party_count()},
                       {"n_edges", g.edge_count()},
                       {"total_weight", g.total_edge_weight()}};
  clock.time("save_graph", [&] { save_graph(g, cfg.out_dir + "/graph.bin"); });

  const LabelMap labels(g, load_label_csv(cfg.labels_path));
  const Date cutoff = parse_date(cfg.cutoff);
  detail::check_cutoff_range(labels, cutoff);

  QueryVector query = build_query_vector(g, labels, cutoff);
  BiRankConfig bcfg;
  bcfg.alpha = cfg.alpha;
  bcfg.tolerance = cfg.tolerance;
  bcfg.max_iterations = cfg.max_iterations;
  const ScoreSet scores = clock.time("birank", [&] { return birank(g, query, bcfg); });
  write_scores_csv(cfg.out_dir + "/scores.csv", g, scores);
  manifest["birank"] = {{"alpha", cfg.alpha},
                        {"tolerance", cfg.tolerance},
                        {"iterations_used", scores.iterations_used},
                        {"final_residual", scores.final_residual},
                        {"converged", scores.converged},
                        {"query_sources", [&] {
                           std::size_t n = 0;
                           for (double v : query.values) n += v > 0.0;
                           return n;
                         }()},
                        {"no_sources_warning", query.no_sources_warning}};

  // featurize only the target-period claims (the ones eligible for modeling)
  std::vector<std::uint32_t> targets;
  for (std::uint32_t i = 0; i < g.claim_count(); ++i) {
    const auto filed = labels.filing_date(i);
    if (filed && *filed > cutoff) targets.push_back(i);
  }
  const FeatureFrame frame =
      clock.time("featurize", [&] { return featurize_claims(g, scores, labels, targets); });
  frame.write_csv(cfg.out_dir + "/features.csv");

  const IntrinsicData intrinsic = clock.time("load_intrinsic", [&] { return load_intrinsic_csv(cfg.intrinsic_path); });
  // the interface-mandated fraud column must agree with the labels file
  for (std::uint32_t i = 0; i < g.claim_count(); ++i) {
    auto it = intrinsic.fraud.find(g.claim_id(i));
    if (it != intrinsic.fraud.end() && it->second != labels.label(i)) {
      throw DataError("fraud column in intrinsic CSV disagrees with labels for claim " + g.claim_id(i));
    }
  }

  const AssemblyResult assembly = clock.time("make_datasets", [&] {
    return assemble_datasets(g, labels, intrinsic, frame, query, cfg);
  });
  write_dataset_csv(cfg.out_dir + "/dataset_known.csv", assembly.known);
  write_dataset_csv(cfg.out_dir + "/dataset_fraud.csv", assembly.fraud);
  manifest["datasets"] = {
      {"target_period_claims", targets.size()},
      {"labeled", assembly.n_labeled},
      {"unlabeled_available", assembly.n_unlabeled_available},
      {"unlabeled_sampled", assembly.n_unlabeled_sampled},
      {"rows", assembly.known.full.n_rows()},
      {"known_positive_ratio", static_cast<double>(assembly.known.full.positives()) /
                                   static_cast<double>(assembly.known.full.n_rows())},
      {"fraud_positive_ratio", static_cast<double>(assembly.fraud.full.positives()) /
                                   static_cast<double>(assembly.fraud.full.n_rows())},
      {"note", "datasets restricted to claims filed strictly after the cutoff; "
               "query sources are excluded by construction and asserted"}};
  manifest["smote"] = {{"target_minority_ratio", cfg.smote_ratio},
                       {"k_neighbors", cfg.smote_k},
                       {"pair", "oversample minority x2, then undersample majority to the target ratio; "
                                "falls back to pure oversampling when the majority is too small"}};

  PipelineOutcome outcome;
  outcome.birank_converged = scores.converged;
  if (with_experiment) {
    outcome.experiment = clock.time("experiment", [&] {
      return run_experiment(assembly.known, assembly.fraud, cfg);
    });
    write_experiment_outputs(outcome.experiment, cfg.out_dir);
  }

  manifest["seeds"] = {{"master", cfg.seed},
                       {"streams", "sample=11, split_known=12, split_fraud=13, experiment=100+"}};
  write_manifest(cfg.out_dir + "/manifest.json", manifest);
  clock.write(cfg.out_dir + "/timings.txt");
  outcome.manifest = manifest;
  return outcome;
}

}  // namespace claimnet
