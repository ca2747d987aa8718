// claimnet command-line tool: build claim-party networks, score them for
// fraud proximity, extract features, census motifs, generate synthetic
// portfolios and run the full modeling protocol.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "claimnet/claimnet.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNotConverged = 4;

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
  bool strict = false;
};

claimnet::PipelineConfig load_pipeline_config(const GlobalOptions& g) {
  claimnet::PipelineConfig cfg;
  if (!g.config_path.empty()) cfg = claimnet::PipelineConfig::load(g.config_path);
  if (g.seed) cfg.seed = *g.seed;
  if (g.out_dir) cfg.out_dir = *g.out_dir;
  if (g.threads) cfg.threads = *g.threads;
  cfg.strict = cfg.strict || g.strict;
  cfg.validate();
  return cfg;
}

claimnet::BipartiteGraph load_graph_arg(const std::string& edges, const std::string& graph) {
  if (!graph.empty()) return claimnet::load_graph(graph);
  if (!edges.empty()) return claimnet::build_graph(claimnet::load_edge_csv(edges));
  throw claimnet::ConfigError("provide --edges CSV or --graph snapshot");
}

std::vector<std::uint32_t> read_targets_file(const claimnet::BipartiteGraph& g, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw claimnet::IoError("cannot open targets file '" + path + "'");
  std::vector<std::uint32_t> targets;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    targets.push_back(g.require_claim(line));
  }
  return targets;
}

int run(int argc, char** argv) {
  CLI::App app{"claimnet: fraud analytics on bipartite claim-party networks"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--config", global.config_path, "pipeline config JSON");
  app.add_option("--seed", global.seed, "override the config seed");
  app.add_option("--out", global.out_dir, "override the output directory");
  app.add_option("--threads", global.threads, "worker threads for parallel stages");
  app.add_flag("--strict", global.strict, "exit 4 when the score iteration does not converge");
  app.fallthrough(true);  // global flags may follow the subcommand name

  // generate ----------------------------------------------------------------
  auto* cmd_generate = app.add_subcommand("generate", "write a synthetic portfolio (edges, intrinsics, labels)");
  std::string synth_config_path;
  cmd_generate->add_option("--synth-config", synth_config_path, "synth config JSON (defaults when omitted)");

  // build -------------------------------------------------------------------
  auto* cmd_build = app.add_subcommand("build", "build and snapshot the bipartite graph");
  std::string opt_edges, opt_graph;
  cmd_build->add_option("--edges", opt_edges, "edge CSV");

  // birank ------------------------------------------------------------------
  auto* cmd_birank = app.add_subcommand("birank", "compute fraud scores for every node");
  std::string opt_labels, opt_cutoff;
  double opt_alpha = 0.85, opt_tolerance = 1e-8;
  int opt_max_iter = 1000;
  cmd_birank->add_option("--edges", opt_edges, "edge CSV");
  cmd_birank->add_option("--graph", opt_graph, "graph snapshot");
  cmd_birank->add_option("--labels", opt_labels, "label CSV")->required();
  cmd_birank->add_option("--cutoff", opt_cutoff, "historic/target cutoff date (YYYY-MM-DD)")->required();
  cmd_birank->add_option("--alpha", opt_alpha, "network-vs-query trade-off");
  cmd_birank->add_option("--tolerance", opt_tolerance, "relative L1 stopping threshold");
  cmd_birank->add_option("--max-iterations", opt_max_iter, "iteration budget");

  // featurize ---------------------------------------------------------------
  auto* cmd_featurize = app.add_subcommand("featurize", "extract score and neighborhood features");
  std::string opt_scores, opt_targets;
  cmd_featurize->add_option("--edges", opt_edges, "edge CSV");
  cmd_featurize->add_option("--graph", opt_graph, "graph snapshot");
  cmd_featurize->add_option("--labels", opt_labels, "label CSV")->required();
  cmd_featurize->add_option("--scores", opt_scores, "scores CSV from the birank step")->required();
  cmd_featurize->add_option("--targets", opt_targets, "file with one claim id per line (default: all claims)");

  // motifs ------------------------------------------------------------------
  auto* cmd_motifs = app.add_subcommand("motifs", "enumerate 4-/6-cycles and report homophily");
  std::size_t opt_degree_cap = 10000;
  cmd_motifs->add_option("--edges", opt_edges, "edge CSV");
  cmd_motifs->add_option("--graph", opt_graph, "graph snapshot");
  cmd_motifs->add_option("--labels", opt_labels, "label CSV (enables the homophily report)");
  cmd_motifs->add_option("--degree-cap", opt_degree_cap, "skip nodes above this degree");

  // dataset / experiment / pipeline ------------------------------------------
  auto* cmd_datasets = app.add_subcommand("make-datasets", "assemble D_known and D_fraud with train/test splits");
  auto* cmd_experiment = app.add_subcommand("experiment", "run the modeling protocol on assembled datasets");
  auto* cmd_pipeline = app.add_subcommand("pipeline", "run every stage end to end");

  CLI11_PARSE(app, argc, argv);

  using namespace claimnet;

  if (cmd_generate->parsed()) {
    SynthConfig scfg;
    if (!synth_config_path.empty()) {
      std::ifstream in(synth_config_path);
      if (!in) throw IoError("cannot open synth config '" + synth_config_path + "'");
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("synth config is not valid JSON: ") + e.what());
      }
      scfg = SynthConfig::from_json(j);
    }
    if (global.seed) scfg.seed = *global.seed;
    const std::string out = global.out_dir.value_or("out");
    ensure_dir(out);
    StageClock clock;
    const SynthData data = clock.time("generate", [&] { return generate(scfg); });
    const SynthPaths paths = write_synth_files(data, out);
    nlohmann::json manifest;
    manifest["version"] = kVersion;
    manifest["synth_config"] = scfg.to_json();
    manifest["outputs"] = {{"edges", paths.edges}, {"intrinsic", paths.intrinsic}, {"labels", paths.labels}};
    manifest["counts"] = {{"claims", scfg.n_claims},
                          {"edges", data.edges.size()},
                          {"rings", data.rings.size()}};
    write_manifest(out + "/manifest.json", manifest);
    clock.write(out + "/timings.txt");
    std::cout << "wrote " << paths.edges << ", " << paths.intrinsic << ", " << paths.labels << "\n";
    return kExitOk;
  }

  if (cmd_build->parsed()) {
    const std::string out = global.out_dir.value_or("out");
    ensure_dir(out);
    StageClock clock;
    const BipartiteGraph g = clock.time("build", [&] { return load_graph_arg(opt_edges, opt_graph); });
    save_graph(g, out + "/graph.bin");
    nlohmann::json manifest;
    manifest["version"] = kVersion;
    manifest["graph"] = {{"n_claims", g.claim_count()},
                         {"n_parties", g.party_count()},
                         {"n_edges", g.edge_count()},
                         {"total_weight", g.total_edge_weight()}};
    write_manifest(out + "/manifest.json", manifest);
    clock.write(out + "/timings.txt");
    std::cout << "graph: " << g.claim_count() << " claims, " << g.party_count() << " parties, "
              << g.edge_count() << " edges\n";
    return kExitOk;
  }

  if (cmd_birank->parsed()) {
    const std::string out = global.out_dir.value_or("out");
    ensure_dir(out);
    const BipartiteGraph g = load_graph_arg(opt_edges, opt_graph);
    const LabelMap labels(g, load_label_csv(opt_labels));
    const QueryVector query = build_query_vector(g, labels, parse_date(opt_cutoff));
    if (query.no_sources_warning) {
      std::cerr << "warning: no historic fraud sources before the cutoff; scores will be all zero\n";
    }
    BiRankConfig bcfg;
    bcfg.alpha = opt_alpha;
    bcfg.tolerance = opt_tolerance;
    bcfg.max_iterations = opt_max_iter;
    StageClock clock;
    const ScoreSet scores = clock.time("birank", [&] { return birank(g, query, bcfg); });
    write_scores_csv(out + "/scores.csv", g, scores);
    nlohmann::json manifest;
    manifest["version"] = kVersion;
    manifest["birank"] = {{"alpha", bcfg.alpha},
                          {"tolerance", bcfg.tolerance},
                          {"max_iterations", bcfg.max_iterations},
                          {"iterations_used", scores.iterations_used},
                          {"final_residual", scores.final_residual},
                          {"converged", scores.converged}};
    write_manifest(out + "/manifest.json", manifest);
    clock.write(out + "/timings.txt");
    std::cout << "scores written to " << out << "/scores.csv (" << scores.iterations_used
              << " iterations, residual " << scores.final_residual << ")\n";
    if (!scores.converged) {
      std::cerr << "warning: score iteration did not converge\n";
      if (global.strict) return kExitNotConverged;
    }
    return kExitOk;
  }

  if (cmd_featurize->parsed()) {
    const std::string out = global.out_dir.value_or("out");
    ensure_dir(out);
    const BipartiteGraph g = load_graph_arg(opt_edges, opt_graph);
    const LabelMap labels(g, load_label_csv(opt_labels));
    const ScoreSet scores = read_scores_csv(opt_scores, g);
    std::vector<std::uint32_t> targets;
    if (!opt_targets.empty()) {
      targets = read_targets_file(g, opt_targets);
    } else {
      targets.resize(g.claim_count());
      std::iota(targets.begin(), targets.end(), 0);
    }
    const FeatureFrame frame = featurize_claims(g, scores, labels, targets);
    frame.write_csv(out + "/features.csv");
    std::cout << "features for " << frame.size() << " claims written to " << out << "/features.csv\n";
    return kExitOk;
  }

  if (cmd_motifs->parsed()) {
    const std::string out = global.out_dir.value_or("out");
    ensure_dir(out);
    const BipartiteGraph g = load_graph_arg(opt_edges, opt_graph);
    MotifOptions mopts;
    mopts.degree_cap = opt_degree_cap;
    StageClock clock;
    const auto cycles4 = clock.time("enumerate_4cycles", [&] { return enumerate_4cycles(g, mopts); });
    const auto cycles6 = clock.time("enumerate_6cycles", [&] { return enumerate_6cycles(g, mopts); });
    write_cycles_csv(out + "/cycles4.csv", g, cycles4, 4);
    write_cycles_csv(out + "/cycles6.csv", g, cycles6, 6);
    nlohmann::json manifest;
    manifest["version"] = kVersion;
    manifest["motifs"] = {{"cycles4", cycles4.size()}, {"cycles6", cycles6.size()}, {"degree_cap", mopts.degree_cap}};
    if (!opt_labels.empty()) {
      const LabelMap labels(g, load_label_csv(opt_labels));
      const HomophilyReport report = clock.time("homophily", [&] { return homophily_report(g, labels, mopts); });
      write_homophily_report(out + "/homophily.txt", out + "/homophily", report);
      manifest["motifs"]["cycle4_labeled_support"] = report.cycle4.support;
      manifest["motifs"]["cycle6_labeled_support"] = report.cycle6.support;
    }
    write_manifest(out + "/manifest.json", manifest);
    clock.write(out + "/timings.txt");
    std::cout << cycles4.size() << " 4-cycles, " << cycles6.size() << " 6-cycles\n";
    return kExitOk;
  }

  if (cmd_datasets->parsed() || cmd_pipeline->parsed()) {
    const PipelineConfig cfg = load_pipeline_config(global);
    const PipelineOutcome outcome = run_pipeline(cfg, /*with_experiment=*/cmd_pipeline->parsed());
    if (!outcome.birank_converged) {
      std::cerr << "warning: score iteration did not converge\n";
      if (cfg.strict) return kExitNotConverged;
    }
    std::cout << "outputs written to " << cfg.out_dir << "\n";
    return kExitOk;
  }

  if (cmd_experiment->parsed()) {
    const PipelineConfig cfg = load_pipeline_config(global);
    const std::string known_path = cfg.out_dir + "/dataset_known.csv";
    const std::string fraud_path = cfg.out_dir + "/dataset_fraud.csv";
    if (!std::filesystem::exists(known_path) || !std::filesystem::exists(fraud_path)) {
      throw DataError("dataset files not found in '" + cfg.out_dir + "'; run make-datasets first");
    }
    const AssembledDataset known = read_dataset_csv(known_path, "known");
    const AssembledDataset fraud = read_dataset_csv(fraud_path, "fraud");
    StageClock clock;
    const ExperimentResult result =
        clock.time("experiment", [&] { return run_experiment(known, fraud, cfg); });
    write_experiment_outputs(result, cfg.out_dir);
    clock.write(cfg.out_dir + "/timings_experiment.txt");
    std::cout << "experiment outputs written to " << cfg.out_dir << "\n";
    return kExitOk;
  }

  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const claimnet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const claimnet::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}
