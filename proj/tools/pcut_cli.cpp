// pcut command-line entry point: cluster, ssl, synth, eval, experiment.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pcut/evaluation.hpp"
#include "pcut/experiments.hpp"
#include "pcut/graph.hpp"
#include "pcut/pcut.hpp"
#include "pcut/report.hpp"
#include "pcut/similarity.hpp"
#include "pcut/ssl.hpp"
#include "pcut/synth.hpp"

#ifndef PCUT_DATA_DIR
#define PCUT_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using namespace pcut;

namespace {

enum ExitCode { kOk = 0, kInputError = 1, kNoFeasible = 2, kNumeric = 3 };

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << content;
}

// Prefixes parse errors with the file they came from.
template <typename F>
auto parse_file(const std::string& path, F&& parse) {
  const auto text = read_file(path);
  try {
    return parse(text);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

template <typename T>
std::vector<T> parse_list(const std::string& s, const char* what) {
  std::vector<T> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    std::istringstream is(item);
    T v{};
    if (!(is >> v) || !(is >> std::ws).eof()) throw ConfigError(std::string("bad ") + what + " value '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::uint64_t env_seed() {
  const char* s = std::getenv("PCUT_SEED");
  if (!s || !*s) return 0;
  char* end = nullptr;
  errno = 0;
  const auto v = std::strtoull(s, &end, 10);
  if (errno || *end != '\0') throw ConfigError(std::string("PCUT_SEED is not an unsigned integer: ") + s);
  return v;
}

struct EngineArgs {
  std::string features, graph;
  std::size_t K = 0;
  double delta = 0.05;
  std::string lambdas, ks, sigmas;
  bool unit_weights = false;
  std::string variant = "ncut";
  bool normalize_rows = false;
  std::size_t restarts = 10;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;
  std::string report = "report.json";
  std::string output;

  void add_to(CLI::App* app, const char* output_help) {
    auto* in = app->add_option_group("input");
    in->add_option("--features", features, "feature CSV (rows = samples)");
    in->add_option("--graph", graph, "edge list 'u v [w]'");
    in->require_option(1);
    app->add_option("--delta", delta, "minimum cluster fraction in (0, 0.5]")->capture_default_str();
    app->add_option("--lambdas", lambdas, "comma-separated lambda grid");
    app->add_option("--ks", ks, "comma-separated k grid (features only)");
    app->add_option("--sigma-exponents", sigmas, "comma-separated j for sigma = 2^j d_k (features only)");
    app->add_flag("--unit-weights", unit_weights, "unit edge weights instead of RBF (features only)");
    app->add_option("--variant", variant, "Laplacian: ncut (normalized) or rcut (unnormalized)")
        ->check(CLI::IsMember({"ncut", "rcut"}))
        ->capture_default_str();
    app->add_flag("--normalize-rows", normalize_rows, "row-normalize the spectral embedding");
    app->add_option("--restarts", restarts, "k-means restarts")->capture_default_str();
    app->add_option("--seed", seed, "64-bit seed (overrides PCUT_SEED)");
    app->add_option("--workers", workers, "parallel candidate evaluations")->capture_default_str();
    app->add_option("--report", report, "report JSON path")->capture_default_str();
    app->add_option("--output", output, output_help);
  }

  PCutConfig config(Task task) const {
    PCutConfig cfg;
    cfg.task = task;
    cfg.modality = features.empty() ? Modality::connectivity : Modality::similarity;
    cfg.delta = delta;
    cfg.K = K;
    if (!lambdas.empty()) cfg.lambda_grid = parse_list<double>(lambdas, "lambda");
    if (!ks.empty()) cfg.k_grid = parse_list<std::size_t>(ks, "k");
    if (!sigmas.empty()) cfg.sigma_exponent_grid = parse_list<int>(sigmas, "sigma exponent");
    if (cfg.modality == Modality::connectivity && (!ks.empty() || !sigmas.empty() || unit_weights)) {
      throw ConfigError("--ks, --sigma-exponents and --unit-weights apply to --features input only");
    }
    cfg.rbf_weights = !unit_weights;
    cfg.variant = variant == "rcut" ? LaplacianVariant::rcut_unnormalized : LaplacianVariant::ncut_normalized;
    cfg.normalize_rows = normalize_rows;
    cfg.kmeans_restarts = restarts;
    cfg.seed = seed ? *seed : env_seed();
    cfg.workers = workers;
    return cfg;
  }
};

struct LoadedInput {
  std::optional<FeatureMatrix> features;
  std::optional<WeightedGraph> graph;
  std::size_t base = 0;  // id offset of the input file
  InputRecord record;
  std::size_t n() const { return features ? features->n() : graph->n(); }
};

LoadedInput load_input(const EngineArgs& a) {
  LoadedInput in;
  if (!a.features.empty()) {
    in.record = {"features", a.features, read_file(a.features)};
    in.features = parse_file(a.features, parse_feature_csv);
  } else {
    in.record = {"graph", a.graph, read_file(a.graph)};
    auto el = parse_file(a.graph, parse_edge_list);
    in.base = el.base;
    in.graph = std::move(el.graph);
  }
  return in;
}

std::string partition_csv(const Partition& p, std::size_t base, const std::string& manifest_id, const char* column) {
  std::string s = "# manifest=" + manifest_id + "\nnode," + column + "\n";
  for (std::size_t v = 0; v < p.n(); ++v) s += std::to_string(v + base) + ',' + std::to_string(p.labels[v]) + '\n';
  return s;
}

int run_engine(const EngineArgs& a, Task task, const std::string& labels_path) {
  const auto in = load_input(a);
  EngineArgs args = a;
  std::optional<LabelSet> labels;
  Manifest manifest;
  manifest.command = task == Task::clustering ? "cluster" : "ssl";
  manifest.inputs.push_back(in.record);
  if (task == Task::ssl) {
    const auto text = read_file(labels_path);
    manifest.inputs.push_back({"labels", labels_path, text});
    labels = parse_file(labels_path, [&](const std::string& t) { return parse_labels(t, in.base, a.K); });
    args.K = labels->K;
  }
  if (args.K == 0) throw ConfigError("--k is required");
  const auto cfg = args.config(task);
  manifest.seed = cfg.seed;
  const std::string output = !a.output.empty() ? a.output : (task == Task::clustering ? "partition.csv" : "predictions.csv");
  manifest.outputs = {{"report", a.report}, {task == Task::clustering ? "partition" : "predictions", output}};

  const auto t0 = std::chrono::steady_clock::now();
  const auto set = in.features ? generate_candidates(*in.features, cfg, labels) : generate_candidates(*in.graph, cfg, labels);
  const auto t1 = std::chrono::steady_clock::now();
  const CandidateCut* selected = nullptr;
  std::optional<NoFeasiblePartition> failure;
  try {
    selected = &pcut_select(set.candidates);
  } catch (const NoFeasiblePartition& e) {
    failure = e;
  }
  const auto t2 = std::chrono::steady_clock::now();
  const Json timings = {{"candidates_seconds", std::chrono::duration<double>(t1 - t0).count()},
                        {"select_seconds", std::chrono::duration<double>(t2 - t1).count()},
                        {"workers", cfg.workers}};
  auto report = make_report(manifest, set, selected, timings);
  if (failure) {
    report["error"] = failure->what();
    if (failure->best_infeasible) report["best_infeasible"] = candidate_json(*failure->best_infeasible);
    write_file(a.report, dump(report));
    std::cerr << "pcut: " << failure->what() << '\n';
    return kNoFeasible;
  }
  write_file(a.report, dump(report));
  if (task == Task::clustering) {
    write_file(output, partition_csv(selected->partition, in.base, manifest.id(), "cluster"));
  } else {
    std::vector<bool> labeled(in.n(), false);
    for (const auto& [v, c] : labels->labeled) labeled[v] = true;
    std::string s = "# manifest=" + manifest.id() + "\nnode,class\n";
    for (std::size_t v = 0; v < in.n(); ++v) {
      if (!labeled[v]) s += std::to_string(v + in.base) + ',' + std::to_string(selected->partition.labels[v]) + '\n';
    }
    write_file(output, s);
  }
  return kOk;
}

// node,cluster CSV covering every node exactly once.
Partition load_partition(const std::string& path, std::size_t base) {
  const auto ls = parse_file(path, [&](const std::string& t) { return parse_labels(t, base); });
  std::size_t n = 0;
  for (const auto& [v, c] : ls.labeled) n = std::max(n, v + 1);
  std::vector<std::size_t> labels(n, static_cast<std::size_t>(-1));
  for (const auto& [v, c] : ls.labeled) {
    if (labels[v] != static_cast<std::size_t>(-1)) throw InputError(path + ": node " + std::to_string(v + base) + " listed twice");
    labels[v] = c;
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (labels[v] == static_cast<std::size_t>(-1)) throw InputError(path + ": node " + std::to_string(v + base) + " is missing");
  }
  return Partition::from_labels(std::move(labels));
}

void write_bundle(const ExperimentBundle& b, const std::string& dir, const Manifest& manifest) {
  Json summary = b.summary;
  Manifest m = manifest;
  m.outputs = {{"summary", dir + "/summary.json"}, {"aggregate", dir + "/aggregate.csv"}};
  for (const auto& r : b.runs) m.outputs.emplace_back("run", dir + "/runs/" + r.name + ".json");
  summary["manifest"] = m.to_json();
  for (const auto& r : b.runs) {
    Json rep = r.report;
    rep["manifest"]["parent"] = m.id();
    write_file(dir + "/runs/" + r.name + ".json", dump(rep));
  }
  write_file(dir + "/aggregate.csv", "# manifest=" + m.id() + "\n" + b.aggregate_csv);
  write_file(dir + "/summary.json", dump(summary));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partition-constrained minimum cut clustering"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  EngineArgs cluster_args;
  auto* cluster = app.add_subcommand("cluster", "cluster a feature matrix or graph");
  cluster_args.add_to(cluster, "partition CSV path (default partition.csv)");
  cluster->add_option("--k", cluster_args.K, "number of clusters")->required();

  EngineArgs ssl_args;
  std::string labels_path;
  auto* ssl = app.add_subcommand("ssl", "semi-supervised labeling with harmonic label propagation");
  ssl_args.add_to(ssl, "predictions CSV path (default predictions.csv)");
  ssl->add_option("--labels", labels_path, "labeled nodes as 'node,class' CSV")->required();
  ssl->add_option("--k", ssl_args.K, "number of classes (default: max class + 1)");

  auto* synth = app.add_subcommand("synth", "generate synthetic data");
  synth->require_subcommand(1);
  SbmSpec sbm;
  std::string out_graph = "sbm.edges", out_truth = "truth.csv", out_features = "features.csv";
  std::optional<std::uint64_t> synth_seed;
  auto* sbm_cmd = synth->add_subcommand("sbm", "two-block stochastic block model");
  sbm_cmd->add_option("--n", sbm.n)->capture_default_str();
  sbm_cmd->add_option("--alpha", sbm.alpha)->capture_default_str();
  sbm_cmd->add_option("--p1", sbm.p1)->capture_default_str();
  sbm_cmd->add_option("--p2", sbm.p2)->capture_default_str();
  sbm_cmd->add_option("--q", sbm.q)->capture_default_str();
  sbm_cmd->add_flag("--equalize", sbm.equalize_degrees, "set p2 so both blocks share the expected degree");
  sbm_cmd->add_option("--seed", synth_seed);
  sbm_cmd->add_option("--out-graph", out_graph)->capture_default_str();
  sbm_cmd->add_option("--out-truth", out_truth)->capture_default_str();

  std::size_t cres_n = 1000;
  double cres_noise = 0.1;
  std::string cres_fracs = "0.45,0.45,0.10";
  auto* cres_cmd = synth->add_subcommand("crescents", "two crescents and a small Gaussian blob");
  cres_cmd->add_option("--n", cres_n)->capture_default_str();
  cres_cmd->add_option("--noise", cres_noise)->capture_default_str();
  cres_cmd->add_option("--fractions", cres_fracs)->capture_default_str();
  cres_cmd->add_option("--seed", synth_seed);
  cres_cmd->add_option("--out-features", out_features)->capture_default_str();
  cres_cmd->add_option("--out-truth", out_truth)->capture_default_str();

  std::size_t mix_n = 750;
  std::vector<std::string> mix_components;
  auto* mix_cmd = synth->add_subcommand("mixture", "diagonal Gaussian mixture");
  mix_cmd->add_option("--n", mix_n)->capture_default_str();
  mix_cmd->add_option("--component", mix_components, "weight:mean1,mean2,...:var1,var2,... (repeat)")->required();
  mix_cmd->add_option("--seed", synth_seed);
  mix_cmd->add_option("--out-features", out_features)->capture_default_str();
  mix_cmd->add_option("--out-truth", out_truth)->capture_default_str();

  std::string found_path, truth_path, eval_out;
  std::size_t eval_base = 0;
  auto* eval = app.add_subcommand("eval", "clustering error under optimal label matching");
  eval->add_option("--found", found_path, "found partition CSV")->required();
  eval->add_option("--truth", truth_path, "ground-truth partition CSV")->required();
  eval->add_option("--base", eval_base, "smallest node id in both files")->capture_default_str();
  eval->add_option("--output", eval_out, "report path (default stdout)");

  std::string exp_name, exp_dir = "experiment-out", exp_graph, exp_truth;
  std::optional<std::size_t> exp_seeds, exp_samplings, exp_n;
  std::optional<std::uint64_t> exp_seed;
  std::size_t exp_workers = 1;
  double exp_noise = 0.1;
  auto* exp = app.add_subcommand("experiment", "rerun a bundled experiment");
  exp->add_option("name", exp_name, "experiment name")->required();
  exp->add_option("--out-dir", exp_dir)->capture_default_str();
  exp->add_option("--seeds", exp_seeds, "simulated graphs per setting (sbm experiments)");
  exp->add_option("--samplings", exp_samplings, "node-removal samplings per setting (dolphins)");
  exp->add_option("--n", exp_n, "problem size (sbm, crescents)");
  exp->add_option("--noise", exp_noise, "radial noise (crescents)")->capture_default_str();
  exp->add_option("--graph", exp_graph, "edge list (karate, dolphins)");
  exp->add_option("--truth", exp_truth, "ground-truth CSV (karate, dolphins)");
  exp->add_option("--seed", exp_seed);
  exp->add_option("--workers", exp_workers)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kOk : kInputError;
  }

  try {
    if (cluster->parsed()) return run_engine(cluster_args, Task::clustering, "");
    if (ssl->parsed()) return run_engine(ssl_args, Task::ssl, labels_path);

    if (synth->parsed()) {
      const std::uint64_t seed = synth_seed ? *synth_seed : env_seed();
      if (sbm_cmd->parsed()) {
        sbm.seed = seed;
        const auto lg = sbm_generate(sbm);
        write_file(out_graph, format_edge_list(lg.graph, 0, false));
        write_file(out_truth, partition_csv(lg.truth, 0, hex64(fnv1a("synth sbm|" + std::to_string(seed))), "cluster"));
        return kOk;
      }
      LabeledFeatures data = [&] {
        if (cres_cmd->parsed()) return crescent_dataset(cres_n, parse_list<double>(cres_fracs, "fraction"), cres_noise, seed);
        std::vector<MixtureComponent> comps;
        for (const auto& spec : mix_components) {
          std::vector<std::string> parts;
          std::string part;
          std::istringstream ss(spec);
          while (std::getline(ss, part, ':')) parts.push_back(part);
          if (parts.size() != 3) throw ConfigError("component '" + spec + "' is not weight:means:variances");
          comps.push_back({parse_list<double>(parts[0], "weight").at(0), parse_list<double>(parts[1], "mean"),
                           parse_list<double>(parts[2], "variance")});
        }
        return gaussian_mixture(mix_n, comps, seed);
      }();
      write_file(out_features, format_feature_csv(data.features));
      write_file(out_truth, partition_csv(data.truth, 0, hex64(fnv1a("synth|" + std::to_string(seed))), "cluster"));
      return kOk;
    }

    if (eval->parsed()) {
      const auto found = load_partition(found_path, eval_base);
      const auto truth = load_partition(truth_path, eval_base);
      const auto rep = clustering_error(found, truth);
      Manifest m{"eval", 0, {{"found", found_path, read_file(found_path)}, {"truth", truth_path, read_file(truth_path)}}, {}};
      if (!eval_out.empty()) m.outputs = {{"report", eval_out}};
      Json j{{"schema", "pcut-eval/1"},
             {"manifest", m.to_json()},
             {"n", found.n()},
             {"error_rate", rep.error_rate},
             {"errors", rep.errors},
             {"matching", rep.matching},
             {"confusion", rep.confusion}};
      if (eval_out.empty()) {
        std::cout << dump(j);
      } else {
        write_file(eval_out, dump(j));
      }
      return kOk;
    }

    if (exp->parsed()) {
      const std::uint64_t seed = exp_seed ? *exp_seed : env_seed();
      Manifest m{"experiment " + exp_name, seed, {}, {}};
      ExperimentBundle b;
      if (exp_name == "sbm-lambda-sweep") {
        SbmLambdaSweepOptions o;
        o.seed = seed;
        o.workers = exp_workers;
        if (exp_seeds) o.seeds = *exp_seeds;
        if (exp_n) o.n = *exp_n;
        b = sbm_lambda_sweep(o);
      } else if (exp_name == "sbm-alpha-sweep") {
        SbmAlphaSweepOptions o;
        o.seed = seed;
        o.workers = exp_workers;
        if (exp_seeds) o.seeds = *exp_seeds;
        if (exp_n) o.n = *exp_n;
        b = sbm_alpha_sweep(o);
      } else if (exp_name == "karate" || exp_name == "dolphins") {
        const bool karate = exp_name == "karate";
        const std::string gpath = !exp_graph.empty() ? exp_graph : std::string(PCUT_DATA_DIR) + "/" + exp_name + ".edges";
        const std::string tpath = !exp_truth.empty() ? exp_truth : std::string(PCUT_DATA_DIR) + "/" + exp_name + ".truth";
        if (!fs::exists(gpath) || !fs::exists(tpath)) {
          throw InputError("the " + exp_name + " experiment needs " + gpath + " and " + tpath +
                           " (pass --graph and --truth)");
        }
        const auto text = read_file(gpath);
        auto el = parse_file(gpath, parse_edge_list);
        const auto truth = load_partition(tpath, el.base);
        if (truth.n() != el.graph.n()) throw InputError(tpath + ": labels cover " + std::to_string(truth.n()) +
                                                        " nodes but the graph has " + std::to_string(el.graph.n()));
        m.inputs = {{"graph", gpath, text}, {"truth", tpath, read_file(tpath)}};
        if (karate) {
          KarateOptions o{el.graph, truth, text, karate_reduced_removals(), 5, seed, exp_workers};
          b = karate_experiment(o);
        } else {
          DolphinsOptions o{el.graph, truth, text};
          o.seed = seed;
          o.workers = exp_workers;
          if (exp_samplings) o.samplings = *exp_samplings;
          b = dolphins_experiment(o);
        }
      } else if (exp_name == "crescents") {
        CrescentOptions o;
        o.seed = seed;
        o.workers = exp_workers;
        o.noise = exp_noise;
        if (exp_n) o.n = *exp_n;
        b = crescents_experiment(o);
      } else {
        std::string names;
        for (const auto& n : experiment_names()) names += (names.empty() ? "" : ", ") + n;
        throw InputError("unknown experiment '" + exp_name + "'; choose one of: " + names);
      }
      write_bundle(b, exp_dir, m);
      std::cout << b.aggregate_csv;
      return kOk;
    }
  } catch (const NoFeasiblePartition& e) {
    std::cerr << "pcut: " << e.what() << '\n';
    return kNoFeasible;
  } catch (const NumericError& e) {
    std::cerr << "pcut: numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const Error& e) {
    std::cerr << "pcut: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "pcut: " << e.what() << '\n';
    return kInputError;
  }
  return kOk;
}
