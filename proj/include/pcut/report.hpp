#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcut.hpp"
#include "rng.hpp"
#include "synth.hpp"

namespace pcut {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kReportSchema = "pcut-report/1";

using Json = nlohmann::ordered_json;

inline std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

// JSON has no infinities or NaN; those become null.
inline Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

struct InputRecord {
  std::string role;
  std::string path;
  std::string content;
};

struct Manifest {
  std::string command;
  std::uint64_t seed = 0;
  std::vector<InputRecord> inputs;
  std::vector<std::pair<std::string, std::string>> outputs;  // (role, path)

  // Identifies the run: command, seed, version and input digests.
  std::string id() const {
    std::string key = command + '|' + std::to_string(seed) + '|' + kVersion;
    for (const auto& in : inputs) key += '|' + in.role + ':' + hex64(fnv1a(in.content));
    return hex64(fnv1a(key));
  }

  Json to_json() const {
    Json j;
    j["id"] = id();
    j["command"] = command;
    j["seed"] = seed;
    j["version"] = kVersion;
    Json ins = Json::array();
    for (const auto& in : inputs) {
      ins.push_back({{"role", in.role}, {"path", in.path}, {"bytes", in.content.size()}, {"fnv1a64", hex64(fnv1a(in.content))}});
    }
    j["inputs"] = ins;
    Json outs = Json::array();
    for (const auto& [role, path] : outputs) outs.push_back({{"role", role}, {"path", path}});
    j["outputs"] = outs;
    return j;
  }
};

inline Json config_json(const CandidateSet& set) {
  const auto& cfg = set.config;
  Json j;
  j["delta"] = cfg.delta;
  j["size_threshold"] = set.threshold;
  j["K"] = cfg.K;
  j["task"] = to_string(cfg.task);
  j["modality"] = to_string(cfg.modality);
  j["lambda_grid"] = cfg.lambdas();
  if (cfg.modality == Modality::similarity) {
    std::vector<std::size_t> ks;
    std::vector<int> js;
    for (const auto& c : set.candidates) {
      if (c.params.k && std::find(ks.begin(), ks.end(), *c.params.k) == ks.end()) ks.push_back(*c.params.k);
      if (c.params.sigma_exponent && std::find(js.begin(), js.end(), *c.params.sigma_exponent) == js.end()) {
        js.push_back(*c.params.sigma_exponent);
      }
    }
    j["k_grid"] = ks;
    j["sigma_exponent_grid"] = js;
    j["rbf_weights"] = cfg.rbf_weights;
  }
  if (cfg.task == Task::clustering) {
    j["laplacian"] = to_string(cfg.variant);
    j["normalize_rows"] = cfg.normalize_rows;
    j["kmeans_restarts"] = cfg.kmeans_restarts;
    j["kmeans_max_iters"] = cfg.kmeans_max_iters;
  }
  j["seed"] = cfg.seed;
  return j;
}

inline Json candidate_json(const CandidateCut& c) {
  Json j;
  j["index"] = c.index;
  j["lambda"] = c.params.lambda;
  if (c.params.k) j["k"] = *c.params.k;
  if (c.params.sigma_exponent) j["sigma_exponent"] = *c.params.sigma_exponent;
  if (c.params.sigma) j["sigma"] = *c.params.sigma;
  j["feasible"] = c.feasible;
  j["min_cluster_size"] = c.min_cluster_size;
  j["baseline_cut"] = c.baseline_cut;
  j["normalized_cut"] = c.normalized_cut;
  j["graph_edges"] = c.graph_edges;
  if (!c.failure.empty()) j["failure"] = c.failure;
  return j;
}

inline Json baseline_json(const CandidateSet& set) {
  const auto& cfg = set.config;
  Json j;
  j["n"] = set.n;
  j["edges"] = set.baseline_edges;
  if (cfg.modality == Modality::similarity) {
    j["construction_k"] = set.construction_k;
    j["selection_k"] = set.selection_k;
    j["selection_sigma"] = set.selection_sigma;
    j["weights"] = "rbf";
  } else {
    j["graph"] = "input";
    j["weights"] = "unit";
    j["isolated_nodes"] = set.isolated;
  }
  return j;
}

inline std::vector<std::string> run_notes(const CandidateSet& set) {
  const auto& cfg = set.config;
  std::vector<std::string> notes;
  if (cfg.task == Task::ssl) {
    notes.emplace_back("baseline cut is evaluated on the full predicted partition, labeled nodes included");
  }
  if (!set.isolated.empty()) {
    notes.emplace_back(std::to_string(set.isolated.size()) + " isolated node(s) given density statistic 0");
  }
  return notes;
}

// Full run report. `selected` may be null when no candidate was feasible.
inline Json make_report(const Manifest& manifest, const CandidateSet& set, const CandidateCut* selected,
                        const Json& timings) {
  Json j;
  j["schema"] = kReportSchema;
  j["manifest"] = manifest.to_json();
  j["config"] = config_json(set);
  j["baseline"] = baseline_json(set);
  Json cands = Json::array();
  for (const auto& c : set.candidates) cands.push_back(candidate_json(c));
  j["candidates"] = cands;
  if (selected) {
    j["selected"] = candidate_json(*selected);
    j["partition"] = selected->partition.labels;
  } else {
    j["selected"] = nullptr;
    j["partition"] = nullptr;
  }
  j["notes"] = run_notes(set);
  j["timings"] = timings;
  return j;
}

inline Json crescent_geometry_json() {
  return {{"radius", CrescentGeometry::radius},
          {"lower_arc_center", {CrescentGeometry::lower_dx, CrescentGeometry::lower_dy}},
          {"blob_center", {CrescentGeometry::blob_x, CrescentGeometry::blob_y}},
          {"blob_sd", CrescentGeometry::blob_sd}};
}

// Dumps with a trailing newline.
inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace pcut
