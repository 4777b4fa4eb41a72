#ifndef FLATLAB_EXPERIMENT_HPP
#define FLATLAB_EXPERIMENT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dolbeault.hpp"
#include "presets.hpp"

namespace flatlab {

struct Tolerances {
  double flatness = 1e-7;
  double closure = 1e-7;
  double triple_route = 1e-7;
  double extension_independence = 1e-6;
  double global_gauge = 1e-8;
  double pointwise_gauge = 1e-6;
  double homotopy = 1e-6;
  double dolbeault_dbar = 1e-7;
  double closed_form = 1e-8;
};

struct CheckOutcome {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double allowed = 0.0;
  std::string note;
  std::string extra_json;  // check-specific structured payload
};

// Versioned experiment description. Parsing is fail-closed: unknown keys are
// rejected with their JSON path.
struct ExperimentConfig {
  int schema = 1;
  std::string algebra;
  std::string polynomial;
  int n = 3;
  int N = 16;
  std::string family_json;  // canonical serialization of the family subtree
  int gauss_order = 8;
  int gauss_panels = 2;
  int loop_nodes = 32;
  std::vector<std::string> checks;
  Tolerances tol;
  std::uint64_t seed = 1;
  bool write_form = false;
  bool write_convergence = false;

  static ExperimentConfig parse(const std::string& json_text);
  static ExperimentConfig load(const std::string& path);
  // Structural validation: presets exist, 2r-k fits the torus, checks known.
  void validate() const;
  std::string canonical_json() const;
};

struct RunResult {
  bool all_passed = false;
  std::string report_json;
  std::vector<std::string> files_written;
};

// Deterministic given (config, seed): computes the configured invariant, runs
// the requested checks, writes report.json (plus optional dumps) atomically
// under out_dir.
RunResult run_experiment(const ExperimentConfig& config, const std::string& out_dir);

std::string list_presets_text();

}  // namespace flatlab

#endif
