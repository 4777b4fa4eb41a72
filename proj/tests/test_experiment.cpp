#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "experiment.hpp"

using namespace flatlab;
namespace fs = std::filesystem;

namespace {
const char* kGoodConfig = R"({
  "schema": 1,
  "algebra": "su2",
  "polynomial": "su2_inner_product",
  "torus": {"n": 3, "points": 16},
  "family": {
    "kind": "straight_line",
    "a0": {"generator": "zero"},
    "a1": {"generator": "pure_gauge",
           "gauge": {"generator": "su2_winding_product", "w": [1, 1, 1]}}
  },
  "quadrature": {"gauss_order": 8, "gauss_panels": 2},
  "checks": ["closure", "triple_route"],
  "seed": 7
})";

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}
}  // namespace

TEST_CASE("config parses and validates") {
  ExperimentConfig cfg = ExperimentConfig::parse(kGoodConfig);
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.algebra == "su2");
  CHECK(cfg.N == 16);
  CHECK(cfg.seed == 7);
  // canonical form re-parses to the same canonical form
  ExperimentConfig again = ExperimentConfig::parse(cfg.canonical_json());
  CHECK(again.canonical_json() == cfg.canonical_json());
}

TEST_CASE("unknown keys are rejected with their path") {
  std::string bad = kGoodConfig;
  bad.insert(bad.rfind('}'), ", \"extra_key\": 1");
  try {
    ExperimentConfig::parse(bad);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("extra_key") != std::string::npos);
  }
}

TEST_CASE("dimension constraint is checked at load time") {
  std::string bad = kGoodConfig;
  auto pos = bad.find("\"n\": 3");
  bad.replace(pos, 6, "\"n\": 2");
  ExperimentConfig cfg = ExperimentConfig::parse(bad);
  try {
    cfg.validate();
    CHECK(false);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("2r-k <= n") != std::string::npos);
  }
}

TEST_CASE("unknown check and polynomial names are rejected") {
  {
    std::string bad = kGoodConfig;
    auto pos = bad.find("\"closure\"");
    bad.replace(pos, 9, "\"clozure\"");
    ExperimentConfig cfg = ExperimentConfig::parse(bad);
    CHECK_THROWS_AS(cfg.validate(), Error);
  }
  {
    std::string bad = kGoodConfig;
    auto pos = bad.find("su2_inner_product");
    bad.replace(pos, 17, "su2_inner_prodcut");
    ExperimentConfig cfg = ExperimentConfig::parse(bad);
    CHECK_THROWS_AS(cfg.validate(), Error);
  }
}

TEST_CASE("wrong field types are config errors") {
  std::string bad = kGoodConfig;
  auto pos = bad.find("[\"closure\", \"triple_route\"]");
  bad.replace(pos, std::string("[\"closure\", \"triple_route\"]").size(), "5");
  try {
    ExperimentConfig::parse(bad);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config_error);
  }
}

TEST_CASE("catalog contents and stability") {
  std::string c1 = list_presets_text();
  std::string c2 = list_presets_text();
  CHECK(c1 == c2);
  CHECK(c1.find("su2_inner_product") != std::string::npos);
  CHECK(c1.find("u2_p2p1") != std::string::npos);
  CHECK(c1.find("straight_line") != std::string::npos);
  CHECK(c1.find("winding_gauge") != std::string::npos);
}

TEST_CASE("runs are deterministic and pass the requested checks") {
  ExperimentConfig cfg = ExperimentConfig::parse(kGoodConfig);
  fs::path dir1 = fs::temp_directory_path() / "flatlab_run_a";
  fs::path dir2 = fs::temp_directory_path() / "flatlab_run_b";
  fs::remove_all(dir1);
  fs::remove_all(dir2);
  RunResult r1 = run_experiment(cfg, dir1.string());
  RunResult r2 = run_experiment(cfg, dir2.string());
  CHECK(r1.all_passed);
  CHECK(r1.report_json == r2.report_json);
  CHECK(read_file(dir1 / "report.json") == read_file(dir2 / "report.json"));
  CHECK(read_file(dir1 / "report.json") == r1.report_json);
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("failing checks fail the run") {
  // random endpoints are not flat; on a 4-torus the invariant picks up a
  // genuine derivative defect (the boundary characteristic form survives)
  std::string cfg_text = R"({
    "schema": 1,
    "algebra": "su2",
    "polynomial": "su2_inner_product",
    "torus": {"n": 4, "points": 8},
    "family": {
      "kind": "straight_line",
      "a0": {"generator": "zero"},
      "a1": {"generator": "random_band_limited", "max_mode": 2, "amplitude": 0.5}
    },
    "checks": ["closure"],
    "seed": 3
  })";
  ExperimentConfig cfg = ExperimentConfig::parse(cfg_text);
  RunResult r = run_experiment(cfg, "");
  CHECK(!r.all_passed);
  CHECK(r.report_json.find("boundary not flat") != std::string::npos);
}

TEST_CASE("cone config with the full check set") {
  std::string cfg_text = R"({
    "schema": 1,
    "algebra": "u2",
    "polynomial": "u2_c1c1_int",
    "torus": {"n": 2, "points": 16},
    "family": {
      "kind": "cone",
      "loop": {"generator": "cartan_circle",
               "cos": [[1, 0, 0, 0], [0, 0, 0, 0]],
               "sin": [[0, 0, 0, 0], [1, 0, 0, 0]]}
    },
    "quadrature": {"gauss_order": 8, "gauss_panels": 1, "loop_nodes": 24},
    "checks": ["closure", "extension_independence", "pointwise_gauge", "homotopy"],
    "seed": 11
  })";
  ExperimentConfig cfg = ExperimentConfig::parse(cfg_text);
  RunResult r = run_experiment(cfg, "");
  CHECK(r.all_passed);
  CHECK(r.report_json.find("periods_mod_z") != std::string::npos);
}

TEST_CASE("dolbeault check through the runner") {
  std::string cfg_text = R"({
    "schema": 1,
    "algebra": "u2",
    "polynomial": "u2_tr2",
    "torus": {"n": 4, "points": 8},
    "family": {
      "kind": "cone",
      "loop": {"generator": "cartan_circle",
               "cos": [[1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
               "sin": [[0, 0, 0, 0], [1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]}
    },
    "quadrature": {"gauss_order": 8, "gauss_panels": 1, "loop_nodes": 16},
    "checks": ["closure", "dolbeault"],
    "seed": 13
  })";
  ExperimentConfig cfg = ExperimentConfig::parse(cfg_text);
  RunResult r = run_experiment(cfg, "");
  CHECK(r.all_passed);
}

TEST_CASE("form dumps are written and convertible") {
  ExperimentConfig cfg = ExperimentConfig::parse(kGoodConfig);
  cfg.write_form = true;
  cfg.write_convergence = true;
  cfg.checks = {"closure"};
  fs::path dir = fs::temp_directory_path() / "flatlab_run_dump";
  fs::remove_all(dir);
  RunResult r = run_experiment(cfg, dir.string());
  CHECK(r.all_passed);
  CHECK(fs::exists(dir / "invariant_form.bin"));
  CHECK(fs::exists(dir / "convergence.csv"));
  std::string csv = read_file(dir / "convergence.csv");
  CHECK(csv.rfind("node,u1,weight,integrand_max_norm", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("results are bit-identical across thread counts") {
  ExperimentConfig cfg = ExperimentConfig::parse(kGoodConfig);
  set_num_threads(1);
  RunResult serial = run_experiment(cfg, "");
  set_num_threads(2);
  RunResult parallel = run_experiment(cfg, "");
  set_num_threads(0);
  CHECK(serial.report_json == parallel.report_json);
}
