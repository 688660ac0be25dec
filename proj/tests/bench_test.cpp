#include <catch2/catch.hpp>

#include <cstdio>
#include <fstream>
#include <string>

#include "bossamp/bench.hpp"

using namespace bossamp;

namespace {

// Writes content to a unique temp config file and returns its path.
std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = "bench_test_" + name + ".cfg";
  std::ofstream out(path);
  out << content;
  return path;
}

const std::string kValidVariableM =
    "algorithm = bossamp-group\n"
    "prior = sparse-binary\n"
    "n = 64\n"
    "k = 8\n"
    "group_size = 2\n"
    "m = 24,40\n"
    "snr_db = 25\n"
    "realizations = 3\n"
    "master_seed = 11\n";

}  // namespace

TEST_CASE("config parsing", "[bench]") {
  SECTION("valid variable-m config") {
    const auto path = write_temp("ok", kValidVariableM);
    const auto cfg = parse_config_file(path, Family::VariableM);
    REQUIRE(cfg.m == std::vector<Index>{24, 40});
    REQUIRE(cfg.snr_db.size() == 1);
    REQUIRE(cfg.eps_tol == 1e-4);  // defaults
    REQUIRE(cfg.t_max == 100);
    std::remove(path.c_str());
  }
  SECTION("unknown keys are rejected by name") {
    const auto path = write_temp("unknown", kValidVariableM + "realisations = 5\n");
    REQUIRE_THROWS_WITH(parse_config_file(path, Family::VariableM),
                        Catch::Contains("realisations"));
    std::remove(path.c_str());
  }
  SECTION("duplicate keys are rejected") {
    const auto path = write_temp("dup", kValidVariableM + "n = 32\n");
    REQUIRE_THROWS_WITH(parse_config_file(path, Family::VariableM), Catch::Contains("duplicate"));
    std::remove(path.c_str());
  }
  SECTION("missing required keys are rejected") {
    const auto path = write_temp("missing", "algorithm = bamp\nprior = sparse-binary\n");
    REQUIRE_THROWS_AS(parse_config_file(path, Family::VariableM), ConfigError);
    std::remove(path.c_str());
  }
  SECTION("family mismatch is rejected") {
    const auto path = write_temp("fam", "family = variable-snr\n" + kValidVariableM);
    REQUIRE_THROWS_AS(parse_config_file(path, Family::VariableM), ConfigError);
    std::remove(path.c_str());
  }
  SECTION("sweep syntax") {
    const auto path = write_temp("sweep",
                                 "algorithm = bamp\nprior = sparse-binary\nn = 64\nk = 8\n"
                                 "m = 32\nsnr_db = 0:5:40\nrealizations = 2\nmaster_seed = 1\n");
    const auto cfg = parse_config_file(path, Family::VariableSnr);
    REQUIRE(cfg.snr_db.size() == 9);
    REQUIRE(cfg.snr_db.front() == 0.0);
    REQUIRE(cfg.snr_db.back() == 40.0);
    std::remove(path.c_str());
  }
  SECTION("misplaced keys for the algorithm are rejected") {
    const auto path = write_temp("lambda", kValidVariableM + "lambda = 1.0\n");
    REQUIRE_THROWS_AS(parse_config_file(path, Family::VariableM), ConfigError);
    std::remove(path.c_str());
  }
}

TEST_CASE("config validation", "[bench]") {
  ExperimentConfig cfg;
  cfg.family = Family::VariableM;
  cfg.algorithm = Algorithm::BossampGroup;
  cfg.n = 64;
  cfg.k = 9;
  cfg.group_size = 2;
  cfg.m = {32};
  cfg.snr_db = {25.0};
  cfg.realizations = 2;
  SECTION("k must divide into groups") {
    REQUIRE_THROWS_WITH(validate_config(cfg), Catch::Contains("divisible"));
  }
  SECTION("phase-transition axes must sit inside the open unit interval") {
    cfg.family = Family::PhaseTransition;
    cfg.k = 8;
    cfg.undersampling = {0.5, 1.0};
    cfg.sparsity = {0.5};
    REQUIRE_THROWS_WITH(validate_config(cfg), Catch::Contains("(0, 1)"));
    cfg.undersampling = {0.5, 0.6};
    REQUIRE_NOTHROW(validate_config(cfg));
  }
  SECTION("joint runs are rejected for phase transitions") {
    cfg.family = Family::PhaseTransition;
    cfg.k = 8;
    cfg.algorithm = Algorithm::BossampJoint;
    cfg.blocks = 2;
    cfg.undersampling = {0.5};
    cfg.sparsity = {0.5};
    REQUIRE_THROWS_AS(validate_config(cfg), ConfigError);
  }
}

TEST_CASE("csv formatting", "[bench]") {
  REQUIRE(format_fixed(0.0) == "0.0000000000");
  REQUIRE(format_fixed(to_db(1.0)) == "0.0000000000");  // nmse of 1 in dB
  REQUIRE(format_fixed(-12.5) == "-12.5000000000");
  REQUIRE(format_fixed(to_db(0.0)) == "-inf");
  SECTION("header-only table") {
    ResultTable empty;
    empty.header = {"a", "b"};
    REQUIRE(to_csv_string(empty) == "a,b\n");
  }
  SECTION("write failures carry the path") {
    ResultTable t;
    t.header = {"x"};
    REQUIRE_THROWS_WITH(write_csv(t, "/nonexistent_dir_zz/out.csv"),
                        Catch::Contains("/nonexistent_dir_zz/out.csv"));
  }
}

TEST_CASE("experiment runner determinism", "[bench]") {
  ExperimentConfig cfg;
  cfg.family = Family::VariableM;
  cfg.algorithm = Algorithm::BossampGroup;
  cfg.prior_kind = PriorKind::SparseBinary;
  cfg.n = 64;
  cfg.k = 8;
  cfg.group_size = 2;
  cfg.m = {24, 40};
  cfg.snr_db = {25.0};
  cfg.realizations = 6;
  cfg.master_seed = 11;

  const auto reference = to_csv_string(run_experiment(cfg, 1));
  SECTION("rerun is byte identical") {
    REQUIRE(to_csv_string(run_experiment(cfg, 1)) == reference);
  }
  SECTION("thread count does not change the bytes") {
    REQUIRE(to_csv_string(run_experiment(cfg, 2)) == reference);
    REQUIRE(to_csv_string(run_experiment(cfg, 5)) == reference);
  }
  SECTION("rows follow the sweep and respect bounds") {
    const auto table = run_experiment(cfg, 2);
    REQUIRE(table.rows.size() == 2);
    REQUIRE(table.rows[0][0] == "24");
    REQUIRE(table.rows[1][0] == "40");
    for (const auto& row : table.rows) {
      const double avg_success = std::stod(row[4]);
      const double mean_iterations = std::stod(row[3]);
      REQUIRE(avg_success >= 0.0);
      REQUIRE(avg_success <= 1.0);
      REQUIRE(mean_iterations <= cfg.t_max);
      REQUIRE(std::stoll(row[5]) == cfg.realizations);
    }
  }
  SECTION("joint runs flow through the harness") {
    cfg.algorithm = Algorithm::BossampJoint;
    cfg.prior_kind = PriorKind::SparseGaussian;
    cfg.blocks = 2;
    cfg.m = {40};
    const auto table = run_experiment(cfg, 2);
    REQUIRE(table.rows.size() == 1);
  }
}

TEST_CASE("phase transition grid", "[bench]") {
  SECTION("cell sizing follows the rounding rule") {
    auto [m1, k1] = phase_transition_cell_size(256, 2, 0.5, 0.3);
    REQUIRE(m1 == 128);
    REQUIRE(k1 == 38);  // round(38.4) = 38, already even
    auto [m2, k2] = phase_transition_cell_size(256, 8, 0.5, 0.3);
    REQUIRE(k2 == 32);  // 38 rounded down to a multiple of 8
    auto [m3, k3] = phase_transition_cell_size(256, 8, 0.05, 0.05);
    REQUIRE(m3 == 13);
    REQUIRE(k3 == 8);  // minimum one group
  }
  SECTION("grid populates every cell and is thread independent") {
    ExperimentConfig cfg;
    cfg.family = Family::PhaseTransition;
    cfg.algorithm = Algorithm::Bamp;
    cfg.prior_kind = PriorKind::SparseBinary;
    cfg.n = 32;
    cfg.group_size = 1;
    cfg.realizations = 3;
    cfg.master_seed = 5;
    cfg.undersampling = {0.25, 0.5, 0.75};
    cfg.sparsity = {0.2, 0.5};
    cfg.snr_db = {std::numeric_limits<double>::infinity()};
    const auto grid = run_phase_transition(cfg, 1);
    REQUIRE(grid.cells.size() == 3);
    for (const auto& row : grid.cells) {
      REQUIRE(row.size() == 2);
      for (const auto& cell : row) {
        REQUIRE(cell.realizations == 3);
        REQUIRE(cell.avg_success >= 0.0);
        REQUIRE(cell.avg_success <= 1.0);
      }
    }
    const auto threaded = run_phase_transition(cfg, 4);
    REQUIRE(to_csv_string(grid_table(grid)) == to_csv_string(grid_table(threaded)));
    // contour table renders without error (possibly empty)
    const auto contour = contour_half(grid);
    const auto table = contour_table(contour);
    REQUIRE(table.header.size() == 3);
  }
}
