#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "amlsim/errors.hpp"
#include "amlsim/harness.hpp"
#include "amlsim/observables.hpp"

using namespace amlsim;

namespace {

Json small_config() {
  return Json::parse(R"({
    "schema_version": 1,
    "model": {"type": "three", "lambda1": 1.0, "lambda2": 1.0},
    "truncation": {"per_mode": {"c": 10, "b": 10, "g": 5}, "total_charge": 10},
    "initial_state": [
      {"type": "coherent", "mode": "c", "magnitude": 1.0, "phase": 0.0}
    ],
    "time_grid": {"t_max": 0.1, "n_steps": 4},
    "metrics": ["population:c", "population:b", "population:g", "charge", "norm"]
  })");
}

std::string csv_of(const ReportBundle& bundle) {
  std::ostringstream os;
  bundle.series.write_csv(os);
  return os.str();
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("amlsim_test_" + std::to_string(std::rand()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("experiment config parses, validates and round-trips") {
  auto config = ExperimentConfig::from_json(small_config());
  CHECK(config.model == ModelKind::Three);
  CHECK(config.three.lambda1 == 1.0);
  CHECK(config.metrics.size() == 5);

  auto round = ExperimentConfig::from_json(config.to_json());
  CHECK(round.to_json() == config.to_json());

  // rejected configs
  auto bad = small_config();
  bad["schema_version"] = 2;
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);

  bad = small_config();
  bad["model"]["type"] = "nine";
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);

  bad = small_config();
  bad["truncation"]["per_mode"].erase("g");
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);

  bad = small_config();
  bad["time_grid"]["t_max"] = -1.0;
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);

  bad = small_config();
  bad["metrics"].push_back("bogus:x");
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);
}

TEST_CASE("run produces a conserved, deterministic series") {
  auto config = ExperimentConfig::from_json(small_config());
  auto bundle = run(config);

  CHECK(bundle.metadata["basis_dim"].get<std::size_t>() == 161);
  const double c0 = bundle.series.value(0, "charge");
  for (std::size_t row = 0; row < bundle.series.grid().size(); ++row) {
    CHECK(std::abs(bundle.series.value(row, "charge") - c0) < 1e-9);
    CHECK(std::abs(bundle.series.value(row, "norm") - 1.0) < 1e-10);
  }

  auto again = run(config);
  CHECK(csv_of(bundle) == csv_of(again));
  CHECK(bundle.metadata["config_hash"] == again.metadata["config_hash"]);

  // report JSON carries metadata, series and discrepancies
  auto j = bundle.to_json();
  CHECK(j.contains("metadata"));
  CHECK(j.contains("series"));
  CHECK(j.contains("discrepancies"));
  CHECK(j["series"]["time"].size() == 5);
}

TEST_CASE("flux ratio comparison passes inside its tolerance") {
  auto j = Json::parse(R"({
    "schema_version": 1,
    "model": {"type": "three", "lambda1": 1.0, "lambda2": 1.0},
    "truncation": {"per_mode": {"c": 24, "b": 24, "g": 12}, "total_charge": 24},
    "initial_state": [
      {"type": "squeezed", "mode": "c", "r": 0.5, "phi_s": 0.0}
    ],
    "time_grid": {"t_max": 0.01, "n_steps": 1},
    "metrics": ["population:b", "population:g"],
    "evolve": {"method": "chebyshev"},
    "comparisons": [
      {"type": "flux_ratio_squeezed", "at_time": 0.01, "tolerance": 0.02}
    ]
  })");
  auto bundle = run(ExperimentConfig::from_json(j));
  REQUIRE(bundle.discrepancies.size() == 1);
  CHECK(bundle.discrepancies[0].pass);
  CHECK(bundle.discrepancies[0].rel_err < 0.02);
  CHECK(bundle.discrepancies[0].predicted == doctest::Approx(1.8146).epsilon(1e-3));
}

TEST_CASE("sweep rows reproduce standalone runs and stay ordered") {
  auto sweep_json = Json::parse(R"({
    "schema_version": 1,
    "base": {
      "schema_version": 1,
      "model": {"type": "three", "lambda1": 1.0, "lambda2": 1.0},
      "truncation": {"per_mode": {"c": 24, "b": 24, "g": 12}, "total_charge": 24},
      "initial_state": [
        {"type": "squeezed", "mode": "c", "r": 0.5, "phi_s": 0.0}
      ],
      "time_grid": {"t_max": 0.01, "n_steps": 1},
      "metrics": ["population:b", "population:g"],
      "evolve": {"method": "chebyshev"}
    },
    "axes": [{"path": "/initial_state/0/r", "values": [0.3, 0.5]}],
    "reduce": [{"metric": "pop_ratio:g:b", "at_time": 0.01}]
  })");
  auto config = SweepConfig::from_json(sweep_json);
  auto table = sweep(config);
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0][0] == 0.3);
  CHECK(table.rows[1][0] == 0.5);

  // ratios approximate 1 + 3 sinh^2 r within 2 percent
  for (std::size_t i = 0; i < 2; ++i) {
    const double r = table.rows[i][0];
    const double sh = std::sinh(r);
    const double predicted = 1.0 + 3.0 * sh * sh;
    CHECK(std::abs(table.rows[i][1] - predicted) / predicted < 0.02);
  }

  // a standalone run of the first point matches its row
  auto point = sweep_json["base"];
  point["/initial_state/0/r"_json_pointer] = 0.3;
  auto point_config = ExperimentConfig::from_json(point);
  point_config.metrics.push_back(MetricSpec::parse("pop_ratio:g:b"));
  auto bundle = run(point_config);
  CHECK(std::abs(table.rows[0][1] -
                 bundle.series.value_at_time(0.01, "pop_ratio:g:b")) < 1e-12);

  // empty axis values are rejected
  auto bad = sweep_json;
  bad["axes"][0]["values"] = Json::array();
  CHECK_THROWS_AS(SweepConfig::from_json(bad), ConfigError);
}

TEST_CASE("squeeze-angle sweep reproduces the regime table") {
  // numeric signs carry the quadrature-label swap relative to the published
  // regime table: the transfer multiplies each output amplitude by -i, which
  // rotates G1 into G2
  auto sweep_json = Json::parse(R"({
    "schema_version": 1,
    "base": {
      "schema_version": 1,
      "model": {"type": "three", "lambda1": 1.0, "lambda2": 1.0},
      "truncation": {"per_mode": {"c": 24, "b": 24, "g": 12}, "total_charge": 24},
      "initial_state": [
        {"type": "squeezed", "mode": "c", "r": 0.5, "phi_s": 0.0}
      ],
      "time_grid": {"t_max": 0.02, "n_steps": 1},
      "metrics": [],
      "evolve": {"method": "chebyshev"}
    },
    "axes": [{"path": "/initial_state/0/phi_s",
              "values": [0.0, 0.7853981633974483, 1.5707963267948966,
                         3.141592653589793]}],
    "reduce": [
      {"metric": "squeezing_s1:b", "at_time": 0.02},
      {"metric": "squeezing_s2:b", "at_time": 0.02},
      {"metric": "squeezing_s1:g", "at_time": 0.02},
      {"metric": "squeezing_s2:g", "at_time": 0.02}
    ]
  })");
  auto table = sweep(SweepConfig::from_json(sweep_json));
  REQUIRE(table.rows.size() == 4);
  auto squeezed = [&](std::size_t row, std::size_t col) {
    return table.rows[row][col] < 0.0;
  };
  // columns: phi_s, s1b, s2b, s1g, s2g
  // phi_s = 0 (published case: atomic S2, molecular S2 -> swapped to S1, S1)
  CHECK(squeezed(0, 1));
  CHECK_FALSE(squeezed(0, 2));
  CHECK(squeezed(0, 3));
  CHECK_FALSE(squeezed(0, 4));
  // phi_s = pi/4 with r = 0.5 < ln(1 + sqrt 2): atomic squeezed, molecular not
  CHECK(squeezed(1, 1));
  CHECK_FALSE(squeezed(1, 3));
  CHECK_FALSE(squeezed(1, 4));
  // phi_s = pi/2: atomic never squeezed, molecular one component
  CHECK_FALSE(squeezed(2, 1));
  CHECK_FALSE(squeezed(2, 2));
  CHECK(squeezed(2, 4));
  CHECK_FALSE(squeezed(2, 3));
  // phi_s = pi: squeezing moves to the other atomic component
  CHECK_FALSE(squeezed(3, 1));
  CHECK(squeezed(3, 2));
  CHECK(squeezed(3, 3));

  // matches the published classification modulo the swap
  const double quarter = 0.7853981633974483;
  auto rep = classify_squeezing_regime(quarter, 0.5);
  CHECK(rep.regime == SqueezeRegime::AngleQuarterPi);
  CHECK(rep.atom_s2_squeezed == squeezed(1, 1));  // swapped pairing
}

TEST_CASE("adiabatic deviation decreases over a short ladder") {
  AdiabaticConfig cfg;
  cfg.lambda1 = 1.0;
  cfg.lambda2 = 0.1;
  cfg.alpha_mag = 1.0;
  cfg.delta_over_lambda1 = {40.0, 80.0};
  cfg.t_max = 0.5;
  cfg.n_steps = 100;
  cfg.total_charge = 10;
  auto rep = validate_adiabatic(cfg);
  REQUIRE(rep.max_deviation.size() == 2);
  CHECK(rep.monotone_decreasing);
  CHECK(rep.ratios[0] >= 1.5);
  CHECK(rep.ratios[0] <= 3.0);
  auto j = rep.to_json();
  CHECK(j["rows"].size() == 2);
}

TEST_CASE("config hash is stable and order-insensitive") {
  auto a = Json::parse(R"({"x": 1, "y": [1, 2]})");
  auto b = Json::parse(R"({"y": [1, 2], "x": 1})");
  CHECK(config_hash(a) == config_hash(b));
  auto c = Json::parse(R"({"x": 2, "y": [1, 2]})");
  CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("debug exports") {
  auto basis = build_basis(ModeSet({"c"}, {1}), TruncationSpec::uniform(1, 2));
  auto bj = basis_to_json(*basis);
  CHECK(bj["dim"] == 3);
  CHECK(bj["states"].size() == 3);

  auto psi = coherent_state(basis, CoherentSpec{"c", 0.3, 0.0});
  auto sj = state_to_json(psi);
  CHECK(sj["amplitudes"].size() == 3);
  CHECK(sj.contains("norm_deficit"));
}

TEST_CASE("cli drives the happy path and reports categorized failures") {
  TempDir dir;
  const auto config_path = dir.path / "config.json";
  {
    std::ofstream out(config_path);
    out << small_config().dump(2);
  }
  const std::string out_dir = (dir.path / "out").string();

  CHECK(cli_main({"simulate", config_path.string(), "--output-dir", out_dir,
                  "--quiet"}) == 0);
  CHECK(std::filesystem::exists(dir.path / "out" / "series.csv"));
  CHECK(std::filesystem::exists(dir.path / "out" / "report.json"));

  // byte-identical on rerun
  std::ifstream first(dir.path / "out" / "series.csv");
  std::stringstream s1;
  s1 << first.rdbuf();
  CHECK(cli_main({"simulate", config_path.string(), "--output-dir", out_dir,
                  "--quiet"}) == 0);
  std::ifstream second(dir.path / "out" / "series.csv");
  std::stringstream s2;
  s2 << second.rdbuf();
  CHECK(s1.str() == s2.str());

  // compare-analytic writes only the report
  const std::string cmp_dir = (dir.path / "cmp").string();
  CHECK(cli_main({"compare-analytic", config_path.string(), "--output-dir",
                  cmp_dir, "--quiet"}) == 0);
  CHECK(std::filesystem::exists(dir.path / "cmp" / "report.json"));
  CHECK_FALSE(std::filesystem::exists(dir.path / "cmp" / "series.csv"));

  // error categories: missing file -> 3, invalid config -> 4, usage -> 2
  CHECK(cli_main({"simulate", (dir.path / "nope.json").string(), "--quiet"}) == 3);
  const auto bad_path = dir.path / "bad.json";
  {
    std::ofstream out(bad_path);
    out << "{ not json";
  }
  CHECK(cli_main({"simulate", bad_path.string(), "--quiet"}) == 4);
  const auto wrong_path = dir.path / "wrong.json";
  {
    auto wrong = small_config();
    wrong["model"]["type"] = "nine";
    std::ofstream out(wrong_path);
    out << wrong.dump();
  }
  CHECK(cli_main({"simulate", wrong_path.string(), "--quiet"}) == 4);
  CHECK(cli_main({"frobnicate"}) == 2);
  CHECK(cli_main({"simulate"}) == 2);
}

TEST_CASE("sweep points run concurrently when threads are allowed") {
  setenv("AMLASER_THREADS", "2", 1);
  auto sweep_json = Json::parse(R"({
    "schema_version": 1,
    "base": {
      "schema_version": 1,
      "model": {"type": "three", "lambda1": 1.0, "lambda2": 1.0},
      "truncation": {"per_mode": {"c": 10, "b": 10, "g": 5}, "total_charge": 10},
      "initial_state": [
        {"type": "coherent", "mode": "c", "magnitude": 1.0, "phase": 0.0}
      ],
      "time_grid": {"t_max": 0.05, "n_steps": 1},
      "metrics": ["population:b"]
    },
    "axes": [{"path": "/initial_state/0/magnitude",
              "values": [0.5, 1.0, 1.5, 2.0]}],
    "reduce": [{"metric": "population:b", "at_time": 0.05}]
  })");
  auto table = sweep(SweepConfig::from_json(sweep_json));
  unsetenv("AMLASER_THREADS");
  REQUIRE(table.rows.size() == 4);
  // rows stay in axis order and track alpha^2
  for (std::size_t i = 0; i < 4; ++i) {
    const double alpha = table.rows[i][0];
    CHECK(table.rows[i][1] ==
          doctest::Approx(alpha * alpha * std::sin(0.05) * std::sin(0.05))
              .epsilon(0.01));
  }
}
