#pragma once

#include <json.hpp>

#include "amlsim/analytic.hpp"
#include "amlsim/models.hpp"
#include "amlsim/observables.hpp"

namespace amlsim {

using Json = nlohmann::ordered_json;

inline constexpr int kConfigSchemaVersion = 1;

// One prepared input component (others default to vacuum).
struct StateSpecConfig {
  enum class Kind { Fock, Coherent, Squeezed, Tmsv };
  Kind kind = Kind::Fock;
  std::map<std::string, int> fock_occupation;  // Fock: mode -> quanta
  CoherentSpec coherent;                       // Coherent
  SqueezeSpec squeeze;                         // Squeezed
  TwoModeSqueezeSpec tmsv;                     // Tmsv
  std::vector<std::string> modes_used() const;
};

enum class ModelKind { Three, Five, Four };

struct TimeGridConfig {
  double t_max = 0.0;
  int n_steps = 1;
  double t_min = 0.0;       // > 0 inserts a {0} anchor then spans [t_min, t_max]
  bool log_spacing = false; // requires t_min > 0
  TimeGrid build() const;
};

// Full description of one experiment; round-trips through the JSON schema.
struct ExperimentConfig {
  ModelKind model = ModelKind::Three;
  ThreeModeParams three;
  FiveModeParams five;
  FourModeParams four;
  std::map<std::string, int> per_mode_cutoff;
  std::optional<long> total_charge_cutoff;
  std::vector<StateSpecConfig> initial_state;
  TimeGridConfig time_grid;
  std::vector<MetricSpec> metrics;
  Json comparisons = Json::array();
  EvolveConfig evolve;
  std::string series_filename = "series.csv";
  std::string report_filename = "report.json";

  static ExperimentConfig from_json(const Json& j);
  Json to_json() const;
  void validate() const;

  ModeSet mode_set() const;
  std::shared_ptr<const FockBasis> build_model_basis() const;
  SparseOperator build_hamiltonian(std::shared_ptr<const FockBasis> basis) const;
  StateVector build_initial_state(std::shared_ptr<const FockBasis> basis) const;
};

struct ReportBundle {
  ObservableSeries series;
  std::vector<Discrepancy> discrepancies;
  Json metadata;

  Json to_json() const;
};

ReportBundle run(const ExperimentConfig& config);

// Cartesian parameter sweep over JSON-pointer axes of a base experiment.
struct SweepAxis {
  std::string path;  // e.g. "/initial_state/0/r"
  std::vector<Json> values;
};

struct SweepReduction {
  MetricSpec metric;
  double at_time = 0.0;
};

struct SweepConfig {
  Json base;  // ExperimentConfig as JSON
  std::vector<SweepAxis> axes;
  std::vector<SweepReduction> reductions;
  std::string table_filename = "sweep.csv";
  std::string report_filename = "sweep.json";

  static SweepConfig from_json(const Json& j);
  void validate() const;
};

struct SweepTable {
  std::vector<std::string> columns;           // axis names then reductions
  std::vector<std::vector<double>> rows;
  Json metadata;

  void write_csv(std::ostream& os) const;
  Json to_json() const;
};

// Points run concurrently (capped by AMLASER_THREADS); row order follows the
// Cartesian product of the axes and is deterministic.
SweepTable sweep(const SweepConfig& config);

// Five-mode versus reduced three-mode consistency over a detuning ladder.
struct AdiabaticConfig {
  double lambda1 = 1.0;
  double lambda2 = 0.1;
  double alpha_mag = 1.0;
  std::vector<double> delta_over_lambda1{10.0, 20.0, 40.0, 80.0};
  double t_max = 0.5;
  int n_steps = 26;
  long total_charge = 12;
  EvolveConfig evolve;
  std::string report_filename = "adiabatic.json";

  static AdiabaticConfig from_json(const Json& j);
  void validate() const;
};

struct AdiabaticReport {
  std::vector<double> delta_over_lambda1;
  std::vector<double> max_deviation;  // max_t |<n_b>_5 - <n_b>_3|
  std::vector<double> ratios;         // successive deviation ratios
  bool monotone_decreasing = false;
  Json metadata;

  Json to_json() const;
};

AdiabaticReport validate_adiabatic(const AdiabaticConfig& config);

// Debug exports.
Json basis_to_json(const FockBasis& basis);
Json state_to_json(const StateVector& psi);

// 64-bit FNV-1a of the canonically serialized config, hex-encoded.
std::string config_hash(const Json& config);

// `amlsim <subcommand> ...`; returns the process exit code.
// 0 success, 2 usage error, 3 unreadable input, 4 invalid config, 5 run failure.
int cli_main(const std::vector<std::string>& args);

}  // namespace amlsim
