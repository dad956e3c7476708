#pragma once

#include <iosfwd>

#include "amlsim/propagator.hpp"

namespace amlsim {

// Quadrature squeezing of one mode against the vacuum floor: S_i < 0 declares
// squeezing of component i. The quadrature commutator expectation is taken on
// the truncated basis, so boundary effects show up instead of being assumed
// away.
struct SqueezingReport {
  std::string mode;
  double s1 = 0.0;
  double s2 = 0.0;
  double v1 = 0.0;             // raw variance of G1 = (a + a^)/2
  double v2 = 0.0;             // raw variance of G2 = (a - a^)/2i
  double g1_mean = 0.0;
  double g2_mean = 0.0;
  double commutator_abs = 0.0; // |<[G1, G2]>|
};

// Second-order correlations of a mode pair and the Cauchy-Schwarz comparison.
struct CorrelationReport {
  std::string mode_a;
  std::string mode_b;
  double g2_cross = 0.0;
  double g2_auto_a = 0.0;
  double g2_auto_b = 0.0;
  double csi_lhs = 0.0;  // (g2_cross)^2
  double csi_rhs = 0.0;  // g2_auto_a * g2_auto_b
  bool csi_violated = false;
};

double population(const StateVector& psi, const std::string& mode);
double expectation(const SparseOperator& op, const StateVector& psi);

SqueezingReport squeezing(const StateVector& psi, const std::string& mode);
double mandel_q(const StateVector& psi, const std::string& mode);
double g2_cross(const StateVector& psi, const std::string& mode_a,
                const std::string& mode_b);
double g2_auto(const StateVector& psi, const std::string& mode);
CorrelationReport csi_check(const StateVector& psi, const std::string& mode_a,
                            const std::string& mode_b);

// One column of an ObservableSeries.
struct MetricSpec {
  enum class Kind {
    Population,
    Charge,
    Energy,
    Norm,
    Leakage,
    MandelQ,
    SqueezingS1,
    SqueezingS2,
    SqueezingV1,
    SqueezingV2,
    G2Auto,
    G2Cross,
    CsiLhs,
    CsiRhs,
    CsiViolated,
    PopRatio,
  };

  Kind kind;
  std::string mode_a;  // empty for state-level metrics
  std::string mode_b;

  // Text forms like "population:b", "g2_cross:b:g", "charge".
  static MetricSpec parse(const std::string& text);
  std::string name() const;
};

// Time-indexed table of metric values; undefined statistics are recorded as
// NaN cells rather than aborting the table.
class ObservableSeries {
 public:
  ObservableSeries(TimeGrid grid, std::vector<std::string> columns,
                   std::vector<std::vector<double>> rows);

  const TimeGrid& grid() const { return m_grid; }
  const std::vector<std::string>& columns() const { return m_columns; }
  const std::vector<std::vector<double>>& rows() const { return m_rows; }
  double value(std::size_t row, const std::string& column) const;
  double value_at_time(double t, const std::string& column) const;

  // header row, `time` first, metric columns in spec order, 12 significant
  // digits; byte-deterministic for a fixed series
  void write_csv(std::ostream& os) const;

 private:
  TimeGrid m_grid;
  std::vector<std::string> m_columns;
  std::vector<std::vector<double>> m_rows;
};

// Evaluates every requested metric at every grid time. `hamiltonian` is only
// required when an Energy metric is requested.
ObservableSeries series_report(const std::vector<StateVector>& states,
                               const TimeGrid& grid,
                               const std::vector<MetricSpec>& metrics,
                               const SparseOperator* hamiltonian = nullptr);

}  // namespace amlsim
