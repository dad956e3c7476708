#include "amlsim/observables.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>

#include "amlsim/errors.hpp"

namespace amlsim {

namespace {

constexpr double kPopulationFloor = 1e-12;

double diagonal_moment(const StateVector& psi, std::size_t mode,
                       int power) {
  const auto& basis = psi.basis();
  double acc = 0.0;
  for (std::size_t i = 0; i < psi.dim(); ++i) {
    const double p = std::norm(psi.amplitudes()[static_cast<Eigen::Index>(i)]);
    if (p == 0.0) continue;
    const double n = basis.occupation_of(i, mode);
    double f = 1.0;
    for (int k = 0; k < power; ++k) f *= n;
    acc += p * f;
  }
  return acc;
}

double pair_moment(const StateVector& psi, std::size_t mode_a,
                   std::size_t mode_b) {
  const auto& basis = psi.basis();
  double acc = 0.0;
  for (std::size_t i = 0; i < psi.dim(); ++i) {
    const double p = std::norm(psi.amplitudes()[static_cast<Eigen::Index>(i)]);
    if (p == 0.0) continue;
    acc += p * basis.occupation_of(i, mode_a) * basis.occupation_of(i, mode_b);
  }
  return acc;
}

// <a^ a^ a a> = <n(n-1)>, diagonal in the occupation basis
double normal_pair_moment(const StateVector& psi, std::size_t mode) {
  const auto& basis = psi.basis();
  double acc = 0.0;
  for (std::size_t i = 0; i < psi.dim(); ++i) {
    const double p = std::norm(psi.amplitudes()[static_cast<Eigen::Index>(i)]);
    if (p == 0.0) continue;
    const double n = basis.occupation_of(i, mode);
    acc += p * n * (n - 1.0);
  }
  return acc;
}

double population_or_throw(const StateVector& psi, const std::string& mode,
                           const char* what) {
  const double n = population(psi, mode);
  if (n <= kPopulationFloor)
    throw UndefinedStatisticError(std::string(what) + ": population of mode '" +
                                  mode + "' is below 1e-12");
  return n;
}

}  // namespace

double population(const StateVector& psi, const std::string& mode) {
  return diagonal_moment(psi, psi.basis().modes().index_of(mode), 1);
}

double expectation(const SparseOperator& op, const StateVector& psi) {
  if (op.basis_ptr() != psi.basis_ptr())
    throw ConfigError("expectation: operator and state on different bases");
  return psi.amplitudes().dot(op.matrix() * psi.amplitudes()).real();
}

SqueezingReport squeezing(const StateVector& psi, const std::string& mode) {
  auto a = annihilation(psi.basis_ptr(), mode);
  const Vector& x = psi.amplitudes();
  const Vector ax = a.matrix() * x;
  const Vector adx = a.matrix().adjoint() * x;

  const Complex a_mean = x.dot(ax);
  const Complex a2_mean = adx.dot(ax);  // <a a>
  const double n_mean = ax.squaredNorm();    // <a^ a>
  const double aad_mean = adx.squaredNorm(); // <a a^>

  // [G1, G2] = (i/2)[a, a^]; near the cutoff the truncated commutator departs
  // from the identity, so evaluate it on the state
  const double comm = aad_mean - n_mean;
  const double half_comm_abs = 0.5 * std::abs(comm);
  if (half_comm_abs < 1e-12)
    throw UndefinedStatisticError(
        "squeezing: quadrature commutator expectation degenerate for mode '" +
        mode + "'");

  SqueezingReport rep;
  rep.mode = mode;
  rep.g1_mean = a_mean.real();
  rep.g2_mean = a_mean.imag();
  const double g1_sq = 0.25 * (2.0 * a2_mean.real() + n_mean + aad_mean);
  const double g2_sq = 0.25 * (-2.0 * a2_mean.real() + n_mean + aad_mean);
  rep.v1 = g1_sq - rep.g1_mean * rep.g1_mean;
  rep.v2 = g2_sq - rep.g2_mean * rep.g2_mean;
  rep.commutator_abs = half_comm_abs;
  const double floor = 0.5 * half_comm_abs;
  rep.s1 = (rep.v1 - floor) / floor;
  rep.s2 = (rep.v2 - floor) / floor;
  return rep;
}

double mandel_q(const StateVector& psi, const std::string& mode) {
  const double mean = population_or_throw(psi, mode, "mandel_q");
  const std::size_t m = psi.basis().modes().index_of(mode);
  const double n2 = diagonal_moment(psi, m, 2);
  return (n2 - mean * mean) / mean - 1.0;
}

double g2_cross(const StateVector& psi, const std::string& mode_a,
                const std::string& mode_b) {
  if (mode_a == mode_b)
    throw ConfigError("g2_cross: modes must be distinct");
  const double na = population_or_throw(psi, mode_a, "g2_cross");
  const double nb = population_or_throw(psi, mode_b, "g2_cross");
  const double nanb = pair_moment(psi, psi.basis().modes().index_of(mode_a),
                                  psi.basis().modes().index_of(mode_b));
  return nanb / (na * nb);
}

double g2_auto(const StateVector& psi, const std::string& mode) {
  const double n = population_or_throw(psi, mode, "g2_auto");
  const double nn = normal_pair_moment(psi, psi.basis().modes().index_of(mode));
  return nn / (n * n);
}

CorrelationReport csi_check(const StateVector& psi, const std::string& mode_a,
                            const std::string& mode_b) {
  CorrelationReport rep;
  rep.mode_a = mode_a;
  rep.mode_b = mode_b;
  rep.g2_cross = g2_cross(psi, mode_a, mode_b);
  rep.g2_auto_a = g2_auto(psi, mode_a);
  rep.g2_auto_b = g2_auto(psi, mode_b);
  rep.csi_lhs = rep.g2_cross * rep.g2_cross;
  rep.csi_rhs = rep.g2_auto_a * rep.g2_auto_b;
  rep.csi_violated = rep.csi_lhs > rep.csi_rhs;
  return rep;
}

MetricSpec MetricSpec::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(':', start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  auto expect = [&](std::size_t n) {
    if (parts.size() != n)
      throw ConfigError("MetricSpec: malformed metric '" + text + "'");
  };
  const std::string& head = parts[0];
  MetricSpec spec{};
  if (head == "population") {
    expect(2);
    spec = {Kind::Population, parts[1], ""};
  } else if (head == "charge") {
    expect(1);
    spec = {Kind::Charge, "", ""};
  } else if (head == "energy") {
    expect(1);
    spec = {Kind::Energy, "", ""};
  } else if (head == "norm") {
    expect(1);
    spec = {Kind::Norm, "", ""};
  } else if (head == "leakage") {
    expect(1);
    spec = {Kind::Leakage, "", ""};
  } else if (head == "mandel_q") {
    expect(2);
    spec = {Kind::MandelQ, parts[1], ""};
  } else if (head == "squeezing_s1") {
    expect(2);
    spec = {Kind::SqueezingS1, parts[1], ""};
  } else if (head == "squeezing_s2") {
    expect(2);
    spec = {Kind::SqueezingS2, parts[1], ""};
  } else if (head == "squeezing_v1") {
    expect(2);
    spec = {Kind::SqueezingV1, parts[1], ""};
  } else if (head == "squeezing_v2") {
    expect(2);
    spec = {Kind::SqueezingV2, parts[1], ""};
  } else if (head == "g2_auto") {
    expect(2);
    spec = {Kind::G2Auto, parts[1], ""};
  } else if (head == "g2_cross") {
    expect(3);
    spec = {Kind::G2Cross, parts[1], parts[2]};
  } else if (head == "csi_lhs") {
    expect(3);
    spec = {Kind::CsiLhs, parts[1], parts[2]};
  } else if (head == "csi_rhs") {
    expect(3);
    spec = {Kind::CsiRhs, parts[1], parts[2]};
  } else if (head == "csi_violated") {
    expect(3);
    spec = {Kind::CsiViolated, parts[1], parts[2]};
  } else if (head == "pop_ratio") {
    expect(3);
    spec = {Kind::PopRatio, parts[1], parts[2]};
  } else {
    throw ConfigError("MetricSpec: unknown metric '" + text + "'");
  }
  return spec;
}

std::string MetricSpec::name() const {
  switch (kind) {
    case Kind::Population: return "population:" + mode_a;
    case Kind::Charge: return "charge";
    case Kind::Energy: return "energy";
    case Kind::Norm: return "norm";
    case Kind::Leakage: return "leakage";
    case Kind::MandelQ: return "mandel_q:" + mode_a;
    case Kind::SqueezingS1: return "squeezing_s1:" + mode_a;
    case Kind::SqueezingS2: return "squeezing_s2:" + mode_a;
    case Kind::SqueezingV1: return "squeezing_v1:" + mode_a;
    case Kind::SqueezingV2: return "squeezing_v2:" + mode_a;
    case Kind::G2Auto: return "g2_auto:" + mode_a;
    case Kind::G2Cross: return "g2_cross:" + mode_a + ":" + mode_b;
    case Kind::CsiLhs: return "csi_lhs:" + mode_a + ":" + mode_b;
    case Kind::CsiRhs: return "csi_rhs:" + mode_a + ":" + mode_b;
    case Kind::CsiViolated: return "csi_violated:" + mode_a + ":" + mode_b;
    case Kind::PopRatio: return "pop_ratio:" + mode_a + ":" + mode_b;
  }
  return "?";
}

ObservableSeries::ObservableSeries(TimeGrid grid,
                                   std::vector<std::string> columns,
                                   std::vector<std::vector<double>> rows)
    : m_grid(std::move(grid)),
      m_columns(std::move(columns)),
      m_rows(std::move(rows)) {
  if (m_rows.size() != m_grid.size())
    throw ConfigError("ObservableSeries: row count does not match grid");
  for (const auto& row : m_rows) {
    if (row.size() != m_columns.size())
      throw ConfigError("ObservableSeries: ragged rows");
  }
}

double ObservableSeries::value(std::size_t row, const std::string& column) const {
  for (std::size_t c = 0; c < m_columns.size(); ++c) {
    if (m_columns[c] == column) return m_rows[row][c];
  }
  throw ConfigError("ObservableSeries: no column '" + column + "'");
}

double ObservableSeries::value_at_time(double t, const std::string& column) const {
  std::size_t best = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m_grid.size(); ++i) {
    const double err = std::abs(m_grid.times[i] - t);
    if (err < best_err) {
      best_err = err;
      best = i;
    }
  }
  if (best_err > 1e-9 * std::max(1.0, std::abs(t)))
    throw ConfigError("ObservableSeries: no grid point near requested time");
  return value(best, column);
}

void ObservableSeries::write_csv(std::ostream& os) const {
  os << "time";
  for (const auto& c : m_columns) os << "," << c;
  os << "\n";
  char buf[64];
  auto put = [&](double v) {
    if (std::isnan(v)) {
      os << "nan";
    } else {
      std::snprintf(buf, sizeof(buf), "%.12g", v);
      os << buf;
    }
  };
  for (std::size_t i = 0; i < m_rows.size(); ++i) {
    put(m_grid.times[i]);
    for (double v : m_rows[i]) {
      os << ",";
      put(v);
    }
    os << "\n";
  }
}

ObservableSeries series_report(const std::vector<StateVector>& states,
                               const TimeGrid& grid,
                               const std::vector<MetricSpec>& metrics,
                               const SparseOperator* hamiltonian) {
  if (states.size() != grid.size())
    throw ConfigError("series_report: states do not align with grid");
  for (const auto& spec : metrics) {
    if (spec.kind == MetricSpec::Kind::Energy && hamiltonian == nullptr)
      throw ConfigError("series_report: energy metric needs the Hamiltonian");
  }

  std::vector<std::string> columns;
  columns.reserve(metrics.size());
  for (const auto& spec : metrics) columns.push_back(spec.name());

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::vector<double>> rows;
  rows.reserve(states.size());
  // squeezing evaluations share one report per (state, mode)
  for (const auto& psi : states) {
    std::map<std::string, SqueezingReport> squeeze_cache;
    auto squeeze_of = [&](const std::string& mode) -> const SqueezingReport& {
      auto it = squeeze_cache.find(mode);
      if (it == squeeze_cache.end())
        it = squeeze_cache.emplace(mode, squeezing(psi, mode)).first;
      return it->second;
    };

    std::vector<double> row;
    row.reserve(metrics.size());
    for (const auto& spec : metrics) {
      double v = nan;
      try {
        switch (spec.kind) {
          case MetricSpec::Kind::Population:
            v = population(psi, spec.mode_a);
            break;
          case MetricSpec::Kind::Charge: {
            const auto& basis = psi.basis();
            double acc = 0.0;
            for (std::size_t i = 0; i < psi.dim(); ++i) {
              const double p =
                  std::norm(psi.amplitudes()[static_cast<Eigen::Index>(i)]);
              if (p != 0.0) acc += p * basis.charge_of(i);
            }
            v = acc;
            break;
          }
          case MetricSpec::Kind::Energy:
            v = expectation(*hamiltonian, psi);
            break;
          case MetricSpec::Kind::Norm:
            v = psi.norm();
            break;
          case MetricSpec::Kind::Leakage:
            v = boundary_probability(psi);
            break;
          case MetricSpec::Kind::MandelQ:
            v = mandel_q(psi, spec.mode_a);
            break;
          case MetricSpec::Kind::SqueezingS1:
            v = squeeze_of(spec.mode_a).s1;
            break;
          case MetricSpec::Kind::SqueezingS2:
            v = squeeze_of(spec.mode_a).s2;
            break;
          case MetricSpec::Kind::SqueezingV1:
            v = squeeze_of(spec.mode_a).v1;
            break;
          case MetricSpec::Kind::SqueezingV2:
            v = squeeze_of(spec.mode_a).v2;
            break;
          case MetricSpec::Kind::G2Auto:
            v = g2_auto(psi, spec.mode_a);
            break;
          case MetricSpec::Kind::G2Cross:
            v = g2_cross(psi, spec.mode_a, spec.mode_b);
            break;
          case MetricSpec::Kind::CsiLhs:
            v = csi_check(psi, spec.mode_a, spec.mode_b).csi_lhs;
            break;
          case MetricSpec::Kind::CsiRhs:
            v = csi_check(psi, spec.mode_a, spec.mode_b).csi_rhs;
            break;
          case MetricSpec::Kind::CsiViolated:
            v = csi_check(psi, spec.mode_a, spec.mode_b).csi_violated ? 1.0 : 0.0;
            break;
          case MetricSpec::Kind::PopRatio: {
            const double d =
                population_or_throw(psi, spec.mode_b, "pop_ratio");
            v = population(psi, spec.mode_a) / d;
            break;
          }
        }
      } catch (const UndefinedStatisticError&) {
        v = nan;
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  return ObservableSeries(grid, std::move(columns), std::move(rows));
}

}  // namespace amlsim
