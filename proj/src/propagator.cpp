#include "amlsim/propagator.hpp"

#include <algorithm>
#include <cmath>

#include "amlsim/errors.hpp"

namespace amlsim {

namespace {

constexpr Complex kI{0.0, 1.0};

// Gershgorin bounds of a Hermitian sparse matrix: [lo, hi] containing the
// spectrum, and the infinity norm max(|lo|, |hi|).
struct SpectralBounds {
  double lo = 0.0;
  double hi = 0.0;
  double norm() const { return std::max(std::abs(lo), std::abs(hi)); }
};

SpectralBounds gershgorin(const SparseMatrix& m) {
  SpectralBounds b;
  bool first = true;
  for (Eigen::Index row = 0; row < m.outerSize(); ++row) {
    double center = 0.0;
    double radius = 0.0;
    for (SparseMatrix::InnerIterator it(m, row); it; ++it) {
      if (it.col() == row)
        center = it.value().real();
      else
        radius += std::abs(it.value());
    }
    if (first || center - radius < b.lo) b.lo = center - radius;
    if (first || center + radius > b.hi) b.hi = center + radius;
    first = false;
  }
  return b;
}

// One adaptive Lanczos restart: advances v by dt_inout (shrinking it when the
// a-posteriori estimate exceeds tol), returns the advanced vector.
Vector lanczos_substep(const SparseMatrix& h, const Vector& v, double& dt_inout,
                       int m_max, double tol) {
  const double beta0 = v.norm();
  if (beta0 == 0.0) return v;

  std::vector<Vector> basis;
  basis.reserve(static_cast<std::size_t>(m_max) + 1);
  basis.push_back(v / beta0);
  std::vector<double> alpha;
  std::vector<double> beta;  // beta[j] couples v_j and v_{j+1}

  // u = expm(-i T dt) e_1 over the current m-dimensional subspace; err is the
  // weight leaking through the last computed coupling (zero after breakdown).
  auto expm_coeffs = [&](int m, double dt, double* err) -> Eigen::VectorXcd {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < m; ++j) {
      t(j, j) = alpha[static_cast<std::size_t>(j)];
      if (j + 1 < m) {
        t(j, j + 1) = beta[static_cast<std::size_t>(j)];
        t(j + 1, j) = beta[static_cast<std::size_t>(j)];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    Eigen::VectorXcd phases =
        (-kI * dt * es.eigenvalues().cast<Complex>()).array().exp();
    Eigen::VectorXcd u = es.eigenvectors().cast<Complex>() *
                         (phases.asDiagonal() *
                          (es.eigenvectors().row(0).transpose().cast<Complex>()));
    *err = beta.size() >= static_cast<std::size_t>(m)
               ? beta[static_cast<std::size_t>(m - 1)] * std::abs(u[m - 1])
               : 0.0;
    return u;
  };

  bool breakdown = false;
  int m = 0;
  Eigen::VectorXcd u;
  double err = 0.0;
  bool have_u = false;
  while (m < m_max) {
    Vector w = h * basis.back();
    const double a = basis.back().dot(w).real();
    alpha.push_back(a);
    w -= a * basis.back();
    if (!beta.empty()) w -= beta.back() * basis[basis.size() - 2];
    // full reorthogonalization (subspaces stay small)
    for (const auto& q : basis) w -= q.dot(w) * q;
    const double b = w.norm();
    ++m;
    if (b < 1e-14 * std::max(1.0, std::abs(a))) {
      breakdown = true;
      break;
    }
    beta.push_back(b);
    basis.push_back(w / b);

    if (m >= 2) {
      u = expm_coeffs(m, dt_inout, &err);
      have_u = true;
      if (err < tol) break;
    }
  }

  if (!have_u || breakdown) u = expm_coeffs(m, dt_inout, &err);
  if (!breakdown) {
    // subspace exhausted at full dt: shrink the step until the estimate fits
    int halvings = 0;
    while (err >= tol && halvings < 40) {
      dt_inout *= 0.5;
      ++halvings;
      u = expm_coeffs(m, dt_inout, &err);
    }
    if (err >= tol)
      throw NumericError("evolve: Krylov substep failed to converge");
  }

  Vector out = Vector::Zero(v.size());
  for (int j = 0; j < m; ++j)
    out += (beta0 * u[j]) * basis[static_cast<std::size_t>(j)];
  return out;
}

Vector krylov_evolve(const SparseMatrix& h, Vector v, double t,
                     const EvolveConfig& cfg, double hnorm) {
  if (t == 0.0 || hnorm == 0.0) return v;
  const double direction = t >= 0.0 ? 1.0 : -1.0;
  double remaining = std::abs(t);
  const double dt_cap = cfg.substep_bound / hnorm;
  while (remaining > 0.0) {
    double dt = std::min(remaining, dt_cap);
    double signed_dt = direction * dt;
    v = lanczos_substep(h, v, signed_dt, cfg.krylov_subspace_dim,
                        cfg.krylov_step_tol);
    remaining -= std::abs(signed_dt);
    if (remaining < 1e-300) break;
  }
  return v;
}

// Chebyshev expansion of exp(-i H t) over the Gershgorin interval; needs only
// three work vectors, which keeps very large bases affordable.
Vector chebyshev_evolve(const SparseMatrix& h, const Vector& v, double t,
                        const EvolveConfig& cfg, const SpectralBounds& bounds) {
  const double center = 0.5 * (bounds.hi + bounds.lo);
  const double half_width = 0.5 * (bounds.hi - bounds.lo);
  if (half_width == 0.0) {
    return std::exp(-kI * center * t) * v;
  }
  const double omega = half_width * t;  // may be negative
  const double x = std::abs(omega);

  // coefficients c_k = (2 - delta_k0) (-i)^k J_k(omega)
  std::vector<double> jk;
  jk.push_back(std::cyl_bessel_j(0.0, x));
  int consecutive_small = 0;
  const double coeff_tol = cfg.chebyshev_tol / 16.0;
  for (int k = 1;; ++k) {
    const double val = std::cyl_bessel_j(static_cast<double>(k), x);
    jk.push_back(val);
    if (std::abs(val) < coeff_tol && static_cast<double>(k) > x)
      ++consecutive_small;
    else
      consecutive_small = 0;
    if (consecutive_small >= 4) break;
    if (k > 200000)
      throw NumericError("evolve: Chebyshev expansion failed to converge");
  }

  const bool flip = omega < 0.0;  // J_k(-x) = (-1)^k J_k(x)
  const double inv_hw = 1.0 / half_width;

  // scaled operator application: y = (H - center) / half_width * u
  auto apply_scaled = [&](const Vector& u) -> Vector {
    Vector y = h * u;
    y -= center * u;
    y *= inv_hw;
    return y;
  };

  // (-i)^k cycles through {1, -i, -1, i}
  auto minus_i_pow = [](std::size_t k) -> Complex {
    switch (k % 4) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, -1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, 1.0};
    }
  };

  Vector tk_prev = v;           // T_0 psi
  Vector tk = apply_scaled(v);  // T_1 psi
  Vector acc = jk[0] * tk_prev;
  acc += (2.0 * minus_i_pow(1) * (flip ? -jk[1] : jk[1])) * tk;
  for (std::size_t k = 2; k < jk.size(); ++k) {
    Vector tk_next = 2.0 * apply_scaled(tk) - tk_prev;
    tk_prev = std::move(tk);
    tk = std::move(tk_next);
    const double signed_jk = (flip && k % 2 == 1) ? -jk[k] : jk[k];
    acc += (2.0 * minus_i_pow(k) * signed_jk) * tk;
  }
  return std::exp(-kI * center * t) * acc;
}

EvolveMethod pick_method(const EvolveConfig& cfg, std::size_t dim,
                         double hnorm, double dt_step) {
  if (cfg.method != EvolveMethod::Auto) return cfg.method;
  if (dim <= static_cast<std::size_t>(cfg.dense_dim_limit))
    return EvolveMethod::DenseEigen;
  // rough matvec counts per grid step
  const double omega = 0.5 * hnorm * dt_step;
  const double cheb_cost = 1.2 * omega + 40.0;
  const double kry_cost =
      std::ceil(hnorm * dt_step / cfg.substep_bound) *
      std::min<double>(cfg.krylov_subspace_dim, 2.0 * cfg.substep_bound + 12.0);
  return cheb_cost < kry_cost ? EvolveMethod::Chebyshev : EvolveMethod::Krylov;
}

StateVector wrap_result(const StateVector& psi0, Vector amp,
                        const EvolveConfig& cfg) {
  const double drift = std::abs(amp.norm() - psi0.norm());
  if (drift > cfg.norm_tolerance)
    throw NumericError("evolve: norm drift " + std::to_string(drift) +
                       " beyond tolerance");
  StateVector out(psi0.basis_ptr(), std::move(amp), psi0.norm_deficit(),
                  psi0.truncation_warning());
  if (boundary_probability(out) > cfg.leakage_threshold)
    out = out.with_warning(true);
  return out;
}

void require_evolvable(const SparseOperator& h, const StateVector& psi0) {
  if (h.basis_ptr() != psi0.basis_ptr())
    throw ConfigError("evolve: Hamiltonian and state live on different bases");
  if (!h.hermitian_hint() && !check_hermitian(h, 1e-12))
    throw NumericError("evolve: Hamiltonian is not Hermitian");
}

}  // namespace

void EvolveConfig::validate() const {
  if (dense_dim_limit < 1 || krylov_subspace_dim < 2)
    throw ConfigError("EvolveConfig: dimensions must be positive");
  if (!(substep_bound > 0.0) || !(norm_tolerance > 0.0) ||
      !(leakage_threshold > 0.0) || !(krylov_step_tol > 0.0) ||
      !(chebyshev_tol > 0.0))
    throw ConfigError("EvolveConfig: tolerances must be positive");
}

TimeGrid TimeGrid::from_points(std::vector<double> points) {
  if (points.empty() || points.front() != 0.0)
    throw ConfigError("TimeGrid: grid must start at t = 0");
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i] > points[i - 1]))
      throw ConfigError("TimeGrid: times must be strictly increasing");
  }
  TimeGrid g;
  g.times = std::move(points);
  return g;
}

TimeGrid TimeGrid::linear(double t_max, int n_steps) {
  if (!(t_max > 0.0) || n_steps < 1)
    throw ConfigError("TimeGrid: need t_max > 0 and n_steps >= 1");
  std::vector<double> pts(static_cast<std::size_t>(n_steps) + 1);
  for (int i = 0; i <= n_steps; ++i) pts[static_cast<std::size_t>(i)] = t_max * i / n_steps;
  return from_points(std::move(pts));
}

TimeGrid TimeGrid::linear_from(double t_min, double t_max, int n_steps) {
  if (!(t_min > 0.0) || !(t_max > t_min) || n_steps < 1)
    throw ConfigError("TimeGrid: need 0 < t_min < t_max and n_steps >= 1");
  std::vector<double> pts{0.0};
  if (n_steps == 1) {
    pts.push_back(t_max);
  } else {
    for (int i = 0; i < n_steps; ++i)
      pts.push_back(t_min + (t_max - t_min) * i / (n_steps - 1));
  }
  return from_points(std::move(pts));
}

TimeGrid TimeGrid::log_spaced(double t_min, double t_max, int n_steps) {
  if (!(t_min > 0.0) || !(t_max > t_min) || n_steps < 2)
    throw ConfigError("TimeGrid: need 0 < t_min < t_max and n_steps >= 2");
  std::vector<double> pts{0.0};
  const double ratio = std::log(t_max / t_min);
  for (int i = 0; i < n_steps; ++i)
    pts.push_back(t_min * std::exp(ratio * i / (n_steps - 1)));
  return from_points(std::move(pts));
}

double boundary_probability(const StateVector& psi) {
  const auto& basis = psi.basis();
  double p = 0.0;
  for (std::size_t i = 0; i < psi.dim(); ++i) {
    if (basis.is_boundary(i))
      p += std::norm(psi.amplitudes()[static_cast<Eigen::Index>(i)]);
  }
  return p;
}

DensePropagator::DensePropagator(const SparseOperator& h) {
  Eigen::MatrixXcd dense(h.matrix());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense);
  if (es.info() != Eigen::Success)
    throw NumericError("DensePropagator: eigendecomposition failed");
  m_eigenvalues = es.eigenvalues();
  m_eigenvectors = es.eigenvectors();
}

Vector DensePropagator::advance(const Vector& v, double t) const {
  Eigen::VectorXcd phases =
      (-kI * t * m_eigenvalues.cast<Complex>()).array().exp();
  return m_eigenvectors * (phases.asDiagonal() * (m_eigenvectors.adjoint() * v));
}

StateVector evolve(const SparseOperator& h, const StateVector& psi0, double t,
                   const EvolveConfig& cfg) {
  cfg.validate();
  require_evolvable(h, psi0);
  if (!std::isfinite(t)) throw ConfigError("evolve: non-finite time");
  if (t == 0.0) return wrap_result(psi0, psi0.amplitudes(), cfg);

  const auto bounds = gershgorin(h.matrix());
  const auto method = pick_method(cfg, h.dim(), bounds.norm(), std::abs(t));
  Vector amp;
  switch (method) {
    case EvolveMethod::DenseEigen:
      amp = DensePropagator(h).advance(psi0.amplitudes(), t);
      break;
    case EvolveMethod::Krylov:
      amp = krylov_evolve(h.matrix(), psi0.amplitudes(), t, cfg, bounds.norm());
      break;
    case EvolveMethod::Chebyshev:
      amp = chebyshev_evolve(h.matrix(), psi0.amplitudes(), t, cfg, bounds);
      break;
    case EvolveMethod::Auto:
      throw NumericError("evolve: unresolved method");
  }
  return wrap_result(psi0, std::move(amp), cfg);
}

std::vector<StateVector> evolve_series(const SparseOperator& h,
                                       const StateVector& psi0,
                                       const TimeGrid& grid,
                                       const EvolveConfig& cfg) {
  cfg.validate();
  require_evolvable(h, psi0);
  if (grid.times.empty()) throw ConfigError("evolve_series: empty grid");

  std::vector<StateVector> out;
  out.reserve(grid.size());

  const auto bounds = gershgorin(h.matrix());
  double max_step = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    max_step = std::max(max_step, grid.times[i] - grid.times[i - 1]);
  const auto method = pick_method(cfg, h.dim(), bounds.norm(),
                                  max_step > 0.0 ? max_step : 1.0);

  if (method == EvolveMethod::DenseEigen) {
    DensePropagator prop(h);
    for (double t : grid.times) {
      if (t == 0.0)
        out.push_back(wrap_result(psi0, psi0.amplitudes(), cfg));
      else
        out.push_back(wrap_result(psi0, prop.advance(psi0.amplitudes(), t), cfg));
    }
    return out;
  }

  Vector current = psi0.amplitudes();
  double t_now = 0.0;
  for (double t : grid.times) {
    const double dt = t - t_now;
    if (dt > 0.0) {
      if (method == EvolveMethod::Krylov)
        current = krylov_evolve(h.matrix(), current, dt, cfg, bounds.norm());
      else
        current = chebyshev_evolve(h.matrix(), current, dt, cfg, bounds);
      t_now = t;
    }
    out.push_back(wrap_result(psi0, current, cfg));
  }
  return out;
}

}  // namespace amlsim
