#pragma once

#include <Eigen/Dense>

#include "amlsim/states.hpp"

namespace amlsim {

enum class EvolveMethod { Auto, DenseEigen, Krylov, Chebyshev };

struct EvolveConfig {
  EvolveMethod method = EvolveMethod::Auto;
  int dense_dim_limit = 2000;     // dense eigendecomposition up to this size
  int krylov_subspace_dim = 30;   // max Lanczos vectors per restart
  double substep_bound = 1.0;     // max ||H|| * dt per Krylov restart
  double leakage_threshold = 1e-8;
  double norm_tolerance = 1e-10;
  double krylov_step_tol = 1e-12;  // a-posteriori error budget per substep
  double chebyshev_tol = 1e-13;    // series truncation target

  void validate() const;
};

// Strictly increasing probe times with t0 = 0 (the preparation instant),
// in units of inverse coupling (hbar = 1).
struct TimeGrid {
  std::vector<double> times;

  static TimeGrid from_points(std::vector<double> points);
  static TimeGrid linear(double t_max, int n_steps);
  // {0} followed by n_steps points spread in [t_min, t_max]
  static TimeGrid linear_from(double t_min, double t_max, int n_steps);
  static TimeGrid log_spaced(double t_min, double t_max, int n_steps);

  std::size_t size() const { return times.size(); }
};

// Probability within one quantum of any truncation boundary; the fidelity
// proxy used to flag under-resolved runs.
double boundary_probability(const StateVector& psi);

// psi(t) = exp(-i H t) psi(0). H must be Hermitian (hint or verified here).
// Throws NumericError on norm drift beyond cfg.norm_tolerance; flags the
// result when boundary probability exceeds cfg.leakage_threshold.
StateVector evolve(const SparseOperator& h, const StateVector& psi0, double t,
                   const EvolveConfig& cfg = {});

// States at every grid time; the dense path reuses one eigendecomposition,
// the iterative paths step from one grid point to the next.
std::vector<StateVector> evolve_series(const SparseOperator& h,
                                       const StateVector& psi0,
                                       const TimeGrid& grid,
                                       const EvolveConfig& cfg = {});

// Reusable dense propagator (cached eigendecomposition).
class DensePropagator {
 public:
  explicit DensePropagator(const SparseOperator& h);
  Vector advance(const Vector& v, double t) const;

 private:
  Eigen::VectorXd m_eigenvalues;
  Eigen::MatrixXcd m_eigenvectors;
};

}  // namespace amlsim
