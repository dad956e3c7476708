#include "amlsim/models.hpp"

#include <cmath>

#include "amlsim/errors.hpp"

namespace amlsim {

namespace {

void require_modes(const FockBasis& basis, const ModeSet& expected,
                   const char* model) {
  const ModeSet& got = basis.modes();
  for (std::size_t m = 0; m < expected.size(); ++m) {
    if (!got.has(expected.labels[m]))
      throw ConfigError(std::string(model) + ": basis lacks mode '" +
                        expected.labels[m] + "'");
    const std::size_t i = got.index_of(expected.labels[m]);
    if (got.charge_weights[i] != expected.charge_weights[m])
      throw ConfigError(std::string(model) + ": mode '" + expected.labels[m] +
                        "' carries the wrong charge weight");
  }
  if (got.size() != expected.size())
    throw ConfigError(std::string(model) + ": basis has extra modes");
}

void require_finite(double v, const char* name) {
  if (!std::isfinite(v))
    throw ConfigError(std::string("model parameter ") + name + " is not finite");
}

SparseOperator finish_hamiltonian(SparseOperator h, const char* model) {
  if (!h.verify_hermitian(1e-12))
    throw NumericError(std::string(model) + ": constructed operator is not Hermitian");
  return h;
}

}  // namespace

void FiveModeParams::validate() const {
  require_finite(epsilon1, "epsilon1");
  require_finite(epsilon2, "epsilon2");
  require_finite(omega1, "omega1");
  require_finite(omega2, "omega2");
  require_finite(delta1, "delta1");
  require_finite(delta2, "delta2");
  if (delta1 == 0.0 || delta2 == 0.0)
    throw ConfigError("FiveModeParams: intermediate detunings must be nonzero");
}

void ThreeModeParams::validate() const {
  require_finite(lambda1, "lambda1");
  require_finite(lambda2, "lambda2");
}

double ThreeModeParams::eta() const {
  if (lambda1 == 0.0)
    throw ConfigError("ThreeModeParams: eta undefined for lambda1 = 0");
  const double r = lambda2 / lambda1;
  return r * r;
}

FourModeParams FourModeParams::from_three(const ThreeModeParams& p, double n0) {
  if (!(n0 > 0.0)) throw ConfigError("FourModeParams: n0 must be positive");
  p.validate();
  const double root = std::sqrt(n0);
  return FourModeParams{p.lambda1 * root, p.lambda2 * root, n0};
}

void FourModeParams::validate() const {
  require_finite(lambda1p, "lambda1p");
  require_finite(lambda2p, "lambda2p");
  if (!(n0 > 0.0)) throw ConfigError("FourModeParams: n0 must be positive");
}

ModeSet three_mode_set() { return ModeSet({"c", "b", "g"}, {1, 1, 2}); }

ModeSet five_mode_set() {
  return ModeSet({"c", "e", "b", "m", "g"}, {1, 1, 1, 2, 2});
}

ModeSet four_mode_set() { return ModeSet({"a1", "a2", "b", "g"}, {1, 1, 1, 1}); }

ThreeModeParams effective_params(const FiveModeParams& p) {
  p.validate();
  return ThreeModeParams{p.epsilon1 * p.omega1 / p.delta1,
                         p.epsilon2 * p.omega2 / p.delta2};
}

SparseOperator build_h3(std::shared_ptr<const FockBasis> basis,
                        const ThreeModeParams& p) {
  p.validate();
  require_modes(*basis, three_mode_set(), "build_h3");
  auto c = annihilation(basis, "c");
  auto b = annihilation(basis, "b");
  auto g = annihilation(basis, "g");
  auto atomic = b.adjoint() * c;
  auto pa = g.adjoint() * c * c;
  auto h = p.lambda1 * (atomic + atomic.adjoint()) +
           p.lambda2 * (pa + pa.adjoint());
  return finish_hamiltonian(std::move(h), "build_h3");
}

SparseOperator build_h5(std::shared_ptr<const FockBasis> basis,
                        const FiveModeParams& p) {
  p.validate();
  require_modes(*basis, five_mode_set(), "build_h5");
  auto c = annihilation(basis, "c");
  auto e = annihilation(basis, "e");
  auto b = annihilation(basis, "b");
  auto m = annihilation(basis, "m");
  auto g = annihilation(basis, "g");
  auto ec = e.adjoint() * c;
  auto be = b.adjoint() * e;
  auto mcc = m.adjoint() * c * c;
  auto gm = g.adjoint() * m;
  auto h = (-p.delta1) * (e.adjoint() * e) + (-p.delta2) * (m.adjoint() * m) +
           p.epsilon1 * (ec + ec.adjoint()) + p.omega1 * (be + be.adjoint()) +
           p.epsilon2 * (mcc + mcc.adjoint()) + p.omega2 * (gm + gm.adjoint());
  return finish_hamiltonian(std::move(h), "build_h5");
}

SparseOperator build_h4(std::shared_ptr<const FockBasis> basis,
                        const FourModeParams& p) {
  p.validate();
  require_modes(*basis, four_mode_set(), "build_h4");
  auto a1 = annihilation(basis, "a1");
  auto a2 = annihilation(basis, "a2");
  auto b = annihilation(basis, "b");
  auto g = annihilation(basis, "g");
  auto ch1 = b.adjoint() * a1;
  auto ch2 = g.adjoint() * a2;
  auto h = p.lambda1p * (ch1 + ch1.adjoint()) +
           p.lambda2p * (ch2 + ch2.adjoint());
  return finish_hamiltonian(std::move(h), "build_h4");
}

SparseOperator charge_operator(std::shared_ptr<const FockBasis> basis) {
  std::vector<double> weights;
  weights.reserve(basis->n_modes());
  for (int w : basis->modes().charge_weights)
    weights.push_back(static_cast<double>(w));
  return weighted_number_operator(std::move(basis), weights);
}

}  // namespace amlsim
