#include "amlsim/states.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "amlsim/errors.hpp"

namespace amlsim {

namespace {

// Applies exp(x A^2 - x* A^2-adjoint ...) -- concretely exp(G) with the
// anti-Hermitian generator G = xi (a^)^2 - xi* a^2 restricted to `basis` --
// to `v`, through the eigendecomposition of the Hermitian operator iG.
Vector apply_squeeze_generator(const std::shared_ptr<const FockBasis>& basis,
                               const std::string& mode, Complex xi,
                               const Vector& v) {
  auto a = annihilation(basis, mode);
  auto a2 = a * a;
  auto gen = xi * a2.adjoint() + (-std::conj(xi)) * a2;  // anti-Hermitian
  Eigen::MatrixXcd h = Complex(0.0, 1.0) * Eigen::MatrixXcd(gen.matrix());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  if (es.info() != Eigen::Success)
    throw NumericError("squeezed_state: eigensolver failed");
  // exp(G) = exp(-i h)
  Eigen::VectorXcd phases =
      (Complex(0.0, -1.0) * es.eigenvalues().cast<Complex>()).array().exp();
  return es.eigenvectors() *
         (phases.asDiagonal() * (es.eigenvectors().adjoint() * v));
}

// Coherent amplitudes on a single-mode basis, plus the Poisson tail mass the
// cutoff discarded.
std::pair<Vector, double> coherent_amplitudes(int cutoff, Complex alpha) {
  Vector amp = Vector::Zero(cutoff + 1);
  // c_n = e^{-|a|^2/2} alpha^n / sqrt(n!)
  const double a2 = std::norm(alpha);
  Complex c = std::exp(-0.5 * a2);
  double kept = 0.0;
  for (int n = 0; n <= cutoff; ++n) {
    amp[n] = c;
    kept += std::norm(c);
    c *= alpha / std::sqrt(static_cast<double>(n + 1));
  }
  return {std::move(amp), std::max(0.0, 1.0 - kept)};
}

StateVector finalize(std::shared_ptr<const FockBasis> basis, Vector amp,
                     double deficit, double deficit_bar) {
  const double norm = amp.norm();
  if (norm <= 0.0)
    throw NumericError("state preparation: all amplitude lost to truncation");
  amp /= norm;
  deficit = std::clamp(deficit, 0.0, 1.0);
  return StateVector(std::move(basis), std::move(amp), deficit,
                     deficit > deficit_bar);
}

}  // namespace

Complex CoherentSpec::alpha() const {
  return std::polar(magnitude, phase);
}

void CoherentSpec::validate() const {
  if (mode.empty()) throw ConfigError("CoherentSpec: empty mode label");
  if (!(magnitude >= 0.0) || !std::isfinite(magnitude))
    throw ConfigError("CoherentSpec: magnitude must be >= 0");
  if (!std::isfinite(phase)) throw ConfigError("CoherentSpec: bad phase");
}

Complex SqueezeSpec::xi() const {
  return std::polar(strength / 2.0, -angle);
}

void SqueezeSpec::validate() const {
  if (mode.empty()) throw ConfigError("SqueezeSpec: empty mode label");
  if (!(strength >= 0.0) || !std::isfinite(strength))
    throw ConfigError("SqueezeSpec: strength must be >= 0");
  if (!std::isfinite(angle)) throw ConfigError("SqueezeSpec: bad angle");
  if (displacement) {
    displacement->validate();
    if (displacement->mode != mode)
      throw ConfigError("SqueezeSpec: displacement targets a different mode");
  }
}

Complex TwoModeSqueezeSpec::zeta() const {
  return std::polar(strength, -angle);
}

void TwoModeSqueezeSpec::validate() const {
  if (mode_a.empty() || mode_b.empty())
    throw ConfigError("TwoModeSqueezeSpec: empty mode label");
  if (mode_a == mode_b)
    throw ConfigError("TwoModeSqueezeSpec: modes must be distinct");
  if (!(strength >= 0.0) || !std::isfinite(strength))
    throw ConfigError("TwoModeSqueezeSpec: strength must be >= 0");
  if (!std::isfinite(angle)) throw ConfigError("TwoModeSqueezeSpec: bad angle");
}

StateVector::StateVector(std::shared_ptr<const FockBasis> basis,
                         Vector amplitudes, double norm_deficit,
                         bool truncation_warning)
    : m_basis(std::move(basis)),
      m_amp(std::move(amplitudes)),
      m_norm_deficit(norm_deficit),
      m_truncation_warning(truncation_warning) {
  if (!m_basis) throw ConfigError("StateVector: null basis");
  if (static_cast<std::size_t>(m_amp.size()) != m_basis->dim())
    throw ConfigError("StateVector: amplitude length does not match basis");
  if (m_norm_deficit < 0.0)
    throw ConfigError("StateVector: negative norm deficit");
}

StateVector StateVector::renormalized() const {
  const double n = norm();
  if (n <= 0.0) throw NumericError("StateVector: cannot renormalize zero vector");
  return StateVector(m_basis, m_amp / n, m_norm_deficit, m_truncation_warning);
}

StateVector StateVector::with_warning(bool flag) const {
  return StateVector(m_basis, m_amp, m_norm_deficit, flag);
}

StateVector fock_state(std::shared_ptr<const FockBasis> basis,
                       const Occupation& occ) {
  const std::size_t idx = basis->index_of_or_throw(occ);
  Vector amp = Vector::Zero(static_cast<Eigen::Index>(basis->dim()));
  amp[static_cast<Eigen::Index>(idx)] = 1.0;
  return StateVector(std::move(basis), std::move(amp), 0.0, false);
}

StateVector vacuum_state(std::shared_ptr<const FockBasis> basis) {
  Occupation zeros(basis->n_modes(), 0);
  return fock_state(std::move(basis), zeros);
}

StateVector coherent_state(std::shared_ptr<const FockBasis> basis,
                           const CoherentSpec& spec, double deficit_bar) {
  spec.validate();
  const std::size_t m = basis->modes().index_of(spec.mode);
  const Complex alpha = spec.alpha();

  Vector amp = Vector::Zero(static_cast<Eigen::Index>(basis->dim()));
  // walk the single-mode line through the vacuum; the charge cone may end it
  // before the per-mode cutoff does
  std::size_t idx = basis->index_of_or_throw(Occupation(basis->n_modes(), 0));
  const double a2 = std::norm(alpha);
  Complex c = std::exp(-0.5 * a2);
  double kept = std::norm(c);
  amp[static_cast<Eigen::Index>(idx)] = c;
  for (int n = 1;; ++n) {
    auto up = basis->raised(idx, m);
    if (!up) break;
    idx = *up;
    c *= alpha / std::sqrt(static_cast<double>(n));
    amp[static_cast<Eigen::Index>(idx)] = c;
    kept += std::norm(c);
  }
  return finalize(std::move(basis), std::move(amp), 1.0 - kept, deficit_bar);
}

StateVector squeezed_state(std::shared_ptr<const FockBasis> basis,
                           const SqueezeSpec& spec, double deficit_bar) {
  spec.validate();
  const std::size_t m = basis->modes().index_of(spec.mode);

  // occupation reach of the target line inside the (possibly charge-cut) basis
  int line_max = 0;
  {
    std::size_t idx = basis->index_of_or_throw(Occupation(basis->n_modes(), 0));
    while (auto up = basis->raised(idx, m)) {
      idx = *up;
      ++line_max;
    }
  }

  if (spec.strength == 0.0 && !spec.displacement)
    return vacuum_state(std::move(basis));

  // exponentiate on a head-room basis so reflection off the work cutoff stays
  // negligible, then project onto the target line
  const int work_cutoff = std::min(255, 2 * line_max + 16);
  auto work = build_basis(ModeSet({spec.mode}, {1}),
                          TruncationSpec::uniform(1, work_cutoff));

  Vector v;
  double displacement_deficit = 0.0;
  if (spec.displacement) {
    auto [amp, deficit] =
        coherent_amplitudes(work_cutoff, spec.displacement->alpha());
    v = std::move(amp);
    displacement_deficit = deficit;
    v /= v.norm();
  } else {
    v = Vector::Zero(work_cutoff + 1);
    v[0] = 1.0;
  }
  if (spec.strength > 0.0)
    v = apply_squeeze_generator(work, spec.mode, spec.xi(), v);

  Vector amp = Vector::Zero(static_cast<Eigen::Index>(basis->dim()));
  std::size_t idx = basis->index_of_or_throw(Occupation(basis->n_modes(), 0));
  double kept = 0.0;
  for (int n = 0; n <= line_max; ++n) {
    if (n > 0) idx = *basis->raised(idx, m);  // line verified above
    amp[static_cast<Eigen::Index>(idx)] = v[n];
    kept += std::norm(v[n]);
  }
  const double deficit =
      1.0 - kept * (1.0 - displacement_deficit);
  return finalize(std::move(basis), std::move(amp), deficit, deficit_bar);
}

StateVector two_mode_squeezed_vacuum(std::shared_ptr<const FockBasis> basis,
                                     const TwoModeSqueezeSpec& spec,
                                     double deficit_bar) {
  spec.validate();
  const std::size_t ma = basis->modes().index_of(spec.mode_a);
  const std::size_t mb = basis->modes().index_of(spec.mode_b);

  // psi(n, n) = (e^{-i theta} tanh k)^n / cosh k on the pair diagonal
  const double th = std::tanh(spec.strength);
  const Complex tau = std::polar(th, -spec.angle);
  const double ch = std::cosh(spec.strength);

  Vector amp = Vector::Zero(static_cast<Eigen::Index>(basis->dim()));
  std::size_t idx = basis->index_of_or_throw(Occupation(basis->n_modes(), 0));
  Complex c = Complex(1.0 / ch, 0.0);
  double kept = std::norm(c);
  amp[static_cast<Eigen::Index>(idx)] = c;
  for (int n = 1;; ++n) {
    auto upa = basis->raised(idx, ma);
    if (!upa) break;
    auto upb = basis->raised(*upa, mb);
    if (!upb) break;
    idx = *upb;
    c *= tau;
    amp[static_cast<Eigen::Index>(idx)] = c;
    kept += std::norm(c);
  }
  return finalize(std::move(basis), std::move(amp), 1.0 - kept, deficit_bar);
}

StateVector product_state(std::shared_ptr<const FockBasis> joint,
                          const std::vector<StateVector>& parts,
                          double deficit_bar) {
  if (parts.empty()) throw ConfigError("product_state: no component states");

  // component mode groups must partition the joint modes
  std::vector<int> owner(joint->n_modes(), -1);
  for (std::size_t p = 0; p < parts.size(); ++p) {
    for (const auto& label : parts[p].basis().modes().labels) {
      const std::size_t m = joint->modes().index_of(label);
      if (owner[m] != -1)
        throw ConfigError("product_state: mode '" + label +
                          "' appears in more than one component");
      owner[m] = static_cast<int>(p);
    }
  }
  for (std::size_t m = 0; m < owner.size(); ++m) {
    if (owner[m] == -1)
      throw ConfigError("product_state: mode '" + joint->modes().labels[m] +
                        "' not covered by any component");
  }

  // sparse supports of each component
  struct Entry {
    Occupation occ;
    Complex amp;
  };
  std::vector<std::vector<Entry>> supports(parts.size());
  double parts_kept = 1.0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    parts_kept *= 1.0 - parts[p].norm_deficit();
    const auto& st = parts[p];
    for (std::size_t i = 0; i < st.dim(); ++i) {
      const Complex a = st.amplitudes()[static_cast<Eigen::Index>(i)];
      if (a != Complex(0.0, 0.0))
        supports[p].push_back({st.basis().occupation(i), a});
    }
  }

  Vector amp = Vector::Zero(static_cast<Eigen::Index>(joint->dim()));
  double kept = 0.0;
  Occupation occ(joint->n_modes(), 0);
  std::vector<std::size_t> pick(parts.size(), 0);
  for (;;) {
    Complex a(1.0, 0.0);
    for (std::size_t p = 0; p < parts.size(); ++p) {
      const Entry& e = supports[p][pick[p]];
      a *= e.amp;
      const auto& labels = parts[p].basis().modes().labels;
      for (std::size_t lm = 0; lm < labels.size(); ++lm)
        occ[joint->modes().index_of(labels[lm])] = e.occ[lm];
    }
    if (auto idx = joint->index_of(occ)) {
      amp[static_cast<Eigen::Index>(*idx)] = a;
      kept += std::norm(a);
    }
    // odometer over the component supports
    std::size_t p = 0;
    while (p < parts.size() && ++pick[p] == supports[p].size()) {
      pick[p] = 0;
      ++p;
    }
    if (p == parts.size()) break;
  }

  const double deficit = 1.0 - kept * parts_kept;
  return finalize(std::move(joint), std::move(amp), deficit, deficit_bar);
}

int default_condensate_cutoff(double alpha_mag, double r) {
  const double sh = std::sinh(r);
  const double need = std::max({4.0 * alpha_mag * alpha_mag, 10.0 * sh * sh, 12.0});
  return static_cast<int>(std::ceil(need));
}

}  // namespace amlsim
