#pragma once

#include <optional>

#include "amlsim/operators.hpp"

namespace amlsim {

// Glauber coherent input |alpha> with alpha = magnitude * exp(i*phase).
struct CoherentSpec {
  std::string mode;
  double magnitude = 0.0;
  double phase = 0.0;

  Complex alpha() const;
  void validate() const;
};

// Single-mode squeeze S(xi) = exp[xi (a^)^2 - xi* a^2], xi = (r/2) e^{-i phi_s},
// optionally applied on top of a displaced vacuum.
struct SqueezeSpec {
  std::string mode;
  double strength = 0.0;  // r >= 0
  double angle = 0.0;     // phi_s
  std::optional<CoherentSpec> displacement;

  Complex xi() const;
  void validate() const;
};

// Two-mode squeezed vacuum with zeta = kappa e^{-i theta_s} generating
// exp(zeta a1^ a2^ - zeta* a1 a2)|0,0>.
struct TwoModeSqueezeSpec {
  std::string mode_a;
  std::string mode_b;
  double strength = 0.0;  // kappa >= 0
  double angle = 0.0;     // theta_s

  Complex zeta() const;
  void validate() const;
};

// Normalized amplitude vector over a FockBasis. norm_deficit records the
// probability mass the truncation discarded at preparation time;
// truncation_warning flags states whose deficit exceeded the fidelity bar.
class StateVector {
 public:
  StateVector(std::shared_ptr<const FockBasis> basis, Vector amplitudes,
              double norm_deficit = 0.0, bool truncation_warning = false);

  const std::shared_ptr<const FockBasis>& basis_ptr() const { return m_basis; }
  const FockBasis& basis() const { return *m_basis; }
  const Vector& amplitudes() const { return m_amp; }
  std::size_t dim() const { return static_cast<std::size_t>(m_amp.size()); }
  double norm() const { return m_amp.norm(); }
  double norm_deficit() const { return m_norm_deficit; }
  bool truncation_warning() const { return m_truncation_warning; }

  StateVector renormalized() const;
  StateVector with_warning(bool flag) const;

 private:
  std::shared_ptr<const FockBasis> m_basis;
  Vector m_amp;
  double m_norm_deficit;
  bool m_truncation_warning;
};

// Fidelity bar above which prepared states carry the truncation warning.
inline constexpr double kDefaultDeficitBar = 1e-8;

StateVector fock_state(std::shared_ptr<const FockBasis> basis,
                       const Occupation& occ);
StateVector vacuum_state(std::shared_ptr<const FockBasis> basis);

StateVector coherent_state(std::shared_ptr<const FockBasis> basis,
                           const CoherentSpec& spec,
                           double deficit_bar = kDefaultDeficitBar);

StateVector squeezed_state(std::shared_ptr<const FockBasis> basis,
                           const SqueezeSpec& spec,
                           double deficit_bar = kDefaultDeficitBar);

StateVector two_mode_squeezed_vacuum(std::shared_ptr<const FockBasis> basis,
                                     const TwoModeSqueezeSpec& spec,
                                     double deficit_bar = kDefaultDeficitBar);

// Tensor product of states prepared on disjoint mode groups, embedded into
// the joint basis; amplitudes falling outside the joint truncation are
// dropped into the deficit.
StateVector product_state(std::shared_ptr<const FockBasis> joint,
                          const std::vector<StateVector>& parts,
                          double deficit_bar = kDefaultDeficitBar);

// Suggested minimum condensate cutoff: max(4 |alpha|^2, 10 sinh^2 r, 12).
int default_condensate_cutoff(double alpha_mag, double r);

}  // namespace amlsim
