#pragma once

#include "amlsim/operators.hpp"

namespace amlsim {

// Microscopic parameters of the five-mode model: input-light couplings
// epsilon_i, control Rabi frequencies omega_i, intermediate detunings delta_i
// (all real, units of inverse time, hbar = 1).
struct FiveModeParams {
  double epsilon1 = 0.0;
  double omega1 = 0.0;
  double delta1 = 1.0;
  double epsilon2 = 0.0;
  double omega2 = 0.0;
  double delta2 = 1.0;

  void validate() const;
};

// Effective couplings of the reduced three-mode model.
struct ThreeModeParams {
  double lambda1 = 0.0;  // atomic output coupling
  double lambda2 = 0.0;  // photoassociation output coupling

  void validate() const;
  double eta() const;  // (lambda2 / lambda1)^2
};

// Condensate-enhanced couplings of the linear four-mode model.
struct FourModeParams {
  double lambda1p = 0.0;
  double lambda2p = 0.0;
  double n0 = 1.0;  // condensate atom number used in the enhancement

  static FourModeParams from_three(const ThreeModeParams& p, double n0);
  void validate() const;
};

// Canonical mode sets: labels and conserved-charge weights.
ModeSet three_mode_set();  // c, b, g with weights 1, 1, 2
ModeSet five_mode_set();   // c, e, b, m, g with weights 1, 1, 1, 2, 2
ModeSet four_mode_set();   // a1, a2, b, g all weight 1

// lambda_i = epsilon_i * omega_i / delta_i
ThreeModeParams effective_params(const FiveModeParams& p);

// H3 = l1 (b^ c + c^ b) + l2 (g^ c c + c^ c^ g)
SparseOperator build_h3(std::shared_ptr<const FockBasis> basis,
                        const ThreeModeParams& p);

// H5 = -d1 e^ e - d2 m^ m + e1 (e^ c + c^ e) + o1 (b^ e + e^ b)
//      + e2 (m^ c c + c^ c^ m) + o2 (g^ m + m^ g)
SparseOperator build_h5(std::shared_ptr<const FockBasis> basis,
                        const FiveModeParams& p);

// H4 = l1' (b^ a1 + a1^ b) + l2' (g^ a2 + a2^ g)
SparseOperator build_h4(std::shared_ptr<const FockBasis> basis,
                        const FourModeParams& p);

// Diagonal conserved-charge operator sum_m weight_m * n_m.
SparseOperator charge_operator(std::shared_ptr<const FockBasis> basis);

}  // namespace amlsim
