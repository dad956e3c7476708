#pragma once

#include <optional>
#include <string>
#include <vector>

namespace amlsim {

// A short-time closed-form value together with its provenance label and the
// expansion order it is valid to.
struct ShortTimePrediction {
  std::string quantity;
  double value = 0.0;
  std::string validity;  // e.g. "leading order in t^2"
};

// Leading-order output fluxes for a coherent condensate input:
// N_b = l1^2 t^2 |alpha|^2, N_g = l2^2 t^2 |alpha|^4.
struct FluxPrediction {
  double n_atom = 0.0;  // mode b
  double n_mol = 0.0;   // mode g
};
FluxPrediction flux_coherent(double alpha_mag, double lambda1, double lambda2,
                             double t);

// Squeezed-vacuum input flux ratio <N_g>/<N_b> = eta (1 + 3 sinh^2 r).
double flux_ratio_squeezed(double r, double eta);

// Coherent-input squeezing coefficients of the two output beams, as published
// (leading order in t; structurally nonnegative).
struct CoherentSqueezeCoeffs {
  double s1_atom = 0.0;
  double s2_atom = 0.0;
  double s1_mol = 0.0;
  double s2_mol = 0.0;
};
CoherentSqueezeCoeffs squeeze_coeffs_coherent(double alpha_mag, double phi,
                                              double lambda1, double lambda2,
                                              double t);

// Squeezed-input squeezing coefficients of the two output beams, as published:
// S_{1b,2b} = 2 l1^2 t^2 sinh r (sinh r +/- cosh r cos phi_s) and, with
// tau = l2 t sinh r, S_{1g,2g} = tau^2 [11 (sinh^2 r + 1) {cos^2, sin^2} phi_s - 4].
struct SqueezedInputCoeffs {
  double s1_atom = 0.0;
  double s2_atom = 0.0;
  double s1_mol = 0.0;
  double s2_mol = 0.0;
};
SqueezedInputCoeffs squeeze_coeffs_squeezed_input(double r, double phi_s,
                                                  double lambda1,
                                                  double lambda2, double t);

// Squeeze-angle families with distinct squeezing patterns.
enum class SqueezeRegime {
  AngleZero,       // phi_s = 2 n pi
  AnglePi,         // phi_s = (2n + 1) pi
  AngleHalfPi,     // phi_s = (n + 1/2) pi
  AngleQuarterPi,  // phi_s = (n + 1/4) pi and reflections
  Generic,
};

struct RegimeReport {
  SqueezeRegime regime = SqueezeRegime::Generic;
  bool atom_s1_squeezed = false;
  bool atom_s2_squeezed = false;
  bool mol_s1_squeezed = false;
  bool mol_s2_squeezed = false;
};
RegimeReport classify_squeezing_regime(double phi_s, double r);
std::string regime_label(SqueezeRegime regime);

// Atomic-beam squeezing threshold at the quarter-pi angles: r < ln(1 + sqrt 2).
double quarter_pi_squeeze_threshold();

// Cross-correlation of the four-mode model fed by a two-mode squeezed vacuum,
// at perfect transfer: g2 = 2 + 1/sinh^2 kappa.
double g2_fourmode_tmsv(double kappa);

// Discrepancy between a closed-form prediction and an exact numeric value.
struct Discrepancy {
  std::string quantity;
  std::string params;  // serialized JSON of the comparison parameters
  double predicted = 0.0;
  double numeric = 0.0;
  double abs_err = 0.0;
  double rel_err = 0.0;
  bool pass = true;
  bool asserted = true;  // false for report-only comparisons
  std::optional<double> residual_order;
};

struct TolerancePolicy {
  double rel_tol = 0.02;
  bool assert_pass = true;
};

Discrepancy compare(const ShortTimePrediction& prediction, double numeric,
                    const TolerancePolicy& policy);

// Least-squares slope of log|numeric - predicted| against log t; the residual
// order of a leading-order formula.
double fit_residual_order(const std::vector<double>& times,
                          const std::vector<double>& predicted,
                          const std::vector<double>& numeric);

}  // namespace amlsim
