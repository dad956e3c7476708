#include "amlsim/analytic.hpp"

#include <cmath>

#include "amlsim/errors.hpp"

namespace amlsim {

namespace {

constexpr double kPi = 3.14159265358979323846;

// distance of x to the nearest multiple of period
double mod_distance(double x, double period) {
  const double m = std::fmod(std::fmod(x, period) + period, period);
  return std::min(m, period - m);
}

}  // namespace

FluxPrediction flux_coherent(double alpha_mag, double lambda1, double lambda2,
                             double t) {
  if (t < 0.0) throw ConfigError("flux_coherent: negative time");
  const double a2 = alpha_mag * alpha_mag;
  const double lt1 = lambda1 * t;
  const double lt2 = lambda2 * t;
  return FluxPrediction{lt1 * lt1 * a2, lt2 * lt2 * a2 * a2};
}

double flux_ratio_squeezed(double r, double eta) {
  if (!(r > 0.0))
    throw UndefinedStatisticError(
        "flux_ratio_squeezed: both fluxes vanish at r = 0");
  const double sh = std::sinh(r);
  return eta * (1.0 + 3.0 * sh * sh);
}

CoherentSqueezeCoeffs squeeze_coeffs_coherent(double alpha_mag, double phi,
                                              double lambda1, double lambda2,
                                              double t) {
  if (t < 0.0) throw ConfigError("squeeze_coeffs_coherent: negative time");
  const double a2 = alpha_mag * alpha_mag;
  const double s = std::sin(phi);
  const double c = std::cos(phi);
  const double s2 = std::sin(2.0 * phi);
  const double c2 = std::cos(2.0 * phi);
  const double atom_scale = 3.0 * a2 * lambda1 * lambda1 * t * t;
  const double mol_scale = a2 * a2 * lambda2 * lambda2 * t * t;
  return CoherentSqueezeCoeffs{atom_scale * s * s, atom_scale * c * c,
                               mol_scale * s2 * s2, mol_scale * c2 * c2};
}

SqueezedInputCoeffs squeeze_coeffs_squeezed_input(double r, double phi_s,
                                                  double lambda1,
                                                  double lambda2, double t) {
  if (r < 0.0) throw ConfigError("squeeze_coeffs_squeezed_input: r < 0");
  if (t < 0.0) throw ConfigError("squeeze_coeffs_squeezed_input: negative time");
  const double sh = std::sinh(r);
  const double ch = std::cosh(r);
  const double lt1 = lambda1 * t;
  const double atom_base = 2.0 * lt1 * lt1 * sh;
  const double tau = lambda2 * t * sh;
  const double c = std::cos(phi_s);
  const double s = std::sin(phi_s);
  return SqueezedInputCoeffs{
      atom_base * (sh + ch * c), atom_base * (sh - ch * c),
      tau * tau * (11.0 * (sh * sh + 1.0) * c * c - 4.0),
      tau * tau * (11.0 * (sh * sh + 1.0) * s * s - 4.0)};
}

RegimeReport classify_squeezing_regime(double phi_s, double r) {
  if (!(r > 0.0)) throw ConfigError("classify_squeezing_regime: need r > 0");
  constexpr double tol = 1e-9;

  RegimeReport rep;
  if (mod_distance(phi_s, 2.0 * kPi) < tol)
    rep.regime = SqueezeRegime::AngleZero;
  else if (mod_distance(phi_s - kPi, 2.0 * kPi) < tol)
    rep.regime = SqueezeRegime::AnglePi;
  else if (mod_distance(phi_s - 0.5 * kPi, kPi) < tol)
    rep.regime = SqueezeRegime::AngleHalfPi;
  else if (mod_distance(phi_s - 0.25 * kPi, 0.5 * kPi) < tol)
    rep.regime = SqueezeRegime::AngleQuarterPi;
  else
    rep.regime = SqueezeRegime::Generic;

  // squeezed components follow the signs of the published coefficients, so
  // the classification can never drift away from the formulas
  const auto coeffs = squeeze_coeffs_squeezed_input(r, phi_s, 1.0, 1.0, 1.0);
  rep.atom_s1_squeezed = coeffs.s1_atom < 0.0;
  rep.atom_s2_squeezed = coeffs.s2_atom < 0.0;
  rep.mol_s1_squeezed = coeffs.s1_mol < 0.0;
  rep.mol_s2_squeezed = coeffs.s2_mol < 0.0;
  return rep;
}

std::string regime_label(SqueezeRegime regime) {
  switch (regime) {
    case SqueezeRegime::AngleZero: return "angle_zero";
    case SqueezeRegime::AnglePi: return "angle_pi";
    case SqueezeRegime::AngleHalfPi: return "angle_half_pi";
    case SqueezeRegime::AngleQuarterPi: return "angle_quarter_pi";
    case SqueezeRegime::Generic: return "generic";
  }
  return "?";
}

double quarter_pi_squeeze_threshold() { return std::log(1.0 + std::sqrt(2.0)); }

double g2_fourmode_tmsv(double kappa) {
  if (!(kappa > 0.0))
    throw UndefinedStatisticError("g2_fourmode_tmsv: no flux at kappa = 0");
  const double sh = std::sinh(kappa);
  return 2.0 + 1.0 / (sh * sh);
}

Discrepancy compare(const ShortTimePrediction& prediction, double numeric,
                    const TolerancePolicy& policy) {
  Discrepancy d;
  d.quantity = prediction.quantity;
  d.predicted = prediction.value;
  d.numeric = numeric;
  d.abs_err = std::abs(numeric - prediction.value);
  const double scale = std::max(std::abs(prediction.value), std::abs(numeric));
  d.rel_err = scale > 0.0 ? d.abs_err / scale : 0.0;
  d.asserted = policy.assert_pass;
  d.pass = !policy.assert_pass || d.rel_err <= policy.rel_tol;
  return d;
}

double fit_residual_order(const std::vector<double>& times,
                          const std::vector<double>& predicted,
                          const std::vector<double>& numeric) {
  if (times.size() != predicted.size() || times.size() != numeric.size())
    throw ConfigError("fit_residual_order: length mismatch");
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0)) continue;
    const double res = std::abs(numeric[i] - predicted[i]);
    if (res < 1e-300) continue;
    lx.push_back(std::log(times[i]));
    ly.push_back(std::log(res));
  }
  if (lx.size() < 2)
    throw NumericError("fit_residual_order: not enough nonzero residuals");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double n = static_cast<double>(lx.size());
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-30)
    throw NumericError("fit_residual_order: degenerate abscissa");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace amlsim
