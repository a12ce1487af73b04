#pragma once

#include <Eigen/Dense>

#include "fosf/plant.hpp"

namespace fosf {

using VecXc = Eigen::VectorXcd;
using MatXc = Eigen::MatrixXcd;

enum class SpectrumKind { Controller, Observer };
enum class GainMethod { PaperFormula, PolePlacement };

// Exact root set {-kappa} U {ln(mu)/(2 tau) + i (2k+1) pi / (2 tau)} of the
// delay characteristic function (lambda + kappa)(e^{lambda tau} + mu e^{-lambda tau}).
struct DesiredSpectrum {
  SpectrumKind kind;
  double kappa, mu, tau;

  // k = 0 -> -kappa; k >= 1 -> chain ordered by |Im|, positive imaginary first
  Complex root(int k) const;
  std::vector<Complex> nearest(int m) const;  // m roots nearest the origin
  // n targets with smallest |Im|, rounded up so conjugate pairs are closed
  std::vector<Complex> targets_pair_complete(int n) const;
  Complex char_value(Complex lambda) const;
};
DesiredSpectrum desired_spectrum(SpectrumKind kind, const SystemParams& sp,
                                 const DerivedParams& dp);

// Bounded feedback functional h -> sum_i coeff_i <h, phi_star_i> over a modal basis.
struct ModalFunctional {
  std::vector<EigenMode> basis;
  VecXc coeffs;
  Complex apply(const StateFunction& h) const;
};

struct GainSet {
  VecXc K;  // bounded feedback gains on the observer modal basis
  VecXc L;  // observer output-injection gains
  GainMethod method;
  ModalFunctional feedback;  // the bounded feedback part as a functional
};

// Explicit one-input pole placement for a diagonal modal pair (diag lambdas, coeffs):
// eigenvalues of diag(lambdas) + coeffs * k^T are moved onto targets.
VecXc gains_pole_placement(const std::vector<Complex>& lambdas, const VecXc& coeffs,
                           const std::vector<Complex>& targets);

// Closed-form gain formulas of the source design (delay-coordinate derivation).
VecXc feedback_gains_paper(const Plant& plant, const std::vector<EigenMode>& modes);
VecXc observer_gains_paper(const Plant& plant, const std::vector<EigenMode>& modes,
                           double theta_minus);

// Full synthesis on a given observer-intermediate modal basis.
GainSet synthesize_gains(const Plant& plant, const std::vector<EigenMode>& obs_modes,
                         GainMethod method, double theta_minus);

}  // namespace fosf
