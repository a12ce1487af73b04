#include "fosf/gains.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fosf {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

Complex DesiredSpectrum::root(int k) const {
  if (k == 0) return Complex(-kappa, 0.0);
  int pair = (k + 1) / 2;               // 1, 1, 2, 2, ...
  double sign = (k % 2 == 1) ? 1.0 : -1.0;  // positive imaginary part first
  double re = std::log(mu) / (2.0 * tau);
  double im = sign * (2.0 * (pair - 1) + 1.0) * kPi / (2.0 * tau);
  return Complex(re, im);
}

std::vector<Complex> DesiredSpectrum::nearest(int m) const {
  std::vector<Complex> all;
  for (int k = 0; k < 2 * m + 8; ++k) all.push_back(root(k));
  std::sort(all.begin(), all.end(), [](Complex a, Complex b) {
    double ma = std::abs(a), mb = std::abs(b);
    if (ma != mb) return ma < mb;
    return a.imag() > b.imag();
  });
  all.resize(m);
  return all;
}

std::vector<Complex> DesiredSpectrum::targets_pair_complete(int n) const {
  int count = (n % 2 == 1) ? n : n + 1;  // root(0) is real, then conjugate pairs
  std::vector<Complex> out;
  for (int k = 0; k < count; ++k) out.push_back(root(k));
  return out;
}

Complex DesiredSpectrum::char_value(Complex lambda) const {
  return (lambda + kappa) * (std::exp(lambda * tau) + mu * std::exp(-lambda * tau));
}

DesiredSpectrum desired_spectrum(SpectrumKind kind, const SystemParams& sp,
                                 const DerivedParams& dp) {
  if (kind == SpectrumKind::Controller) return {kind, sp.kappa_c, sp.mu_c, dp.tau};
  return {kind, sp.kappa_o, sp.mu_o, dp.tau};
}

Complex ModalFunctional::apply(const StateFunction& h) const {
  Complex acc = 0.0;
  for (size_t i = 0; i < basis.size(); ++i)
    acc += coeffs[static_cast<Eigen::Index>(i)] *
           Plant::inner_product(h, basis[i].phi_star);
  return acc;
}

VecXc gains_pole_placement(const std::vector<Complex>& lambdas, const VecXc& coeffs,
                           const std::vector<Complex>& targets) {
  const int n = static_cast<int>(lambdas.size());
  if (coeffs.size() != n || static_cast<int>(targets.size()) != n)
    throw std::invalid_argument("gains_pole_placement: size mismatch");
  for (int i = 0; i < n; ++i) {
    if (std::abs(coeffs[i]) < 1e-14)
      throw std::runtime_error("gains_pole_placement: mode unreachable/unobservable");
    for (int j = i + 1; j < n; ++j)
      if (std::abs(lambdas[i] - lambdas[j]) < 1e-10)
        throw std::runtime_error("gains_pole_placement: repeated modal eigenvalue");
  }
  VecXc k(n);
  for (int i = 0; i < n; ++i) {
    Complex num = 1.0, den = coeffs[i];
    for (int j = 0; j < n; ++j) {
      num *= lambdas[i] - targets[j];
      if (j != i) den *= lambdas[i] - lambdas[j];
    }
    k[i] = -num / den;
  }
  return k;
}

VecXc feedback_gains_paper(const Plant& plant, const std::vector<EigenMode>& modes) {
  const SystemParams& sp = plant.sys();
  const double tau = plant.derived().tau;
  const double gbt = sp.beta * sp.gamma * tau;
  const Complex cp = (gbt - sp.kappa_c) / (sp.gamma * (sp.mu_c + 1.0));
  const Complex cm = sp.mu_c * (gbt + sp.kappa_c) / (sp.gamma * (sp.mu_c + 1.0));
  VecXc k(modes.size());
  for (size_t i = 0; i < modes.size(); ++i) {
    Complex lam = modes[i].lambda;
    k[static_cast<Eigen::Index>(i)] =
        modes[i].phi.h3 * (cp * std::exp(lam * tau) + cm * std::exp(-lam * tau));
  }
  return k;
}

VecXc observer_gains_paper(const Plant& plant, const std::vector<EigenMode>& modes,
                           double theta_minus) {
  const SystemParams& sp = plant.sys();
  const DerivedParams& dp = plant.derived();
  const double tau = dp.tau;
  VecXc l(modes.size());
  for (size_t i = 0; i < modes.size(); ++i) {
    Complex lam = modes[i].lambda;
    // delay-coordinate adjoint eigenfunction scale, conjugated
    Complex s_conj = (1.0 / (2.0 - std::exp(lam * theta_minus))) *
                     ((sp.beta * tau - dp.rho) / (2.0 * sp.beta * tau)) *
                     std::conj(modes[i].phi_star.h3);
    Complex bracket = (1.0 + sp.mu_o) * lam * std::exp(lam * tau) +
                      sp.kappa_o * (1.0 + sp.mu_o) +
                      sp.kappa_o * (1.0 - std::exp(lam * theta_minus));
    l[static_cast<Eigen::Index>(i)] = -s_conj * bracket;
  }
  return l;
}

GainSet synthesize_gains(const Plant& plant, const std::vector<EigenMode>& obs_modes,
                         GainMethod method, double theta_minus) {
  const SystemParams& sp = plant.sys();
  const DerivedParams& dp = plant.derived();
  const int n = static_cast<int>(obs_modes.size());

  std::vector<Complex> obs_lambdas;
  VecXc C(n);
  for (int i = 0; i < n; ++i) {
    obs_lambdas.push_back(obs_modes[i].lambda);
    C[i] = obs_modes[i].phi.h1(1.0);
  }

  GainSet g;
  g.method = method;

  if (method == GainMethod::PaperFormula) {
    g.K = feedback_gains_paper(plant, obs_modes);
    g.L = observer_gains_paper(plant, obs_modes, theta_minus);
    g.feedback = {obs_modes, g.K};
    return g;
  }

  auto first_targets = [](const DesiredSpectrum& des, int count) {
    std::vector<Complex> t;
    for (int k = 0; k < count; ++k) t.push_back(des.root(k));
    return t;
  };

  // observer gains: dual placement on the observer-intermediate modal pair
  DesiredSpectrum obs_des = desired_spectrum(SpectrumKind::Observer, sp, dp);
  g.L = gains_pole_placement(obs_lambdas, C, first_targets(obs_des, n));

  // feedback: place on the controller-intermediate modal pair (its asymptote
  // matches the controller targets, so the correction is a bounded functional),
  // then carry the functional over to the observer basis
  std::vector<EigenMode> ctrl_modes = plant.eigenmodes_pair_complete(n, dp.k_ring);
  std::vector<Complex> ctrl_lambdas;
  for (const EigenMode& m : ctrl_modes) ctrl_lambdas.push_back(m.lambda);
  std::vector<Complex> b_vec = plant.modal_input_coefficients(ctrl_modes);
  VecXc b = Eigen::Map<const VecXc>(b_vec.data(), static_cast<Eigen::Index>(b_vec.size()));
  DesiredSpectrum ctrl_des = desired_spectrum(SpectrumKind::Controller, sp, dp);
  VecXc kc = gains_pole_placement(
      ctrl_lambdas, b, first_targets(ctrl_des, static_cast<int>(ctrl_modes.size())));

  g.feedback = {ctrl_modes, kc};
  g.K = VecXc(n);
  for (int j = 0; j < n; ++j) g.K[j] = g.feedback.apply(obs_modes[j].phi);
  return g;
}

}  // namespace fosf
