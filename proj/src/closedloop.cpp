#include "fosf/closedloop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fosf {

VecXc apply_A3(const ClosedLoopBlocks& blocks, const Plant& plant,
               const StateFunction& h) {
  return plant.output_trace(h) * blocks.a3_trace;
}

ClosedLoopBlocks assemble(const Plant& plant, const ObserverRealization& r,
                          const GainSet& gains, FeedbackVariant variant) {
  const int n = r.n();
  if (gains.K.size() != n || gains.L.size() != n)
    throw std::invalid_argument("assemble: gain/realization size mismatch");

  ClosedLoopBlocks b;
  b.K = gains.K;
  b.k_ring = plant.derived().k_ring;
  b.variant = variant;
  b.C_hat = r.C + r.c_hat_u * gains.K;
  b.A4 = MatXc(r.lambdas.asDiagonal());
  b.A4 += r.B2 * gains.K.transpose() + r.L * b.C_hat.transpose();
  // coupling through the boundary trace h1(1); the L-coefficient carries the
  // direct -y part of the injected output error
  b.a3_trace = b.k_ring * (r.B2 + r.c_hat_u * r.L) + r.G2 + (r.c_hat_y - 1.0) * r.L;

  Eigen::ComplexEigenSolver<MatXc> es(b.A4);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("assemble: eigendecomposition of A4 failed");
  b.sigma_A4 = es.eigenvalues();

  if (variant == FeedbackVariant::Inhomogeneous) {
    Complex k_u = gains.feedback.apply(r.phi_u);
    Complex k_y = gains.feedback.apply(r.phi_y);
    InhFeedback inh;
    inh.denom = 1.0 - k_u + (gains.K.transpose() * r.B1).value();
    if (std::abs(inh.denom) < 1e-8)
      throw std::runtime_error("assemble: singular rearranged-feedback denominator");
    inh.y_coef = (b.k_ring + k_y - (gains.K.transpose() * r.G1).value()) / inh.denom;
    inh.K_inh = gains.K / inh.denom;
    b.inh = inh;
  }
  return b;
}

CharFunction closed_loop_char_function(const Plant& plant,
                                       const ClosedLoopBlocks& blocks) {
  CharFunction f;
  f.conjugate_symmetric = true;
  for (Eigen::Index i = 0; i < blocks.sigma_A4.size(); ++i)
    f.excluded_points.push_back(blocks.sigma_A4[i]);
  const MatXc A4 = blocks.A4;
  const VecXc K = blocks.K;
  const VecXc a3 = blocks.a3_trace;
  const double k_ring = blocks.k_ring;
  const int n = static_cast<int>(A4.rows());
  f.eval = [&plant, A4, K, a3, k_ring, n](Complex lambda) {
    StateFunction phi = plant.eigenfunction_family(lambda);
    Complex head = plant.boundary_functional(phi, k_ring);
    MatXc M = lambda * MatXc::Identity(n, n) - A4;
    VecXc w = M.partialPivLu().solve(plant.output_trace(phi) * a3);
    return head - (K.transpose() * w).value();
  };
  return f;
}

FiniteBlockResult check_finite_block(const Plant& plant, const ClosedLoopBlocks& blocks,
                                     Complex lambda, double tol) {
  const int n = static_cast<int>(blocks.A4.rows());
  StateFunction phi = plant.eigenfunction_family(lambda);
  MatXc M(n + 1, n);
  M.row(0) = blocks.K.transpose();
  M.bottomRows(n) = lambda * MatXc::Identity(n, n) - blocks.A4;
  VecXc N(n + 1);
  N[0] = plant.boundary_functional(phi, blocks.k_ring);
  N.tail(n) = plant.output_trace(phi) * blocks.a3_trace;

  double nrm = N.norm();
  if (nrm < 1e-300) return {true, 0.0};
  Eigen::ColPivHouseholderQR<MatXc> qr(M);
  qr.setThreshold(1e-8);
  VecXc x = qr.solve(N);
  double res = (M * x - N).norm() / nrm;
  return {res < tol, res};
}

SpectrumResult compute_spectrum(const Plant& plant, const ClosedLoopBlocks& blocks,
                                const Rect& region, const RootFindOptions& opts) {
  CharFunction f = closed_loop_char_function(plant, blocks);
  SpectrumResult out = find_roots(f, region, opts);

  // the masked disks around sigma(A4) are re-examined with the finite-block test
  for (Eigen::Index i = 0; i < blocks.sigma_A4.size(); ++i) {
    Complex lam = blocks.sigma_A4[i];
    if (!region.contains(lam)) continue;
    FiniteBlockResult fb = check_finite_block(plant, blocks, lam);
    if (!fb.is_eigenvalue) continue;
    bool dup = false;
    for (const RootRecord& r : out.roots)
      if (std::abs(r.value - lam) < opts.dedup_scale * (1.0 + std::abs(lam))) dup = true;
    if (!dup) out.roots.push_back({lam, fb.residual, 0, "finite-block"});
  }
  std::sort(out.roots.begin(), out.roots.end(),
            [](const RootRecord& a, const RootRecord& b) {
              if (a.value.imag() != b.value.imag())
                return a.value.imag() < b.value.imag();
              return a.value.real() < b.value.real();
            });
  return out;
}

ClosedLoopSystem build_closed_loop(const RunConfig& cfg, int order,
                                   FeedbackVariant variant) {
  DerivedParams dp = derive(cfg.sys);
  Plant plant(cfg.sys, dp);
  GainMethod method = cfg.gain_method == "paper" ? GainMethod::PaperFormula
                                                 : GainMethod::PolePlacement;
  double theta_minus = cfg.theta_minus.value_or(-2.0 * dp.tau);

  std::vector<EigenMode> modes = plant.eigenmodes_pair_complete(order, dp.rho);
  GainSet gains = synthesize_gains(plant, modes, method, theta_minus);
  ObserverRealization realization = build_realization(plant, modes, gains);
  ClosedLoopBlocks blocks = assemble(plant, realization, gains, variant);
  return {std::move(plant), std::move(modes), std::move(gains),
          std::move(realization), std::move(blocks)};
}

Rect default_spectrum_region() { return {-60.0, 5.0, -250.0, 250.0}; }

double spectrum_distance(const std::vector<Complex>& desired_nearest,
                         const std::vector<Complex>& computed) {
  double worst = 0.0;
  for (Complex d : desired_nearest) {
    double best = std::numeric_limits<double>::infinity();
    for (Complex c : computed) best = std::min(best, std::abs(c - d));
    worst = std::max(worst, best);
  }
  return worst;
}

std::vector<ConvergenceRow> convergence_study(const RunConfig& cfg,
                                              const std::vector<int>& orders,
                                              const Rect& region) {
  std::vector<int> uniq = orders;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());

  DerivedParams dp = derive(cfg.sys);
  DesiredSpectrum des_c = desired_spectrum(SpectrumKind::Controller, cfg.sys, dp);
  DesiredSpectrum des_o = desired_spectrum(SpectrumKind::Observer, cfg.sys, dp);
  std::vector<Complex> near_c = des_c.nearest(6);
  std::vector<Complex> near_o = des_o.nearest(6);

  std::vector<ConvergenceRow> rows;
  for (int order : uniq) {
    ClosedLoopSystem sys = build_closed_loop(cfg, order);
    SpectrumResult spec = compute_spectrum(sys.plant, sys.blocks, region);
    std::vector<Complex> computed;
    double max_re = -std::numeric_limits<double>::infinity();
    for (const RootRecord& r : spec.roots) {
      computed.push_back(r.value);
      max_re = std::max(max_re, r.value.real());
    }
    rows.push_back({order, static_cast<int>(sys.modes.size()),
                    spectrum_distance(near_c, computed),
                    spectrum_distance(near_o, computed), max_re});
  }
  return rows;
}

}  // namespace fosf
