#pragma once

#include <optional>

#include "fosf/observer.hpp"

namespace fosf {

enum class FeedbackVariant { Homogeneous, Inhomogeneous };

// Rearranged feedback u = (1/denom) [ (k_ring + k_y - K^T G1) y + K^T q_hat ]
// used when the observer runs in its inhomogeneous parametrization.
struct InhFeedback {
  Complex denom;    // 1 - k_u + K^T B1, bounded away from 0
  Complex y_coef;   // (k_ring + k_y - K^T G1) / denom
  VecXc K_inh;      // K / denom
};

// Finite blocks of the coupled plant-observer loop.  The coupling operator is
// rank one through the boundary trace h1(1):  A3 h = h1(1) * a3_trace.
struct ClosedLoopBlocks {
  MatXc A4;        // diag(lambdas) + B2 K^T + L C_hat^T
  VecXc C_hat;     // C + c_hat_u K
  VecXc a3_trace;  // k_ring (B2 + c_hat_u L) + G2 + (c_hat_y - 1) L
  VecXc K;
  double k_ring;
  FeedbackVariant variant;
  std::optional<InhFeedback> inh;
  VecXc sigma_A4;  // eigenvalues of A4 (dense solve at assembly)
};

VecXc apply_A3(const ClosedLoopBlocks& blocks, const Plant& plant,
               const StateFunction& h);

ClosedLoopBlocks assemble(const Plant& plant, const ObserverRealization& r,
                          const GainSet& gains, FeedbackVariant variant);

// Transcendental characteristic function of the closed loop:
//   g(lambda) = K_c phi_I(lambda) - K^T (lambda I - A4)^{-1} A3 phi_I(lambda),
// K_c h = h2(1) - k_ring h1(1); excluded points sigma(A4).
CharFunction closed_loop_char_function(const Plant& plant,
                                       const ClosedLoopBlocks& blocks);

// Overdetermined finite-block solvability test at lambda (for lambda near sigma(A4)).
struct FiniteBlockResult {
  bool is_eigenvalue;
  double residual;  // least-squares residual relative to ||N||
};
FiniteBlockResult check_finite_block(const Plant& plant, const ClosedLoopBlocks& blocks,
                                     Complex lambda, double tol = 1e-6);

// Union of char-eq roots and finite-block-confirmed members of sigma(A4).
SpectrumResult compute_spectrum(const Plant& plant, const ClosedLoopBlocks& blocks,
                                const Rect& region, const RootFindOptions& opts = {});

// Everything needed to run or analyze one closed loop at a given order.
struct ClosedLoopSystem {
  Plant plant;
  std::vector<EigenMode> modes;  // observer-intermediate basis (pair-completed)
  GainSet gains;
  ObserverRealization realization;
  ClosedLoopBlocks blocks;
};
ClosedLoopSystem build_closed_loop(const RunConfig& cfg, int order,
                                   FeedbackVariant variant = FeedbackVariant::Homogeneous);

struct ConvergenceRow {
  int order;    // requested truncation order
  int n_modes;  // actual mode count after pair completion
  double d_ctrl, d_obs;
  double max_re;  // spectral abscissa over the scanned region
};
std::vector<ConvergenceRow> convergence_study(const RunConfig& cfg,
                                              const std::vector<int>& orders,
                                              const Rect& region);

Rect default_spectrum_region();

// d-metric of the convergence study: max over the m desired eigenvalues
// nearest the origin of the distance to the nearest computed eigenvalue.
double spectrum_distance(const std::vector<Complex>& desired_nearest,
                         const std::vector<Complex>& computed);

}  // namespace fosf
