#pragma once

#include <utility>

#include <nlohmann/json_fwd.hpp>

#include "fosf/gains.hpp"

namespace fosf {

// Finite-dimensional observer realization in the derivative-free form
//   q_hat' = diag(lambdas) q_hat + B2 u + G2 y + L (y_hat - y)
//   y_hat  = C^T q_hat + c_hat_u u + c_hat_y y
// together with the raw-transform data (B1, B0, G1, G0, phi_u, phi_y).
struct ObserverRealization {
  VecXc lambdas;
  VecXc B1, B0, G1, G0, B2, G2, L, C, K;
  Complex c_u, c_y, c_hat_u, c_hat_y;
  StateFunction phi_u, phi_y;
  Complex lambda_u, lambda_y;
  std::vector<EigenMode> modes;
  int n() const { return static_cast<int>(lambdas.size()); }
};

ObserverRealization build_realization(const Plant& plant,
                                      const std::vector<EigenMode>& modes,
                                      const GainSet& gains,
                                      std::pair<Complex, Complex> anchors = {
                                          Complex(0.0), Complex(0.0)});

VecXc observer_rhs(const ObserverRealization& r, const VecXc& q_hat, double u, double y);
Complex observer_output(const ObserverRealization& r, const VecXc& q_hat, double u,
                        double y);

// Exact zero-order-hold step of the affine observer dynamics; the injection
// term is folded into the drift M = diag(lambdas) + L C^T, diagonalized once.
class ObserverStepper {
 public:
  ObserverStepper(const ObserverRealization& r, double dt);
  void step(VecXc& q_hat, double u, double y) const;
  double dt() const { return dt_; }

 private:
  double dt_;
  MatXc Phi_;  // e^{M dt}
  MatXc S_;    // integral of e^{M s} ds over [0, dt]
  VecXc Bv_, Gv_;
};

enum class Reconstruction { Homogeneous, Inhomogeneous };
StateFunction reconstruct(const ObserverRealization& r, const VecXc& q_hat,
                          Reconstruction which, double u, double y);

nlohmann::json realization_to_json(const ObserverRealization& r);

}  // namespace fosf
