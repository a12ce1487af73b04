#include "fosf/observer.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

namespace fosf {

ObserverRealization build_realization(const Plant& plant,
                                      const std::vector<EigenMode>& modes,
                                      const GainSet& gains,
                                      std::pair<Complex, Complex> anchors) {
  const int n = static_cast<int>(modes.size());
  if (gains.K.size() != n || gains.L.size() != n)
    throw std::invalid_argument("build_realization: gain/mode size mismatch");
  const double rho = plant.derived().rho;

  ObserverRealization r;
  r.modes = modes;
  r.K = gains.K;
  r.L = gains.L;
  r.lambda_u = anchors.first;
  r.lambda_y = anchors.second;
  // anchors must avoid the intermediate spectrum; fall back to -1 if not
  auto anchored = [&](Complex anchor, Complex input) {
    try {
      return plant.boundary_value_mode(anchor, input);
    } catch (const std::runtime_error&) {
      return plant.boundary_value_mode(Complex(-1.0), input);
    }
  };
  r.phi_u = anchored(r.lambda_u, Complex(1.0));
  r.phi_y = anchored(r.lambda_y, Complex(-rho));

  r.lambdas = VecXc(n);
  r.B1 = VecXc(n);
  r.B0 = VecXc(n);
  r.G1 = VecXc(n);
  r.G0 = VecXc(n);
  r.C = VecXc(n);
  StateFunction A_phi_u = plant.apply_A(r.phi_u);
  StateFunction A_phi_y = plant.apply_A(r.phi_y);
  for (int i = 0; i < n; ++i) {
    r.lambdas[i] = modes[i].lambda;
    r.B1[i] = Plant::inner_product(r.phi_u, modes[i].phi_star);
    r.B0[i] = Plant::inner_product(A_phi_u, modes[i].phi_star);
    r.G1[i] = Plant::inner_product(r.phi_y, modes[i].phi_star);
    r.G0[i] = Plant::inner_product(A_phi_y, modes[i].phi_star);
    r.C[i] = plant.output_trace(modes[i].phi);
  }
  r.B2 = r.B0 - r.lambdas.cwiseProduct(r.B1);
  r.G2 = r.G0 - r.lambdas.cwiseProduct(r.G1);
  r.c_u = plant.output_trace(r.phi_u);
  r.c_y = plant.output_trace(r.phi_y);
  r.c_hat_u = r.c_u - (r.C.transpose() * r.B1).value();
  r.c_hat_y = r.c_y - (r.C.transpose() * r.G1).value();
  return r;
}

Complex observer_output(const ObserverRealization& r, const VecXc& q_hat, double u,
                        double y) {
  return (r.C.transpose() * q_hat).value() + r.c_hat_u * u + r.c_hat_y * y;
}

VecXc observer_rhs(const ObserverRealization& r, const VecXc& q_hat, double u, double y) {
  Complex y_tilde = observer_output(r, q_hat, u, y) - y;
  return r.lambdas.cwiseProduct(q_hat) + r.B2 * u + r.G2 * y + r.L * y_tilde;
}

ObserverStepper::ObserverStepper(const ObserverRealization& r, double dt) : dt_(dt) {
  const int n = r.n();
  // fold the output-injection term into the drift:
  //   q' = M q + Bv u + Gv y,  M = diag + L C^T, Bv = B2 + L c_hat_u, Gv = G2 + L (c_hat_y - 1)
  MatXc M = MatXc(r.lambdas.asDiagonal());
  M += r.L * r.C.transpose();
  Bv_ = r.B2 + r.L * r.c_hat_u;
  Gv_ = r.G2 + r.L * (r.c_hat_y - 1.0);

  Eigen::ComplexEigenSolver<MatXc> es(M);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("ObserverStepper: eigendecomposition failed");
  const MatXc& V = es.eigenvectors();
  const VecXc& d = es.eigenvalues();
  VecXc ed(n), sd(n);
  for (int i = 0; i < n; ++i) {
    Complex s = d[i] * dt;
    ed[i] = std::exp(s);
    // (e^{s} - 1)/s * dt, series near 0
    sd[i] = (std::abs(s) < 1e-8) ? dt * (1.0 + s / 2.0 + s * s / 6.0)
                                 : (ed[i] - 1.0) / d[i];
  }
  MatXc Vinv = V.inverse();
  Phi_ = V * ed.asDiagonal() * Vinv;
  S_ = V * sd.asDiagonal() * Vinv;
}

void ObserverStepper::step(VecXc& q_hat, double u, double y) const {
  q_hat = Phi_ * q_hat + S_ * (Bv_ * u + Gv_ * y);
}

StateFunction reconstruct(const ObserverRealization& r, const VecXc& q_hat,
                          Reconstruction which, double u, double y) {
  StateFunction x;
  if (which == Reconstruction::Homogeneous) {
    for (int i = 0; i < r.n(); ++i) x = x + q_hat[i] * r.modes[i].phi;
    return x;
  }
  VecXc p = q_hat - r.B1 * u - r.G1 * y;
  for (int i = 0; i < r.n(); ++i) x = x + p[i] * r.modes[i].phi;
  x = x + Complex(u) * r.phi_u + Complex(y) * r.phi_y;
  return x;
}

namespace {

nlohmann::json vec_json(const VecXc& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    arr.push_back({v[i].real(), v[i].imag()});
  return arr;
}

nlohmann::json scalar_json(Complex z) { return {z.real(), z.imag()}; }

}  // namespace

nlohmann::json realization_to_json(const ObserverRealization& r) {
  nlohmann::json j;
  j["n"] = r.n();
  j["lambdas"] = vec_json(r.lambdas);
  j["B1"] = vec_json(r.B1);
  j["B0"] = vec_json(r.B0);
  j["G1"] = vec_json(r.G1);
  j["G0"] = vec_json(r.G0);
  j["B2"] = vec_json(r.B2);
  j["G2"] = vec_json(r.G2);
  j["L"] = vec_json(r.L);
  j["C"] = vec_json(r.C);
  j["K"] = vec_json(r.K);
  j["c_u"] = scalar_json(r.c_u);
  j["c_y"] = scalar_json(r.c_y);
  j["c_hat_u"] = scalar_json(r.c_hat_u);
  j["c_hat_y"] = scalar_json(r.c_hat_y);
  j["lambda_u"] = scalar_json(r.lambda_u);
  j["lambda_y"] = scalar_json(r.lambda_y);
  return j;
}

}  // namespace fosf
