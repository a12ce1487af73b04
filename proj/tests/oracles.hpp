// Independent reference computations used only by tests: quadrature inner
// products, dense finite-difference discretizations of the operators, LAPACK
// eigensolves, and a fixed-step RK4 integrator.
#pragma once

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <functional>
#include <stdexcept>
#include <vector>

#include "fosf/closedloop.hpp"

namespace oracles {

using fosf::Complex;
using fosf::MatXc;
using fosf::VecXc;

// composite Simpson quadrature of the state-space inner product
inline Complex simpson_inner_product(const fosf::StateFunction& f,
                                     const fosf::StateFunction& g, int intervals) {
  if (intervals % 2 == 1) ++intervals;
  auto integrand = [&](double z) {
    return f.h1(z) * std::conj(g.h1(z)) + f.h2(z) * std::conj(g.h2(z));
  };
  double h = 1.0 / intervals;
  Complex acc = integrand(0.0) + integrand(1.0);
  for (int k = 1; k < intervals; ++k)
    acc += (k % 2 == 1 ? 4.0 : 2.0) * integrand(k * h);
  return acc * (h / 3.0) + f.h3 * std::conj(g.h3);
}

inline std::vector<Complex> eig_dense(MatXc A) {
  const int n = static_cast<int>(A.rows());
  std::vector<Complex> w(n);
  int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, A.data(), n, w.data(),
                           nullptr, 1, nullptr, 1);
  if (info != 0) throw std::runtime_error("zgeev failed");
  return w;
}

inline std::vector<Complex> eig_dense_real(Eigen::MatrixXd A) {
  const int n = static_cast<int>(A.rows());
  std::vector<double> wr(n), wi(n);
  int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, A.data(), n, wr.data(),
                           wi.data(), nullptr, 1, nullptr, 1);
  if (info != 0) throw std::runtime_error("dgeev failed");
  std::vector<Complex> w(n);
  for (int i = 0; i < n; ++i) w[i] = {wr[i], wi[i]};
  return w;
}

// Dense discretization of the plant under the boundary reflection u = r*w1(1),
// in Riemann variables, second-order upwind-biased differences on an N-cell grid.
// State ordering: p_0..p_{N-1}, m_1..m_N, w3 (p_N and m_0 eliminated via the BCs).
inline Eigen::MatrixXd dense_reflection_operator(const fosf::SystemParams& sp,
                                                 const fosf::DerivedParams& dp, int N,
                                                 double r) {
  const double dz = 1.0 / N;
  const double c = 1.0 / dp.tau;
  const double sqa = std::sqrt(sp.alpha), sqb = std::sqrt(sp.beta);
  const double reflp = (sqb + r * sqa) / (sqb - r * sqa);  // p_N = reflp * m_N
  const int dim = 2 * N + 1;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
  auto P = [&](int j) { return j; };          // p_j, j = 0..N-1
  auto M = [&](int j) { return N + j - 1; };  // m_j, j = 1..N
  const int W = 2 * N;

  auto add_p = [&](int row, int j, double coef) {
    // p_N -> reflp * m_N
    if (j == N)
      A(row, M(N)) += coef * reflp;
    else
      A(row, P(j)) += coef;
  };
  auto add_m = [&](int row, int j, double coef) {
    // m_0 -> 2 sqb w3 - p_0
    if (j == 0) {
      A(row, W) += coef * 2.0 * sqb;
      A(row, P(0)) -= coef;
    } else {
      A(row, M(j)) += coef;
    }
  };

  for (int j = 0; j < N; ++j) {  // dp_j/dt = + c dp/dz, stencil biased rightward
    if (j <= N - 2) {
      add_p(P(j), j, -3.0 * c / (2.0 * dz));
      add_p(P(j), j + 1, 4.0 * c / (2.0 * dz));
      add_p(P(j), j + 2, -c / (2.0 * dz));
    } else {
      add_p(P(j), j + 1, c / dz);
      add_p(P(j), j, -c / dz);
    }
  }
  for (int j = 1; j <= N; ++j) {  // dm_j/dt = - c dm/dz, stencil biased leftward
    if (j >= 2) {
      add_m(M(j), j, -3.0 * c / (2.0 * dz));
      add_m(M(j), j - 1, 4.0 * c / (2.0 * dz));
      add_m(M(j), j - 2, -c / (2.0 * dz));
    } else {
      add_m(M(j), j, -c / dz);
      add_m(M(j), j - 1, c / dz);
    }
  }
  A(W, P(0)) += sp.gamma / sqa;
  A(W, W) += -sp.gamma * sqb / sqa;
  return A;
}

// Dense discretization of the full coupled closed loop (plant + observer),
// complex-valued; state: p_0..p_{N-1}, m_1..m_N, w3, q_1..q_n.
inline MatXc dense_closed_loop_operator(const fosf::ClosedLoopSystem& sys, int N) {
  const fosf::SystemParams& sp = sys.plant.sys();
  const fosf::DerivedParams& dp = sys.plant.derived();
  const fosf::ObserverRealization& r = sys.realization;
  const int n = r.n();
  const double dz = 1.0 / N;
  const double c = 1.0 / dp.tau;
  const double sqa = std::sqrt(sp.alpha), sqb = std::sqrt(sp.beta);
  const double kring = dp.k_ring;
  const double d = 1.0 - kring * sqa / sqb;

  const int dim = 2 * N + 1 + n;
  MatXc A = MatXc::Zero(dim, dim);
  auto P = [&](int j) { return j; };
  auto M = [&](int j) { return N + j - 1; };
  const int W = 2 * N;
  auto Q = [&](int i) { return 2 * N + 1 + i; };

  // u = (kring m_N / sqb + K^T q) / d;  p_N = m_N + 2 sqa u;  y = (p_N + m_N)/(2 sqb)
  VecXc u_row = VecXc::Zero(dim);
  u_row[M(N)] = kring / (sqb * d);
  for (int i = 0; i < n; ++i) u_row[Q(i)] = r.K[i] / d;
  VecXc pN_row = VecXc::Zero(dim);
  pN_row[M(N)] = 1.0;
  pN_row += 2.0 * sqa * u_row;
  VecXc y_row = (pN_row + VecXc::Unit(dim, M(N))) / (2.0 * sqb);

  auto add_p = [&](int row, int j, double coef) {
    if (j == N)
      A.row(row) += coef * pN_row.transpose();
    else
      A(row, P(j)) += coef;
  };
  auto add_m = [&](int row, int j, double coef) {
    if (j == 0) {
      A(row, W) += coef * 2.0 * sqb;
      A(row, P(0)) -= coef;
    } else {
      A(row, M(j)) += coef;
    }
  };

  for (int j = 0; j < N; ++j) {
    if (j <= N - 2) {
      add_p(P(j), j, -3.0 * c / (2.0 * dz));
      add_p(P(j), j + 1, 4.0 * c / (2.0 * dz));
      add_p(P(j), j + 2, -c / (2.0 * dz));
    } else {
      add_p(P(j), j + 1, c / dz);
      add_p(P(j), j, -c / dz);
    }
  }
  for (int j = 1; j <= N; ++j) {
    if (j >= 2) {
      add_m(M(j), j, -3.0 * c / (2.0 * dz));
      add_m(M(j), j - 1, 4.0 * c / (2.0 * dz));
      add_m(M(j), j - 2, -c / (2.0 * dz));
    } else {
      add_m(M(j), j, -c / dz);
      add_m(M(j), j - 1, c / dz);
    }
  }
  A(W, P(0)) += sp.gamma / sqa;
  A(W, W) += -sp.gamma * sqb / sqa;

  // observer block: q' = (diag + L C^T) q + Bv u + Gv y
  VecXc Bv = r.B2 + r.L * r.c_hat_u;
  VecXc Gv = r.G2 + r.L * (r.c_hat_y - 1.0);
  for (int i = 0; i < n; ++i) {
    A(Q(i), Q(i)) += r.lambdas[i];
    for (int j = 0; j < n; ++j) A(Q(i), Q(j)) += r.L[i] * r.C[j];
    A.row(Q(i)) += Bv[i] * u_row.transpose() + Gv[i] * y_row.transpose();
  }
  return A;
}

// fixed-step RK4 on dq/dt = f(q) with constant inputs
inline VecXc rk4_run(const std::function<VecXc(const VecXc&)>& f, VecXc q, double T,
                     double dt) {
  int steps = static_cast<int>(std::round(T / dt));
  for (int s = 0; s < steps; ++s) {
    VecXc k1 = f(q);
    VecXc k2 = f(q + 0.5 * dt * k1);
    VecXc k3 = f(q + 0.5 * dt * k2);
    VecXc k4 = f(q + dt * k3);
    q += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return q;
}

// modes of a dense spectrum closest to a target, for oracle matching
inline double nearest_distance(Complex target, const std::vector<Complex>& spectrum) {
  double best = 1e300;
  for (Complex z : spectrum) best = std::min(best, std::abs(z - target));
  return best;
}

inline fosf::SystemParams table_params() {
  fosf::SystemParams p{};
  p.alpha = 11.0;
  p.beta = 21.0;
  p.gamma = 31.0;
  double tau = 1.0 / std::sqrt(p.alpha * p.beta);
  p.mu_c = std::exp(-20.0 * tau);
  p.kappa_c = 15.0;
  p.mu_o = std::exp(-60.0 * tau);
  p.kappa_o = 35.0;
  return p;
}

inline fosf::RunConfig table_config() {
  fosf::RunConfig cfg;
  cfg.sys = table_params();
  return cfg;
}

}  // namespace oracles
