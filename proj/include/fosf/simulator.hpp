#pragma once

#include <functional>

#include "fosf/closedloop.hpp"

namespace fosf {

// Plant state in Riemann invariants p = sqrt(beta) w1 + sqrt(alpha) w2 (leftgoing)
// and m = sqrt(beta) w1 - sqrt(alpha) w2 (rightgoing) on N+1 nodes, unit CFL.
struct PlantGrid {
  int N;
  double dz, dt;
  double sqa, sqb;  // sqrt(alpha), sqrt(beta)
  double gamma;
  Eigen::VectorXd p, m;  // node values 0..N
  double w3;

  double w1(int j) const { return (p[j] + m[j]) / (2.0 * sqb); }
  double w2(int j) const { return (p[j] - m[j]) / (2.0 * sqa); }
  double y() const { return w1(N); }
  double energy() const;      // trapezoid of (beta w1^2 + alpha w2^2)/2
  double state_norm() const;  // full state-space norm incl. the w3 head
};

PlantGrid make_grid(const SystemParams& sp, const DerivedParams& dp, int N,
                    const std::function<double(double)>& w1_0,
                    const std::function<double(double)>& w2_0, double w3_0);

// Evaluate the real part of a StateFunction onto a grid (initial conditions).
PlantGrid make_grid(const SystemParams& sp, const DerivedParams& dp, int N,
                    const StateFunction& x0);

// Enforce w2(1) = u (sets p_N), return y = w1(1) at the current instant.
double apply_input(PlantGrid& g, double u);
// Exact transport by one cell + trapezoidal w3 update + z=0 closure.
void advance(PlantGrid& g);
// apply_input followed by advance.
double plant_step(PlantGrid& g, double u);

// Solves the algebraic loop u = refl * w1(1) + extra for the input.
double boundary_closure_input(const PlantGrid& g, double refl, double extra);

struct SimTrace {
  std::vector<double> t, u, y, yhat, state_norm, err_norm;
};

struct SimOptions {
  double T = 1.0;
  int N = 200;
  bool modal_projection_start = false;  // default q0 = 0 (worst case)
  Reconstruction reconstruction = Reconstruction::Homogeneous;
};

SimTrace run_closed_loop(const ClosedLoopSystem& sys, const StateFunction& x0,
                         const SimOptions& opts);

// Least-squares slope of log ||x(t)|| over [t0, t1].
double estimate_decay(const SimTrace& trace, double t0, double t1);

// Smooth exponential-sum initial conditions: "bump" (sin^2 profile),
// "cosine", "mixed".  Throws std::invalid_argument on unknown names.
StateFunction named_initial_state(const std::string& name);

}  // namespace fosf
