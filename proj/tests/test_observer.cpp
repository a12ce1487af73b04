#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "fosf/observer.hpp"
#include "oracles.hpp"

using namespace fosf;

namespace {

struct Fixture {
  Plant plant;
  std::vector<EigenMode> modes;
  GainSet gains;
  ObserverRealization real;

  explicit Fixture(int n)
      : plant(oracles::table_params(), derive(oracles::table_params())),
        modes(plant.eigenmodes_pair_complete(n, plant.derived().rho)),
        gains(synthesize_gains(plant, modes, GainMethod::PolePlacement,
                               -2.0 * plant.derived().tau)),
        real(build_realization(plant, modes, gains)) {}
};

GainSet zero_gains(int n) {
  GainSet g;
  g.K = VecXc::Zero(n);
  g.L = VecXc::Zero(n);
  g.method = GainMethod::PolePlacement;
  return g;
}

}  // namespace

TEST_CASE("realization satisfies its structural identities") {
  Fixture fx(8);
  const ObserverRealization& r = fx.real;
  const Plant& plant = fx.plant;
  const double rho = plant.derived().rho;
  const int n = r.n();
  REQUIRE(n == static_cast<int>(fx.modes.size()));

  // anchors at zero: the raw derivative couplings vanish (B0 = lambda_u B1 = 0)
  CHECK(r.lambda_u == Complex(0.0));
  CHECK(r.B0.norm() < 1e-10 * (1.0 + r.B1.norm()));
  CHECK(r.G0.norm() < 1e-10 * (1.0 + r.G1.norm()));
  for (int i = 0; i < n; ++i) {
    CHECK(std::abs(r.B2[i] - (r.lambda_u - r.lambdas[i]) * r.B1[i]) <
          1e-10 * (1.0 + std::abs(r.B2[i])));
    CHECK(std::abs(r.G2[i] - (r.lambda_y - r.lambdas[i]) * r.G1[i]) <
          1e-10 * (1.0 + std::abs(r.G2[i])));
    CHECK(std::abs(r.C[i] - fx.modes[i].phi.h1(1.0)) < 1e-12 * (1.0 + std::abs(r.C[i])));
  }

  // boundary-value modes carry the right functional values
  CHECK(std::abs(plant.boundary_functional(r.phi_u, rho) - 1.0) < 1e-10);
  CHECK(std::abs(plant.boundary_functional(r.phi_y, rho) + rho) < 1e-10 * std::abs(rho));
  CHECK(std::abs(r.c_u - (-1.0 / rho)) < 1e-10);
  CHECK(std::abs(r.c_y - 1.0) < 1e-10);

  CHECK(std::abs(r.c_hat_u - (r.c_u - (r.C.transpose() * r.B1).value())) < 1e-12);
  CHECK(std::abs(r.c_hat_y - (r.c_y - (r.C.transpose() * r.G1).value())) < 1e-12);
}

TEST_CASE("observer right-hand side: trivial and zero-injection cases") {
  Fixture fx(4);
  const int n = fx.real.n();
  CHECK(observer_rhs(fx.real, VecXc::Zero(n), 0.0, 0.0).norm() < 1e-14);

  ObserverRealization r0 = build_realization(fx.plant, fx.modes, zero_gains(n));
  VecXc q = VecXc::Ones(n);
  VecXc rhs = observer_rhs(r0, q, 2.0, -3.0);
  VecXc expect = r0.lambdas.cwiseProduct(q) + r0.B2 * 2.0 - r0.G2 * 3.0;
  CHECK((rhs - expect).norm() < 1e-12 * (1.0 + expect.norm()));
}

TEST_CASE("derivative-free form is equivalent to the feedthrough form") {
  Fixture fx(8);
  const ObserverRealization& r = fx.real;
  const int n = r.n();
  auto u_of = [](double t) { return std::sin(3.0 * t); };
  auto y_of = [](double t) { return std::cos(2.0 * t) - 1.0; };
  auto du_of = [](double t) { return 3.0 * std::cos(3.0 * t); };
  auto dy_of = [](double t) { return -2.0 * std::sin(2.0 * t); };

  const double dt = 1e-4, T = 0.2;
  int steps = static_cast<int>(std::round(T / dt));
  VecXc q = VecXc::Zero(n);       // derivative-free state
  VecXc p = VecXc::Zero(n);       // transformed state (no feedthrough of derivatives)
  // consistent initialization: q(0) = p(0) + B1 u(0) + G1 y(0) with u(0)=y(0)=0
  auto rhs_q = [&](const VecXc& qq, double t) {
    return observer_rhs(r, qq, u_of(t), y_of(t));
  };
  auto rhs_p = [&](const VecXc& pp, double t) {
    double u = u_of(t), y = y_of(t);
    VecXc qq = pp + r.B1 * u + r.G1 * y;
    Complex y_tilde = observer_output(r, qq, u, y) - y;
    return VecXc(r.lambdas.cwiseProduct(pp) + r.B0 * u + r.G0 * y + r.L * y_tilde -
                 r.B1 * du_of(t) - r.G1 * dy_of(t));
  };
  for (int s = 0; s < steps; ++s) {
    double t = s * dt;
    auto rk4 = [&](auto rhs, VecXc& x) {
      VecXc k1 = rhs(x, t);
      VecXc k2 = rhs(x + 0.5 * dt * k1, t + 0.5 * dt);
      VecXc k3 = rhs(x + 0.5 * dt * k2, t + 0.5 * dt);
      VecXc k4 = rhs(x + dt * k3, t + dt);
      x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    };
    rk4(rhs_q, q);
    rk4(rhs_p, p);
  }
  VecXc q_from_p = p + r.B1 * u_of(T) + r.G1 * y_of(T);
  CHECK((q - q_from_p).norm() < 1e-6 * (1.0 + q.norm()));
}

TEST_CASE("exact-step propagator: diagonal limit, composition, RK4 oracle") {
  Fixture fx(4);
  const int n = fx.real.n();

  ObserverRealization r0 = build_realization(fx.plant, fx.modes, zero_gains(n));
  double dt = 0.01;
  ObserverStepper diag(r0, dt);
  VecXc q = VecXc::Ones(n);
  VecXc q1 = q;
  diag.step(q1, 0.0, 0.0);
  for (int i = 0; i < n; ++i)
    CHECK(std::abs(q1[i] - std::exp(r0.lambdas[i] * dt)) <
          1e-12 * (1.0 + std::abs(q1[i])));

  const ObserverRealization& r = fx.real;
  ObserverStepper full(r, dt), half(r, dt / 2.0);
  VecXc a = VecXc::Ones(n), b = a;
  full.step(a, 0.7, -0.3);
  half.step(b, 0.7, -0.3);
  half.step(b, 0.7, -0.3);
  CHECK((a - b).norm() < 1e-12 * (1.0 + a.norm()));

  VecXc c = VecXc::Ones(n);
  ObserverStepper big(r, 0.05);
  big.step(c, 0.7, -0.3);
  VecXc ref = oracles::rk4_run(
      [&](const VecXc& x) { return observer_rhs(r, x, 0.7, -0.3); }, VecXc::Ones(n),
      0.05, 1e-5);
  CHECK((c - ref).norm() < 1e-6 * (1.0 + ref.norm()));
}

TEST_CASE("state reconstruction honors the boundary data") {
  Fixture fx(8);
  const ObserverRealization& r = fx.real;
  const Plant& plant = fx.plant;
  const double rho = plant.derived().rho;
  const int n = r.n();

  StateFunction z0 = reconstruct(r, VecXc::Zero(n), Reconstruction::Homogeneous, 0, 0);
  CHECK(std::abs(z0.h1(0.5)) + std::abs(z0.h2(0.5)) + std::abs(z0.h3) < 1e-14);

  double u = 0.8, y = -1.1;
  VecXc q = VecXc::Random(n);
  StateFunction xi = reconstruct(r, q, Reconstruction::Inhomogeneous, u, y);
  // modal parts are boundary-flat, so the trace comes from phi_u and phi_y alone
  Complex trace = plant.boundary_functional(xi, rho);
  CHECK(std::abs(trace - (u - rho * y)) < 1e-8 * (1.0 + std::abs(trace)));
}

TEST_CASE("estimated output stays real along real trajectories") {
  Fixture fx(8);
  const ObserverRealization& r = fx.real;
  ObserverStepper stepper(r, 0.002);
  VecXc q = VecXc::Zero(r.n());
  for (int s = 0; s < 200; ++s) {
    double t = s * 0.002;
    double u = std::sin(5.0 * t), y = std::cos(3.0 * t) - 1.0;
    Complex yh = observer_output(r, q, u, y);
    CHECK(std::abs(yh.imag()) < 1e-8 * (1.0 + std::abs(yh)));
    stepper.step(q, u, y);
  }
}

TEST_CASE("realization serializes with full structure") {
  Fixture fx(4);
  nlohmann::json j = realization_to_json(fx.real);
  CHECK(j["n"] == fx.real.n());
  for (const char* key : {"lambdas", "B1", "B0", "G1", "G0", "B2", "G2", "L", "C", "K"})
    CHECK(j[key].size() == static_cast<size_t>(fx.real.n()));
  for (const char* key : {"c_u", "c_y", "c_hat_u", "c_hat_y", "lambda_u", "lambda_y"})
    CHECK(j[key].size() == 2);
}
