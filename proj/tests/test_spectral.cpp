#include <doctest.h>

#include <cmath>

#include "fosf/spectral.hpp"
#include "oracles.hpp"

using namespace fosf;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

CharFunction poly_plus_one() {
  CharFunction f;
  f.eval = [](Complex z) { return z * z + 1.0; };
  f.conjugate_symmetric = true;
  return f;
}
}  // namespace

TEST_CASE("find_roots locates polynomial roots") {
  SpectrumResult res = find_roots(poly_plus_one(), {-2, 2, -2, 2});
  REQUIRE(res.roots.size() == 2);
  CHECK(std::abs(res.roots[0].value - Complex(0, -1)) < 1e-9);
  CHECK(std::abs(res.roots[1].value - Complex(0, 1)) < 1e-9);
  for (const RootRecord& r : res.roots) CHECK(r.residual < 1e-9);
}

TEST_CASE("find_roots reproduces the exact delay-chain roots") {
  SystemParams p = oracles::table_params();
  double tau = 1.0 / std::sqrt(p.alpha * p.beta);
  CharFunction f;
  f.conjugate_symmetric = true;
  f.eval = [=](Complex z) { return std::exp(2.0 * z * tau) + p.mu_c; };
  SpectrumResult res = find_roots(f, {-20, 0, 0, 200});
  REQUIRE(!res.roots.empty());
  // exact roots: ln(mu_c)/(2 tau) + i (2k+1) pi / (2 tau), real part exactly -10
  int matched = 0;
  for (const RootRecord& r : res.roots) {
    CHECK(r.value.real() == doctest::Approx(-10.0).epsilon(1e-8));
    double q = (2.0 * r.value.imag() * tau / kPi - 1.0) / 2.0;
    CHECK(std::abs(q - std::round(q)) < 1e-8);
    ++matched;
  }
  CHECK(matched >= 4);
}

TEST_CASE("roots under an excluded point are dropped and reported") {
  CharFunction f = poly_plus_one();
  f.conjugate_symmetric = false;  // keep the mirror root independent of the mask
  f.excluded_points = {Complex(0, 1)};
  SpectrumResult res = find_roots(f, {-2, 2, -2, 2});
  REQUIRE(res.roots.size() == 1);
  CHECK(std::abs(res.roots[0].value - Complex(0, -1)) < 1e-9);
  REQUIRE(res.dropped_near_excluded.size() >= 1);
  CHECK(std::abs(res.dropped_near_excluded[0].value - Complex(0, 1)) < 1e-4);
}

TEST_CASE("conjugate-symmetric root sets come back paired") {
  SystemParams p = oracles::table_params();
  double tau = 1.0 / std::sqrt(p.alpha * p.beta);
  CharFunction f;
  f.conjugate_symmetric = true;
  f.eval = [=](Complex z) { return std::exp(2.0 * z * tau) + p.mu_c; };
  SpectrumResult res = find_roots(f, {-20, 0, -200, 200});
  REQUIRE(res.roots.size() >= 8);
  for (const RootRecord& r : res.roots) {
    bool has_partner = false;
    for (const RootRecord& s : res.roots)
      if (std::abs(s.value - std::conj(r.value)) < 1e-6 * (1.0 + std::abs(r.value)))
        has_partner = true;
    CHECK(has_partner);
  }
}

TEST_CASE("argument principle counts enclosed zeros") {
  CharFunction f = poly_plus_one();
  CHECK(count_roots_argument_principle(f, {-2, 2, -2, 2}, 32) == 2);
  CHECK(count_roots_argument_principle(f, {-2, 2, 0.5, 2}, 32) == 1);
  CHECK(count_roots_argument_principle(f, {-2, 2, 1.5, 2}, 32) == 0);
  // double zero counted with multiplicity
  CharFunction g;
  g.eval = [](Complex z) { return (z - Complex(0.3, 0.2)) * (z - Complex(0.3, 0.2)); };
  CHECK(count_roots_argument_principle(g, {-1, 1, -1, 1}, 32) == 2);
}

TEST_CASE("argument principle detects a root on the contour") {
  CHECK_THROWS_WITH_AS(count_roots_argument_principle(poly_plus_one(), {-1, 1, -1, 1}, 16),
                       doctest::Contains("root-on-contour"), std::runtime_error);
}

TEST_CASE("argument-principle count agrees with find_roots") {
  SystemParams p = oracles::table_params();
  double tau = 1.0 / std::sqrt(p.alpha * p.beta);
  CharFunction f;
  f.conjugate_symmetric = true;
  f.eval = [=](Complex z) { return std::exp(2.0 * z * tau) + p.mu_c; };
  Rect region{-15, -5, 10, 160};
  SpectrumResult res = find_roots(f, region);
  CHECK(count_roots_argument_principle(f, region, 64) ==
        static_cast<int>(res.roots.size()));
}

TEST_CASE("refine_root converges from perturbed seeds") {
  auto f = [](Complex z) { return z * z * z - 2.0 * z + 2.0; };
  Complex true_root = Complex(-1.7692923542386314, 0.0);  // real root of z^3-2z+2
  RefineResult r = refine_root(f, true_root + Complex(0.05, 0.03), 1e-12, 60);
  CHECK(r.converged);
  CHECK(std::abs(r.root - true_root) < 1e-10);
  CHECK(r.residual < 1e-12);

  // hopeless seed at a flat region does not report convergence
  auto flat = [](Complex) { return Complex(1.0, 0.0); };
  CHECK_FALSE(refine_root(flat, Complex(0, 0), 1e-12, 20).converged);
}

TEST_CASE("find_roots rejects degenerate regions and grids") {
  CHECK_THROWS_AS(find_roots(poly_plus_one(), {2, -2, -2, 2}), std::invalid_argument);
  RootFindOptions opts;
  opts.nx = 4;
  CHECK_THROWS_AS(find_roots(poly_plus_one(), {-2, 2, -2, 2}, opts),
                  std::invalid_argument);
}
