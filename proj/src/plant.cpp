#include "fosf/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fosf {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// integral of e^{s z} over [0,1], stable near s = 0
Complex int_exp(Complex s) {
  if (std::abs(s) < 1e-8) return 1.0 + s / 2.0 + s * s / 6.0;
  return (std::exp(s) - 1.0) / s;
}

Complex int_pair(const ExpSum& a, const ExpSum& b) {
  Complex acc = 0.0;
  for (const ExpTerm& ta : a.terms)
    for (const ExpTerm& tb : b.terms)
      acc += ta.coef * std::conj(tb.coef) * int_exp(ta.rate + std::conj(tb.rate));
  return acc;
}

}  // namespace

Complex ExpSum::operator()(double z) const {
  Complex acc = 0.0;
  for (const ExpTerm& t : terms) acc += t.coef * std::exp(t.rate * z);
  return acc;
}

ExpSum ExpSum::derivative() const {
  ExpSum out;
  out.terms.reserve(terms.size());
  for (const ExpTerm& t : terms) out.terms.push_back({t.coef * t.rate, t.rate});
  return out;
}

ExpSum operator+(const ExpSum& a, const ExpSum& b) {
  ExpSum out = a;
  out.terms.insert(out.terms.end(), b.terms.begin(), b.terms.end());
  return out;
}

ExpSum operator*(Complex s, const ExpSum& a) {
  ExpSum out = a;
  for (ExpTerm& t : out.terms) t.coef *= s;
  return out;
}

StateFunction operator+(const StateFunction& a, const StateFunction& b) {
  return {a.h1 + b.h1, a.h2 + b.h2, a.h3 + b.h3};
}

StateFunction operator*(Complex s, const StateFunction& h) {
  return {s * h.h1, s * h.h2, s * h.h3};
}

Plant::Plant(const SystemParams& sp, const DerivedParams& dp) : sp_(sp), dp_(dp) {}

StateFunction Plant::apply_A(const StateFunction& h) const {
  StateFunction out;
  out.h1 = Complex(sp_.alpha) * h.h2.derivative();
  out.h2 = Complex(sp_.beta) * h.h1.derivative();
  out.h3 = sp_.gamma * h.h2(0.0);
  return out;
}

StateFunction Plant::apply_A_star(const StateFunction& g) const {
  StateFunction out;
  out.h1 = Complex(-sp_.beta) * g.h2.derivative();
  out.h2 = Complex(-sp_.alpha) * g.h1.derivative();
  out.h3 = -sp_.beta * g.h2(0.0);
  return out;
}

Complex Plant::inner_product(const StateFunction& f, const StateFunction& g) {
  return int_pair(f.h1, g.h1) + int_pair(f.h2, g.h2) + f.h3 * std::conj(g.h3);
}

StateFunction Plant::eigenfunction_family(Complex lambda) const {
  const double tau = dp_.tau;
  const double gbt = sp_.gamma * sp_.beta * tau;
  const Complex cp = lambda + gbt;  // coefficient of e^{+lambda tau z}
  const Complex cm = gbt - lambda;  // coefficient of e^{-lambda tau z}
  StateFunction h;
  h.h1.terms = {{cp, lambda * tau}, {cm, -lambda * tau}};
  h.h2.terms = {{sp_.beta * tau * cp, lambda * tau}, {-sp_.beta * tau * cm, -lambda * tau}};
  h.h3 = 2.0 * gbt;
  return h;
}

StateFunction Plant::homogeneous_eigenfunction(Complex lambda) const {
  if (std::abs(lambda) < 1e-12)
    throw std::invalid_argument("homogeneous_eigenfunction: lambda = 0 is degenerate");
  return eigenfunction_family(lambda);
}

Complex Plant::boundary_functional(const StateFunction& h, double refl) const {
  return h.h2(1.0) - refl * h.h1(1.0);
}

Complex Plant::output_trace(const StateFunction& h) const { return h.h1(1.0); }

CharFunction Plant::reflection_char_function(double refl) const {
  CharFunction f;
  f.conjugate_symmetric = true;
  f.eval = [*this, refl](Complex lambda) {
    return boundary_functional(eigenfunction_family(lambda), refl);
  };
  return f;
}

CharFunction Plant::intermediate_char_function() const {
  return reflection_char_function(dp_.rho);
}

StateFunction Plant::adjoint_eigenfunction_raw(Complex lambda, double /*refl*/) const {
  // satisfies the adjoint ODE and the z = 0 domain condition for any lambda;
  // the z = 1 adjoint boundary condition holds exactly at eigenvalues
  const double tau = dp_.tau;
  const Complex mu = std::conj(lambda);
  const Complex ap = sp_.alpha * tau * mu + sp_.gamma;
  const Complex am = sp_.gamma - sp_.alpha * tau * mu;
  StateFunction g;
  g.h1.terms = {{ap, mu * tau}, {am, -mu * tau}};
  g.h2.terms = {{-sp_.alpha * tau * ap, mu * tau}, {sp_.alpha * tau * am, -mu * tau}};
  g.h3 = 2.0 * sp_.alpha;
  return g;
}

std::vector<EigenMode> Plant::eigenmodes(int n, const Rect& region) const {
  return eigenmodes(n, region, dp_.rho);
}

std::vector<EigenMode> Plant::eigenmodes(int n, const Rect& region, double refl) const {
  CharFunction f = reflection_char_function(refl);
  RootFindOptions opts;
  double height = region.im_max - std::max(0.0, region.im_min);
  opts.ny = std::max(200, static_cast<int>(height / 1.5));
  SpectrumResult roots = find_roots(f, region, opts);

  std::vector<Complex> vals;
  for (const RootRecord& r : roots.roots) vals.push_back(r.value);
  std::sort(vals.begin(), vals.end(), [](Complex a, Complex b) {
    double ia = std::abs(a.imag()), ib = std::abs(b.imag());
    if (ia != ib) return ia < ib;
    if (a.imag() != b.imag()) return a.imag() > b.imag();
    return a.real() < b.real();
  });
  if (static_cast<int>(vals.size()) < n)
    throw std::runtime_error("insufficient roots in region");
  vals.resize(n);

  std::vector<EigenMode> modes;
  modes.reserve(n);
  for (int i = 0; i < n; ++i) {
    Complex lambda = vals[i];
    double w = 0.5;  // half-width of the simplicity-check box; chain gaps are O(10)
    Rect box{lambda.real() - w, lambda.real() + w, lambda.imag() - w, lambda.imag() + w};
    int cnt = count_roots_argument_principle(f, box, 24);
    if (cnt > 1) throw std::runtime_error("multiple eigenvalue detected");
    if (cnt < 1) throw std::runtime_error("eigenmode certification failed");

    EigenMode m;
    m.lambda = lambda;
    m.index = i;
    m.phi = eigenfunction_family(lambda);
    StateFunction psi = adjoint_eigenfunction_raw(lambda, refl);
    Complex ip = inner_product(m.phi, psi);
    if (std::abs(ip) < 1e-12) throw std::runtime_error("degenerate biorthogonal scaling");
    m.phi_star = std::conj(1.0 / ip) * psi;
    modes.push_back(std::move(m));
  }
  return modes;
}

std::vector<EigenMode> Plant::eigenmodes_pair_complete(int n, double refl) const {
  const double chain_gap = kPi / dp_.tau;
  double im_max = (static_cast<double>(n) / 2.0 + 3.0) * chain_gap;
  Rect region{-60.0, 5.0, -im_max, im_max};

  std::vector<EigenMode> modes = eigenmodes(n + 1, region, refl);
  // if the n-th mode splits a conjugate pair, keep its partner too
  bool closed = true;
  for (int i = 0; i < n && closed; ++i) {
    if (std::abs(modes[i].lambda.imag()) < 1e-9) continue;
    Complex want = std::conj(modes[i].lambda);
    bool found = false;
    for (int j = 0; j < n; ++j)
      if (std::abs(modes[j].lambda - want) < 1e-6 * (1.0 + std::abs(want))) found = true;
    closed = found;
  }
  modes.resize(closed ? n : n + 1);
  return modes;
}

StateFunction Plant::boundary_value_mode(Complex lambda_anchor, Complex input_value) const {
  return boundary_value_mode(lambda_anchor, input_value, dp_.rho);
}

StateFunction Plant::boundary_value_mode(Complex lambda_anchor, Complex input_value,
                                         double refl) const {
  StateFunction h = eigenfunction_family(lambda_anchor);
  Complex g = boundary_functional(h, refl);
  double scale = std::abs(h.h1(1.0)) + std::abs(h.h2(1.0));
  if (std::abs(g) < 1e-10 * std::max(scale, 1.0))
    throw std::runtime_error("boundary_value_mode: anchor too close to spectrum");
  return (input_value / g) * h;
}

std::vector<Complex> Plant::modal_input_coefficients(
    const std::vector<EigenMode>& modes) const {
  std::vector<Complex> b;
  b.reserve(modes.size());
  for (const EigenMode& m : modes)
    b.push_back(sp_.alpha * std::conj(m.phi_star.h1(1.0)));
  return b;
}

}  // namespace fosf
