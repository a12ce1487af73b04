#pragma once

#include <vector>

#include "fosf/params.hpp"
#include "fosf/spectral.hpp"

namespace fosf {

// One term c * e^{r z} of an exponential sum.
struct ExpTerm {
  Complex coef;
  Complex rate;
};

// Finite exponential sum on [0,1]; closed under differentiation and products
// with scalars, so all inner products in the pipeline stay closed-form.
struct ExpSum {
  std::vector<ExpTerm> terms;
  Complex operator()(double z) const;
  ExpSum derivative() const;
};
ExpSum operator+(const ExpSum& a, const ExpSum& b);
ExpSum operator*(Complex s, const ExpSum& a);

// Element of the state space L^2(0,1;C^2) x C.
struct StateFunction {
  ExpSum h1, h2;
  Complex h3{0.0, 0.0};
};
StateFunction operator+(const StateFunction& a, const StateFunction& b);
StateFunction operator*(Complex s, const StateFunction& h);

// Eigenvalue of an intermediate operator with its eigenfunction and the
// adjoint eigenfunction scaled so that <phi, phi_star> = 1.
struct EigenMode {
  Complex lambda;
  StateFunction phi;
  StateFunction phi_star;
  int index;  // ordering by |Im lambda|, positive imaginary part first
};

// Closed-form eigenstructure machinery for the example hyperbolic plant
//   A h = (alpha h2', beta h1', gamma h2(0)),  domain condition h3 = h1(0),
// under the boundary functional K_r h = h2(1) - r h1(1).  r = rho gives the
// observer-intermediate operator, r = k_ring the controller-intermediate one.
class Plant {
 public:
  Plant(const SystemParams& sp, const DerivedParams& dp);

  const SystemParams& sys() const { return sp_; }
  const DerivedParams& derived() const { return dp_; }

  StateFunction apply_A(const StateFunction& h) const;
  // adjoint action (-beta g2', -alpha g1', -beta g2(0)); domain tested, not enforced
  StateFunction apply_A_star(const StateFunction& g) const;

  // canonical inner product, conjugation on the second argument; closed form
  static Complex inner_product(const StateFunction& f, const StateFunction& g);

  // the (up to scale) solution of A h = lambda h with no condition at z = 1
  StateFunction homogeneous_eigenfunction(Complex lambda) const;  // lambda != 0
  // same family in a parametrization that stays regular at lambda = 0
  StateFunction eigenfunction_family(Complex lambda) const;

  Complex boundary_functional(const StateFunction& h, double refl) const;  // h2(1)-r*h1(1)
  Complex output_trace(const StateFunction& h) const;                      // h1(1)

  CharFunction intermediate_char_function() const;          // refl = rho
  CharFunction reflection_char_function(double refl) const;

  std::vector<EigenMode> eigenmodes(int n, const Rect& region) const;  // refl = rho
  std::vector<EigenMode> eigenmodes(int n, const Rect& region, double refl) const;
  // chooses its own region and rounds n up so conjugate pairs are never split
  std::vector<EigenMode> eigenmodes_pair_complete(int n, double refl) const;

  // solution of lambda h = A h with K_r h = input_value (anchor off the spectrum)
  StateFunction boundary_value_mode(Complex lambda_anchor, Complex input_value) const;
  StateFunction boundary_value_mode(Complex lambda_anchor, Complex input_value,
                                    double refl) const;

  // b_i = alpha * conj(phi_star_{i,1}(1)), the modal expansion of the input operator
  std::vector<Complex> modal_input_coefficients(const std::vector<EigenMode>& modes) const;

  // unnormalized adjoint eigenfunction candidate at conj(lambda)
  StateFunction adjoint_eigenfunction_raw(Complex lambda, double refl) const;

 private:
  SystemParams sp_;
  DerivedParams dp_;
};

}  // namespace fosf
