#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace fosf {

using Complex = std::complex<double>;

struct Rect {
  double re_min, re_max, im_min, im_max;
  bool contains(Complex z, double margin = 0.0) const {
    return z.real() >= re_min - margin && z.real() <= re_max + margin &&
           z.imag() >= im_min - margin && z.imag() <= im_max + margin;
  }
};

// Evaluatable complex-analytic scalar function with a finite set of points
// where the evaluator is invalid (e.g. the spectrum of a finite matrix whose
// resolvent appears inside the evaluator).
struct CharFunction {
  std::function<Complex(Complex)> eval;
  std::vector<Complex> excluded_points;
  bool conjugate_symmetric = false;
};

struct RootRecord {
  Complex value;
  double residual;     // |f(root)| after normalizing by the median grid magnitude
  int iterations;      // refinement iterations spent
  std::string method;  // "char-eq" | "finite-block" | "discretization-oracle"
};

struct SpectrumResult {
  std::vector<RootRecord> roots;
  Rect region{};
  // roots that converged onto a masked excluded point; reported, not returned
  std::vector<RootRecord> dropped_near_excluded;
  double scale = 1.0;  // median |f| over the scan grid (the normalizer)
};

struct RootFindOptions {
  int nx = 140;
  int ny = 400;
  double tol = 1e-9;            // on |f| / median-grid-magnitude
  double dedup_scale = 1e-6;    // dedup radius = dedup_scale * (1 + |lambda|)
  double excluded_radius = 1e-4;
  int max_iter = 80;
};

// Grid scan for local minima of |f| followed by Newton refinement with a
// numerical derivative. Conjugate-symmetric functions are scanned on the
// closed upper half of the region and mirrored.
SpectrumResult find_roots(const CharFunction& f, const Rect& region,
                          const RootFindOptions& opts = {});

// Winding number of f along the rectangle boundary; equals the number of
// enclosed zeros (with multiplicity) for f analytic inside.  Throws
// std::runtime_error("root-on-contour ...") when |f| collapses on the contour.
int count_roots_argument_principle(const CharFunction& f, const Rect& region,
                                   int samples_per_edge);

struct RefineResult {
  Complex root;
  double residual;  // raw |f(root)|
  int iterations;
  bool converged;
};
RefineResult refine_root(const std::function<Complex(Complex)>& f, Complex seed,
                         double tol, int max_iter);

}  // namespace fosf
