#include "fosf/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fosf {

namespace {

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

double median(std::vector<double> v) {
  if (v.empty()) return 1.0;
  size_t k = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + k, v.end());
  return std::max(v[k], 1e-300);
}

}  // namespace

RefineResult refine_root(const std::function<Complex(Complex)>& f, Complex seed,
                         double tol, int max_iter) {
  Complex z = seed;
  Complex fz = f(z);
  RefineResult res{z, std::abs(fz), 0, false};
  if (!finite(fz)) return res;
  for (int it = 0; it < max_iter; ++it) {
    if (std::abs(fz) < tol) {
      res = {z, std::abs(fz), it, true};
      return res;
    }
    double h = std::max(1e-6, 1e-6 * std::abs(z));
    Complex fp = f(z + h), fm = f(z - h);
    if (!finite(fp) || !finite(fm)) break;
    Complex df = (fp - fm) / (2.0 * h);
    if (std::abs(df) == 0.0) break;
    Complex step = fz / df;
    if (std::abs(step) > 10.0 * (1.0 + std::abs(z))) break;  // divergence guard
    z -= step;
    fz = f(z);
    if (!finite(fz)) break;
    res = {z, std::abs(fz), it + 1, std::abs(fz) < tol};
  }
  res.converged = std::abs(fz) < tol;
  res.root = z;
  res.residual = std::abs(fz);
  return res;
}

SpectrumResult find_roots(const CharFunction& f, const Rect& region,
                          const RootFindOptions& opts) {
  if (!(region.re_max > region.re_min) || !(region.im_max > region.im_min))
    throw std::invalid_argument("find_roots: region has no area");
  if (opts.nx < 8 || opts.ny < 8)
    throw std::invalid_argument("find_roots: grid must be at least 8x8");

  // For conjugate-symmetric functions scan only the closed upper half and mirror.
  Rect scan = region;
  bool mirror = false;
  if (f.conjugate_symmetric && region.im_min < 0.0 && region.im_max > 0.0) {
    scan.im_min = 0.0;
    mirror = true;
  }

  const int nx = opts.nx, ny = opts.ny;
  std::vector<std::vector<double>> mag(ny, std::vector<double>(nx, -1.0));
  std::vector<double> finite_mags;
  finite_mags.reserve(static_cast<size_t>(nx) * ny);
  auto node = [&](int i, int j) {
    double re = scan.re_min + (scan.re_max - scan.re_min) * j / (nx - 1);
    double im = scan.im_min + (scan.im_max - scan.im_min) * i / (ny - 1);
    return Complex(re, im);
  };
  for (int i = 0; i < ny; ++i)
    for (int j = 0; j < nx; ++j) {
      Complex v = f.eval(node(i, j));
      if (finite(v)) {
        mag[i][j] = std::abs(v);
        finite_mags.push_back(mag[i][j]);
      }
    }
  double scale = median(finite_mags);
  double raw_tol = opts.tol * scale;

  // seeds: strict-ish local minima of |f| over clamped 3x3 neighborhoods
  std::vector<Complex> seeds;
  for (int i = 0; i < ny; ++i)
    for (int j = 0; j < nx; ++j) {
      double m = mag[i][j];
      if (m < 0.0) continue;
      bool is_min = true;
      for (int di = -1; di <= 1 && is_min; ++di)
        for (int dj = -1; dj <= 1 && is_min; ++dj) {
          int ii = std::clamp(i + di, 0, ny - 1);
          int jj = std::clamp(j + dj, 0, nx - 1);
          if ((ii != i || jj != j) && mag[ii][jj] >= 0.0 && mag[ii][jj] < m)
            is_min = false;
        }
      if (is_min) seeds.push_back(node(i, j));
    }

  SpectrumResult out;
  out.region = region;
  out.scale = scale;

  auto dedup_radius = [&](Complex z) { return opts.dedup_scale * (1.0 + std::abs(z)); };
  auto push_root = [&](Complex z, double raw_res, int iters) {
    for (Complex ex : f.excluded_points)
      if (std::abs(z - ex) < opts.excluded_radius) {
        out.dropped_near_excluded.push_back({z, raw_res / scale, iters, "char-eq"});
        return;
      }
    for (const RootRecord& r : out.roots)
      if (std::abs(z - r.value) < dedup_radius(z)) return;
    out.roots.push_back({z, raw_res / scale, iters, "char-eq"});
  };

  for (Complex seed : seeds) {
    RefineResult r = refine_root(f.eval, seed, raw_tol, opts.max_iter);
    if (!r.converged) continue;  // non-convergence at a seed is not fatal
    Complex z = r.root;
    if (f.conjugate_symmetric && std::abs(z.imag()) < dedup_radius(z))
      z = Complex(z.real(), 0.0);
    if (!scan.contains(z, dedup_radius(z))) continue;
    push_root(z, r.residual, r.iterations);
  }

  if (mirror) {
    std::vector<RootRecord> uppers = out.roots;
    for (const RootRecord& r : uppers) {
      Complex c = std::conj(r.value);
      if (c.imag() < 0.0 && region.contains(c)) {
        Complex v = f.eval(c);
        if (finite(v) && std::abs(v) < 10.0 * raw_tol)
          push_root(c, std::abs(v), r.iterations);
      }
    }
  }

  std::sort(out.roots.begin(), out.roots.end(), [](const RootRecord& a, const RootRecord& b) {
    if (a.value.imag() != b.value.imag()) return a.value.imag() < b.value.imag();
    return a.value.real() < b.value.real();
  });
  return out;
}

namespace {

double phase_delta(const std::function<Complex(Complex)>& f, Complex z1, Complex z2,
                   Complex f1, Complex f2, double guard, int depth) {
  if (std::abs(f1) < guard || std::abs(f2) < guard)
    throw std::runtime_error("root-on-contour near (" + std::to_string(z1.real()) + ", " +
                             std::to_string(z1.imag()) + ")");
  double d = std::arg(f2 / f1);
  if (std::abs(d) <= 1.5707963267948966 || depth >= 48) return d;
  Complex zm = 0.5 * (z1 + z2);
  Complex fm = f(zm);
  return phase_delta(f, z1, zm, f1, fm, guard, depth + 1) +
         phase_delta(f, zm, z2, fm, f2, guard, depth + 1);
}

}  // namespace

int count_roots_argument_principle(const CharFunction& f, const Rect& region,
                                   int samples_per_edge) {
  if (samples_per_edge < 2) samples_per_edge = 2;
  std::vector<Complex> pts;
  Complex c1(region.re_min, region.im_min), c2(region.re_max, region.im_min),
      c3(region.re_max, region.im_max), c4(region.re_min, region.im_max);
  auto edge = [&](Complex a, Complex b) {
    for (int k = 0; k < samples_per_edge; ++k)
      pts.push_back(a + (b - a) * (static_cast<double>(k) / samples_per_edge));
  };
  edge(c1, c2);
  edge(c2, c3);
  edge(c3, c4);
  edge(c4, c1);
  pts.push_back(c1);

  std::vector<Complex> vals(pts.size());
  double max_mag = 0.0;
  for (size_t k = 0; k < pts.size(); ++k) {
    vals[k] = f.eval(pts[k]);
    if (!std::isfinite(std::abs(vals[k])))
      throw std::runtime_error("argument principle: evaluator failure on contour");
    max_mag = std::max(max_mag, std::abs(vals[k]));
  }
  double guard = 1e-13 * std::max(max_mag, 1e-300);

  double total = 0.0;
  for (size_t k = 0; k + 1 < pts.size(); ++k)
    total += phase_delta(f.eval, pts[k], pts[k + 1], vals[k], vals[k + 1], guard, 0);
  return static_cast<int>(std::lround(total / (2.0 * 3.141592653589793)));
}

}  // namespace fosf
