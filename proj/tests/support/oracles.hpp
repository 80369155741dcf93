#pragma once

// Reference computations for tests. Everything here is deliberately naive
// (direct summation, elementary quadrature, dense linear algebra) and shares
// no code path with the library implementations it checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "homog/common.hpp"
#include "homog/grid.hpp"

namespace oracle {

// Direct O(|N|^2) centered DFT: coeff(k) = (1/|N|) sum_m exp(-2 pi i k.m/N) f(m).
inline homog::FourierField naive_dft_forward(const homog::GridField& f) {
  const auto& shape = f.shape();
  const int d = shape.dim();
  homog::FourierField out(shape, f.components());
  homog::for_each_cell(shape, [&](std::span<const int> ki, long kcell) {
    homog::for_each_cell(shape, [&](std::span<const int> mi, long mcell) {
      double phase = 0.0;
      for (int a = 0; a < d; ++a)
        phase += static_cast<double>(shape.wrap(a, ki[a])) * shape.wrap(a, mi[a]) /
                 shape.extent(a);
      const std::complex<double> w = std::polar(1.0, -2.0 * std::numbers::pi * phase);
      for (int c = 0; c < f.components(); ++c) out.at(c, kcell) += w * f.at(c, mcell);
    });
  });
  const double scale = 1.0 / static_cast<double>(shape.cell_count());
  for (auto& z : out.data()) z *= scale;
  return out;
}

// Direct summation inverse: f(m) = sum_k exp(+2 pi i k.m/N) coeff(k).
inline homog::GridField naive_dft_inverse(const homog::FourierField& coeffs) {
  const auto& shape = coeffs.shape();
  const int d = shape.dim();
  homog::GridField out(shape, coeffs.components());
  homog::for_each_cell(shape, [&](std::span<const int> mi, long mcell) {
    homog::for_each_cell(shape, [&](std::span<const int> ki, long kcell) {
      double phase = 0.0;
      for (int a = 0; a < d; ++a)
        phase += static_cast<double>(shape.wrap(a, ki[a])) * shape.wrap(a, mi[a]) /
                 shape.extent(a);
      const std::complex<double> w = std::polar(1.0, 2.0 * std::numbers::pi * phase);
      for (int c = 0; c < coeffs.components(); ++c)
        out.at(c, mcell) += (w * coeffs.at(c, kcell)).real();
    });
  });
  return out;
}

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double p0, p1;
    for (int it = 0; it < 100; ++it) {
      p0 = 1.0;
      p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
      }
      const double dp = n * (t * p0 - p1) / (t * t - 1.0);
      const double dt = p0 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    p0 = 1.0;
    p1 = 0.0;
    for (int j = 0; j < n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
    }
    const double dp = n * (t * p0 - p1) / (t * t - 1.0);
    x[i] = -t;
    x[n - 1 - i] = t;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

// Integral of fn over [a, b] with an n-point Gauss rule.
inline double gauss_integrate(const std::function<double(double)>& fn, double a, double b, int n) {
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += w[i] * fn(mid + half * x[i]);
  return sum * half;
}

// Adaptive Simpson quadrature.
inline double adaptive_simpson(const std::function<double(double)>& fn, double a, double b,
                               double tol, int depth = 24) {
  const double fa = fn(a), fb = fn(b), fm = fn(0.5 * (a + b));
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fhi, double fmid, double eps,
          int d) -> double {
    const double m = 0.5 * (lo + hi);
    const double lm = 0.5 * (lo + m), rm = 0.5 * (m + hi);
    const double flm = fn(lm), frm = fn(rm);
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    const double left = (m - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    const double right = (hi - m) / 6.0 * (fmid + 4.0 * frm + fhi);
    if (d <= 0 || std::abs(left + right - whole) < 15.0 * eps)
      return left + right + (left + right - whole) / 15.0;
    return rec(lo, m, flo, fmid, flm, 0.5 * eps, d - 1) +
           rec(m, hi, fmid, fhi, frm, 0.5 * eps, d - 1);
  };
  return rec(a, b, fa, fb, fm, tol, depth);
}

// Dense symmetric eigenvalues via cyclic Jacobi rotations; a is row-major
// n x n and is destroyed.
inline std::vector<double> dense_sym_eigenvalues(std::vector<double> a, int n) {
  auto idx = [n](int i, int j) { return static_cast<long>(i) * n + j; };
  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a[idx(i, j)] * a[idx(i, j)];
    if (std::sqrt(off) < 1e-15 * (1.0 + std::sqrt(off + 1.0))) break;
    double thresh = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) thresh = std::max(thresh, std::abs(a[idx(i, j)]));
    if (std::sqrt(off) < 1e-14 * n * thresh) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a[idx(p, q)];
        if (std::abs(apq) < 1e-300) continue;
        const double app = a[idx(p, p)], aqq = a[idx(q, q)];
        const double theta = 0.5 * (aqq - app) / apq;
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[idx(k, p)], akq = a[idx(k, q)];
          a[idx(k, p)] = c * akp - s * akq;
          a[idx(k, q)] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[idx(p, k)], aqk = a[idx(q, k)];
          a[idx(p, k)] = c * apk - s * aqk;
          a[idx(q, k)] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (int i = 0; i < n; ++i) eig[i] = a[idx(i, i)];
  std::sort(eig.begin(), eig.end());
  return eig;
}

// Dense symmetric-positive-definite solve (Gaussian elimination with partial
// pivoting); a row-major n x n.
inline std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  auto idx = [n](int i, int j) { return static_cast<long>(i) * n + j; };
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[idx(r, col)]) > std::abs(a[idx(piv, col)])) piv = r;
    if (piv != col) {
      for (int j = 0; j < n; ++j) std::swap(a[idx(col, j)], a[idx(piv, j)]);
      std::swap(b[col], b[piv]);
    }
    const double d = a[idx(col, col)];
    if (d == 0.0) throw std::runtime_error("dense_solve: singular matrix");
    for (int r = col + 1; r < n; ++r) {
      const double f = a[idx(r, col)] / d;
      if (f == 0.0) continue;
      for (int j = col; j < n; ++j) a[idx(r, j)] -= f * a[idx(col, j)];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int j = r + 1; j < n; ++j) s -= a[idx(r, j)] * x[j];
    x[r] = s / a[idx(r, r)];
  }
  return x;
}

// Random field with entries in [-1, 1).
inline homog::GridField random_field(const homog::GridShape& shape, int comps,
                                     std::uint64_t seed) {
  homog::GridField f(shape, comps);
  homog::SplitMix64 rng(seed);
  for (auto& v : f.data()) v = rng.symmetric();
  return f;
}

// Independent spectral projection: naive DFT, dense rank-1 frequency blocks
// on the active set, naive inverse.
inline homog::GridField dense_project(const homog::GridShape& active,
                                      const homog::GridField& v) {
  const auto& shape = v.shape();
  const int d = shape.dim();
  auto coeffs = naive_dft_forward(v);
  homog::for_each_cell(shape, [&](std::span<const int> idx, long cell) {
    std::array<double, 3> k{0.0, 0.0, 0.0};
    double kk = 0.0;
    bool active_freq = true;
    for (int a = 0; a < d; ++a) {
      const int ka = shape.wrap(a, idx[a]);
      if (2 * std::abs(ka) >= active.extent(a)) active_freq = false;
      k[a] = ka;
      kk += k[a] * k[a];
    }
    std::array<std::complex<double>, 3> out{};
    if (active_freq && kk > 0.0) {
      std::complex<double> dotp{0.0, 0.0};
      for (int a = 0; a < d; ++a) dotp += k[a] * coeffs.at(a, cell);
      for (int a = 0; a < d; ++a) out[a] = k[a] * dotp / kk;
    }
    for (int a = 0; a < d; ++a) coeffs.at(a, cell) = out[a];
  });
  return naive_dft_inverse(coeffs);
}

}  // namespace oracle
