#include "homog/material.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "homog/common.hpp"

namespace homog {

namespace {

constexpr double kSquareHalfWidth = 0.3;
constexpr double kGeomTol = 1e-12;

double det3(const SymMat& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

}  // namespace

std::array<double, 3> SymMat::eigenvalues() const {
  std::array<double, 3> eig{0.0, 0.0, 0.0};
  if (d == 2) {
    const double tr = (*this)(0, 0) + (*this)(1, 1);
    const double det = (*this)(0, 0) * (*this)(1, 1) - (*this)(0, 1) * (*this)(1, 0);
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    eig[0] = tr / 2.0 - disc;
    eig[1] = tr / 2.0 + disc;
    return eig;
  }
  // Symmetric 3 x 3: trigonometric closed form.
  const SymMat& a = *this;
  const double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
  if (p1 == 0.0) {
    eig = {a(0, 0), a(1, 1), a(2, 2)};
    std::sort(eig.begin(), eig.end());
    return eig;
  }
  const double q = (a(0, 0) + a(1, 1) + a(2, 2)) / 3.0;
  const double p2 = (a(0, 0) - q) * (a(0, 0) - q) + (a(1, 1) - q) * (a(1, 1) - q) +
                    (a(2, 2) - q) * (a(2, 2) - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  SymMat b = a;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) b(i, j) = (a(i, j) - (i == j ? q : 0.0)) / p;
  double r = det3(b) / 2.0;
  r = std::clamp(r, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  eig[2] = q + 2.0 * p * std::cos(phi);
  eig[0] = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  eig[1] = 3.0 * q - eig[0] - eig[2];
  std::sort(eig.begin(), eig.end());
  return eig;
}

const char* geometry_label(Geometry g) {
  switch (g) {
    case Geometry::Square: return "square";
    case Geometry::Pyramid: return "pyramid";
    case Geometry::Circle: return "circle";
    case Geometry::Voxel: return "voxel";
  }
  return "?";
}

double VoxelImage::min_value() const { return *std::min_element(values.begin(), values.end()); }
double VoxelImage::max_value() const { return *std::max_element(values.begin(), values.end()); }

SymMat base_matrix(int d) {
  SymMat m = SymMat::zero(d);
  const double s3 = std::sqrt(3.0);
  if (d == 2) {
    m(0, 0) = 7.0 / 4.0;
    m(1, 1) = 5.0 / 4.0;
    m(0, 1) = m(1, 0) = s3 / 4.0;
  } else if (d == 3) {
    m(0, 0) = 31.0 / 16.0;
    m(1, 1) = 21.0 / 16.0;
    m(2, 2) = 11.0 / 4.0;
    m(0, 1) = m(1, 0) = 5.0 * s3 / 16.0;
    m(0, 2) = m(2, 0) = 3.0 / 8.0;
    m(1, 2) = m(2, 1) = s3 / 8.0;
  } else {
    throw std::invalid_argument("base_matrix: d must be 2 or 3");
  }
  const auto eig = m.eigenvalues();
  for (int i = 0; i < d; ++i) {
    if (std::abs(eig[i] - (i + 1.0)) > 1e-12)
      throw std::logic_error("base_matrix: eigenvalue check failed");
  }
  return m;
}

MaterialSpec MaterialSpec::square(int d, double rho) {
  if (rho < 0.0) throw std::invalid_argument("MaterialSpec: contrast must be nonnegative");
  MaterialSpec s;
  s.d_ = d;
  s.geometry_ = Geometry::Square;
  s.rho_ = rho;
  s.base_ = base_matrix(d);
  return s;
}

MaterialSpec MaterialSpec::pyramid(int d, double rho) {
  MaterialSpec s = square(d, rho);
  s.geometry_ = Geometry::Pyramid;
  return s;
}

MaterialSpec MaterialSpec::circle(int d, double rho, double radius) {
  if (!(radius > 0.0 && radius < 0.5))
    throw std::invalid_argument("MaterialSpec: circle radius must lie in (0, 1/2)");
  MaterialSpec s = square(d, rho);
  s.geometry_ = Geometry::Circle;
  s.radius_ = radius;
  return s;
}

MaterialSpec MaterialSpec::voxel(VoxelImage image) {
  if (image.resolution.cell_count() != static_cast<long>(image.values.size()))
    throw std::invalid_argument("MaterialSpec: voxel value count does not match resolution");
  if (image.min_value() <= 0.0)
    throw std::invalid_argument("MaterialSpec: voxel conductivities must be positive");
  MaterialSpec s;
  s.d_ = image.resolution.dim();
  if (s.d_ != 2 && s.d_ != 3) throw std::invalid_argument("MaterialSpec: voxel dim must be 2 or 3");
  s.geometry_ = Geometry::Voxel;
  s.rho_ = 1.0;
  s.base_ = SymMat::zero(s.d_);

  auto img = std::make_shared<VoxelImage>(std::move(image));
  // Normalised DFT of the raw cell values, reused by every coefficient query.
  GridField raw(img->resolution, 1);
  std::copy(img->values.begin(), img->values.end(), raw.component(0));
  s.voxel_dft_ = std::make_shared<const FourierField>(dft_forward(raw));
  s.voxel_ = std::move(img);
  return s;
}

std::pair<double, double> MaterialSpec::ellipticity_bounds() const {
  if (geometry_ == Geometry::Voxel) return {voxel_->min_value(), voxel_->max_value()};
  return {1.0, rho_ + d_};
}

double MaterialSpec::shape_value(std::span<const double> x) const {
  switch (geometry_) {
    case Geometry::Square: {
      for (int a = 0; a < d_; ++a)
        if (std::abs(x[a]) > kSquareHalfWidth) return 0.0;
      return 1.0;
    }
    case Geometry::Pyramid: {
      double f = 1.0;
      for (int a = 0; a < d_; ++a) f *= 1.0 - 2.0 * std::abs(x[a]);
      return f;
    }
    case Geometry::Circle: {
      double r2 = 0.0;
      for (int a = 0; a < d_; ++a) r2 += x[a] * x[a];
      return r2 <= radius_ * radius_ ? 1.0 : 0.0;
    }
    case Geometry::Voxel: {
      const GridShape& res = voxel_->resolution;
      long cell = 0;
      long stride = 1;
      for (int a = 0; a < d_; ++a) {
        const int r = res.extent(a);
        int j = static_cast<int>(std::floor((x[a] + 0.5) * r));
        j = std::clamp(j, 0, r - 1);
        cell += stride * j;
        stride *= r;
      }
      return voxel_->values[cell];
    }
  }
  return 0.0;
}

std::complex<double> MaterialSpec::shape_fourier_coeff(const FreqIndex& k) const {
  if (k.d != d_) throw std::invalid_argument("shape_fourier_coeff: index dimension mismatch");
  const double pi = std::numbers::pi;
  switch (geometry_) {
    case Geometry::Square: {
      double prod = 1.0;
      for (int a = 0; a < d_; ++a) {
        const int ka = k.k[a];
        prod *= ka == 0 ? 2.0 * kSquareHalfWidth
                        : std::sin(2.0 * pi * ka * kSquareHalfWidth) / (pi * ka);
      }
      return prod;
    }
    case Geometry::Pyramid: {
      // Per-axis hat profile 1 - 2|x|: coefficient 1/2 at zero frequency,
      // 2/(pi k)^2 at odd k, zero at even nonzero k.
      double prod = 1.0;
      for (int a = 0; a < d_; ++a) {
        const int ka = std::abs(k.k[a]);
        if (ka == 0)
          prod *= 0.5;
        else if (ka % 2 == 0)
          return 0.0;
        else
          prod *= 2.0 / (pi * pi * ka * ka);
      }
      return prod;
    }
    case Geometry::Circle: {
      double kk = 0.0;
      for (int a = 0; a < d_; ++a) kk += static_cast<double>(k.k[a]) * k.k[a];
      const double kn = std::sqrt(kk);
      if (d_ == 2) {
        if (kn == 0.0) return pi * radius_ * radius_;
        return radius_ * std::cyl_bessel_j(1, 2.0 * pi * radius_ * kn) / kn;
      }
      if (kn == 0.0) return 4.0 / 3.0 * pi * radius_ * radius_ * radius_;
      const double u = 2.0 * pi * radius_ * kn;
      double num;
      if (u < 1e-3) {
        // sin(u) - u cos(u) loses accuracy for small u; use the series.
        num = u * u * u / 3.0 * (1.0 - u * u / 10.0 + u * u * u * u / 280.0);
      } else {
        num = std::sin(u) - u * std::cos(u);
      }
      return num / (2.0 * pi * pi * kk * kn);
    }
    case Geometry::Voxel: {
      const GridShape& res = voxel_->resolution;
      std::complex<double> prefactor{1.0, 0.0};
      long cell = 0;
      long stride = 1;
      for (int a = 0; a < d_; ++a) {
        const int r = res.extent(a);
        const int ka = k.k[a];
        // Per-axis factor of the cell-indicator transform:
        // (-1)^k exp(-i pi k / R) sin(pi k / R) / (pi k), with limit 1/R.
        if (ka == 0) {
          prefactor *= 1.0 / r;
        } else {
          const double s = std::sin(pi * ka / r) / (pi * ka);
          const double sign = ka % 2 == 0 ? 1.0 : -1.0;
          prefactor *= sign * s * std::polar(1.0, -pi * ka / r);
        }
        int km = ka % r;
        if (km < 0) km += r;
        cell += stride * km;
        stride *= r;
      }
      const double count = static_cast<double>(res.cell_count());
      return prefactor * count * voxel_dft_->at(0, cell);
    }
  }
  return 0.0;
}

std::complex<double> MaterialSpec::tensor_fourier_coeff(int a, int b, const FreqIndex& k) const {
  std::complex<double> c{0.0, 0.0};
  if (k.is_zero()) c += base_(a, b);
  if (a == b) c += rho_ * shape_fourier_coeff(k);
  return c;
}

SymMat MaterialSpec::tensor_at(std::span<const double> x) const {
  return base_.plus_scaled_identity(rho_ * shape_value(x));
}

TensorGridField sample_on_grid(const MaterialSpec& spec, const GridShape& shape) {
  if (shape.dim() != spec.dim())
    throw std::invalid_argument("sample_on_grid: grid dimension mismatch");
  if (spec.geometry() == Geometry::Voxel && !(shape == spec.voxel_image()->resolution))
    throw std::invalid_argument("sample_on_grid: voxel grids must match the image resolution");
  const int d = spec.dim();
  TensorGridField out(shape, d);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for_each_cell(shape, [&](std::span<const int> idx, long cell) {
    for (int a = 0; a < d; ++a) x[a] = shape.coord(a, idx[a]);
    const SymMat t = spec.tensor_at(std::span<const double>(x.data(), d));
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b) out.set_sym(a, b, cell, t(a, b));
  });
  return out;
}

TensorGridField exact_double_grid_field(const MaterialSpec& spec, const GridShape& n_grid) {
  if (n_grid.dim() != spec.dim())
    throw std::invalid_argument("exact_double_grid_field: grid dimension mismatch");
  if (!n_grid.all_odd())
    throw std::invalid_argument("exact_double_grid_field: grid extents must be odd");
  const int d = spec.dim();
  const GridShape dbl = n_grid.refined_double();

  // One scalar coefficient set per upper-triangle tensor entry.
  const int pairs = d * (d + 1) / 2;
  FourierField coeffs(dbl, pairs);
  FreqIndex k;
  k.d = d;
  for_each_cell(dbl, [&](std::span<const int> idx, long cell) {
    for (int a = 0; a < d; ++a) k.k[a] = dbl.wrap(a, idx[a]);
    int c = 0;
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b) coeffs.at(c++, cell) = spec.tensor_fourier_coeff(a, b, k);
  });

  GridField samples = dft_inverse(coeffs);
  TensorGridField out(dbl, d);
  int c = 0;
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) {
      const double* src = samples.component(c++);
      for (long cell = 0; cell < out.cells(); ++cell) out.set_sym(a, b, cell, src[cell]);
    }
  }
  return out;
}

double point_simplex_distance(std::span<const double> point,
                              std::span<const std::array<double, 3>> vertices, int d) {
  const auto dot = [d](std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += a[i] * b[i];
    return s;
  };

  auto segment_distance = [&](const std::array<double, 3>& a, const std::array<double, 3>& b) {
    std::array<double, 3> ab{}, ap{};
    for (int i = 0; i < d; ++i) {
      ab[i] = b[i] - a[i];
      ap[i] = point[i] - a[i];
    }
    const double denom = dot(std::span<const double>(ab.data(), d), std::span<const double>(ab.data(), d));
    double t = denom > 0.0 ? dot(std::span<const double>(ap.data(), d), std::span<const double>(ab.data(), d)) / denom : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
      const double diff = point[i] - (a[i] + t * ab[i]);
      s += diff * diff;
    }
    return std::sqrt(s);
  };

  if (vertices.size() == static_cast<std::size_t>(2)) {
    return segment_distance(vertices[0], vertices[1]);
  }

  if (vertices.size() == 3 && d == 2) {
    // Barycentric inside test, else nearest edge.
    const auto& v0 = vertices[0];
    const auto& v1 = vertices[1];
    const auto& v2 = vertices[2];
    const double d00 = (v1[0] - v0[0]) * (v2[1] - v0[1]) - (v2[0] - v0[0]) * (v1[1] - v0[1]);
    if (d00 != 0.0) {
      const double l1 = ((point[0] - v0[0]) * (v2[1] - v0[1]) - (v2[0] - v0[0]) * (point[1] - v0[1])) / d00;
      const double l2 = ((v1[0] - v0[0]) * (point[1] - v0[1]) - (point[0] - v0[0]) * (v1[1] - v0[1])) / d00;
      const double l0 = 1.0 - l1 - l2;
      if (l0 >= 0.0 && l1 >= 0.0 && l2 >= 0.0) return 0.0;
    }
    double best = segment_distance(v0, v1);
    best = std::min(best, segment_distance(v0, v2));
    return std::min(best, segment_distance(v1, v2));
  }

  if (vertices.size() == 3 && d == 3) {
    // Point-to-triangle in 3-D: project on the plane, test barycentric,
    // else fall back to the edges.
    const auto& a = vertices[0];
    const auto& b = vertices[1];
    const auto& c = vertices[2];
    std::array<double, 3> ab{}, ac{}, ap{};
    for (int i = 0; i < 3; ++i) {
      ab[i] = b[i] - a[i];
      ac[i] = c[i] - a[i];
      ap[i] = point[i] - a[i];
    }
    const double dabab = dot(std::span<const double>(ab.data(), 3), std::span<const double>(ab.data(), 3));
    const double dabac = dot(std::span<const double>(ab.data(), 3), std::span<const double>(ac.data(), 3));
    const double dacac = dot(std::span<const double>(ac.data(), 3), std::span<const double>(ac.data(), 3));
    const double dapab = dot(std::span<const double>(ap.data(), 3), std::span<const double>(ab.data(), 3));
    const double dapac = dot(std::span<const double>(ap.data(), 3), std::span<const double>(ac.data(), 3));
    const double det = dabab * dacac - dabac * dabac;
    if (det > 0.0) {
      const double u = (dacac * dapab - dabac * dapac) / det;
      const double v = (dabab * dapac - dabac * dapab) / det;
      if (u >= 0.0 && v >= 0.0 && u + v <= 1.0) {
        double s = 0.0;
        for (int i = 0; i < 3; ++i) {
          const double diff = point[i] - (a[i] + u * ab[i] + v * ac[i]);
          s += diff * diff;
        }
        return std::sqrt(s);
      }
    }
    double best = segment_distance(a, b);
    best = std::min(best, segment_distance(a, c));
    return std::min(best, segment_distance(b, c));
  }

  // Tetrahedron: inside via barycentric coordinates, else nearest face.
  const auto& v0 = vertices[0];
  std::array<std::array<double, 3>, 3> e{};
  std::array<double, 3> p0{};
  for (int i = 0; i < 3; ++i) {
    for (int col = 0; col < 3; ++col) e[i][col] = vertices[col + 1][i] - v0[i];
    p0[i] = point[i] - v0[i];
  }
  const double det = e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1]) -
                     e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0]) +
                     e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0]);
  if (det != 0.0) {
    // Cramer solve e * lambda = p0.
    std::array<double, 3> lambda{};
    for (int col = 0; col < 3; ++col) {
      std::array<std::array<double, 3>, 3> m = e;
      for (int i = 0; i < 3; ++i) m[i][col] = p0[i];
      const double dc = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                        m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                        m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
      lambda[col] = dc / det;
    }
    const double l0 = 1.0 - lambda[0] - lambda[1] - lambda[2];
    if (l0 >= 0.0 && lambda[0] >= 0.0 && lambda[1] >= 0.0 && lambda[2] >= 0.0) return 0.0;
  }
  double best = std::numeric_limits<double>::infinity();
  const std::array<std::array<int, 3>, 4> faces{{{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}}};
  for (const auto& f : faces) {
    std::array<std::array<double, 3>, 3> tri{vertices[f[0]], vertices[f[1]], vertices[f[2]]};
    best = std::min(best, point_simplex_distance(point, std::span<const std::array<double, 3>>(tri.data(), 3), 3));
  }
  return best;
}

namespace {

// -1 strictly outside, 0 on the boundary band, +1 strictly inside.
int box_side(std::span<const double> x, int d, double half_width) {
  bool on = false;
  for (int a = 0; a < d; ++a) {
    const double excess = std::abs(x[a]) - half_width;
    if (excess > kGeomTol) return -1;
    if (excess >= -kGeomTol) on = true;
  }
  return on ? 0 : 1;
}

}  // namespace

ElementMaterial element_material(const MaterialSpec& spec,
                                 std::span<const std::array<double, 3>> vertices) {
  const int d = spec.dim();
  std::array<double, 3> centroid{0.0, 0.0, 0.0};
  for (const auto& v : vertices)
    for (int a = 0; a < d; ++a) centroid[a] += v[a] / static_cast<double>(vertices.size());
  const std::span<const double> cspan(centroid.data(), d);

  ElementMaterial out;
  // Zero contrast leaves a globally constant coefficient; no interface to
  // resolve.
  if (spec.contrast() == 0.0 && spec.geometry() != Geometry::Voxel) {
    out.tensor = spec.base();
    return out;
  }
  switch (spec.geometry()) {
    case Geometry::Square: {
      bool any_in = false, any_out = false;
      for (const auto& v : vertices) {
        const int side = box_side(std::span<const double>(v.data(), d), d, kSquareHalfWidth);
        any_in |= side > 0;
        any_out |= side < 0;
      }
      if (any_in && any_out)
        throw NonConformingMeshError("element_material: element crosses the square interface");
      const int cside = box_side(cspan, d, kSquareHalfWidth);
      const double f = cside >= 0 ? 1.0 : 0.0;  // boundary contact counts as inclusion
      out.tensor = spec.base().plus_scaled_identity(spec.contrast() * f);
      return out;
    }
    case Geometry::Pyramid: {
      // The profile is a polynomial on each orthant; elements may not cross
      // the axis planes where |x_a| kinks.
      for (int a = 0; a < d; ++a) {
        bool neg = false, pos = false;
        for (const auto& v : vertices) {
          neg |= v[a] < -kGeomTol;
          pos |= v[a] > kGeomTol;
        }
        if (neg && pos)
          throw NonConformingMeshError("element_material: element crosses a pyramid kink plane");
      }
      out.constant = false;
      return out;
    }
    case Geometry::Circle: {
      const std::array<double, 3> origin{0.0, 0.0, 0.0};
      const double dist =
          point_simplex_distance(std::span<const double>(origin.data(), d), vertices, d);
      // Outer assignment: any element touching the closed disk is inclusion.
      const double f = dist <= spec.radius() ? 1.0 : 0.0;
      out.tensor = spec.base().plus_scaled_identity(spec.contrast() * f);
      return out;
    }
    case Geometry::Voxel: {
      const GridShape& res = spec.voxel_image()->resolution;
      for (int a = 0; a < d; ++a) {
        const int r = res.extent(a);
        const int j = std::clamp(static_cast<int>(std::floor((centroid[a] + 0.5) * r)), 0, r - 1);
        const double lo = -0.5 + static_cast<double>(j) / r;
        const double hi = lo + 1.0 / r;
        for (const auto& v : vertices) {
          if (v[a] < lo - kGeomTol || v[a] > hi + kGeomTol)
            throw NonConformingMeshError("element_material: element spans several voxels");
        }
      }
      out.tensor = SymMat::zero(d).plus_scaled_identity(spec.shape_value(cspan));
      return out;
    }
  }
  throw std::logic_error("element_material: unsupported geometry");
}

}  // namespace homog
