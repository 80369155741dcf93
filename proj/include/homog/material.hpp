#pragma once

#include <array>
#include <complex>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homog/grid.hpp"

namespace homog {

// Small fixed-size symmetric matrix used for per-point material tensors.
struct SymMat {
  int d = 0;
  std::array<double, 9> m{};  // row-major d x d

  double operator()(int i, int j) const { return m[static_cast<std::size_t>(i) * d + j]; }
  double& operator()(int i, int j) { return m[static_cast<std::size_t>(i) * d + j]; }

  static SymMat zero(int d) {
    SymMat s;
    s.d = d;
    return s;
  }
  static SymMat identity(int d) {
    SymMat s = zero(d);
    for (int i = 0; i < d; ++i) s(i, i) = 1.0;
    return s;
  }
  SymMat plus_scaled_identity(double alpha) const {
    SymMat s = *this;
    for (int i = 0; i < d; ++i) s(i, i) += alpha;
    return s;
  }
  // Eigenvalues for d <= 3 (closed form for d = 2, bisection-free
  // trigonometric formula for d = 3).
  std::array<double, 3> eigenvalues() const;
};

enum class Geometry { Square, Pyramid, Circle, Voxel };

const char* geometry_label(Geometry g);

// Two-phase voxel image: a scalar conductivity per cell, stored x-fastest.
// Cell j covers the box [-1/2 + j_a/R_a, -1/2 + (j_a+1)/R_a) per axis.
struct VoxelImage {
  GridShape resolution;
  std::vector<double> values;

  double min_value() const;
  double max_value() const;
};

/**
 * Coefficient field A(x) = B + rho * I * f(x) on the periodic unit cell.
 *
 * The built-in analytic geometries use the anisotropic base matrices with
 * eigenvalue sets {1, 2} (2-D) and {1, 2, 3} (3-D) and an inclusion
 * indicator/profile f with values in [0, 1]:
 *
 *   square   f = 1 on { |x_a| < 0.3 for all a }, else 0
 *   pyramid  f = prod_a (1 - 2 |x_a|)
 *   circle   f = 1 on { |x| <= r }, else 0
 *
 * Voxel images map to A(x) = a(x) * I with B = 0, rho = 1 and f the
 * piecewise-constant conductivity, so every geometry exposes exact Fourier
 * coefficients of A through the same interface.
 */
class MaterialSpec {
 public:
  static MaterialSpec square(int d, double rho);
  static MaterialSpec pyramid(int d, double rho);
  static MaterialSpec circle(int d, double rho, double radius);
  static MaterialSpec voxel(VoxelImage image);

  int dim() const { return d_; }
  Geometry geometry() const { return geometry_; }
  double contrast() const { return rho_; }
  double radius() const { return radius_; }
  const SymMat& base() const { return base_; }
  const VoxelImage* voxel_image() const { return voxel_ ? voxel_.get() : nullptr; }

  // Uniform ellipticity interval [c_A, C_A] containing every eigenvalue of
  // A(x): [1, rho + d] for the analytic shapes, [min a, max a] for voxels.
  std::pair<double, double> ellipticity_bounds() const;

  // Pointwise profile value f(x); boundary points take the inclusion value.
  double shape_value(std::span<const double> x) const;

  // Exact Fourier coefficient of the profile,
  //   fhat(k) = int_Y f(x) exp(-2 pi i k . x) dx,
  // in closed form per geometry. Real for the mirror-symmetric analytic
  // shapes; genuinely complex for voxel images.
  std::complex<double> shape_fourier_coeff(const FreqIndex& k) const;

  // Full material tensor coefficient Ahat_{ab}(k).
  std::complex<double> tensor_fourier_coeff(int a, int b, const FreqIndex& k) const;

  // A(x) at a point.
  SymMat tensor_at(std::span<const double> x) const;

 private:
  MaterialSpec() = default;

  int d_ = 0;
  Geometry geometry_ = Geometry::Square;
  double rho_ = 0.0;
  double radius_ = 0.0;
  SymMat base_;
  std::shared_ptr<const VoxelImage> voxel_;
  // Normalised forward DFT of the voxel values, computed once.
  std::shared_ptr<const FourierField> voxel_dft_;
};

// Anisotropic base matrices with eigenvalues {1, 2} and {1, 2, 3}; the
// eigenvalue sets are asserted at construction.
SymMat base_matrix(int d);

// Pointwise samples Atilde(x_k) = B + rho I f(x_k) on the given grid.
// For voxel geometries the grid must equal the image resolution.
TensorGridField sample_on_grid(const MaterialSpec& spec, const GridShape& shape);

// Samples of the Fourier series of A truncated to the centered set of the
// 2N-1 grid, evaluated at the double-grid points. Divided by the cell count
// these are exactly the integrals of A against the double-grid fundamental
// polynomials, so bilinear forms of degree-N polynomials evaluated with
// grid_inner against this field are exact integrals.
TensorGridField exact_double_grid_field(const MaterialSpec& spec, const GridShape& n_grid);

// Material assigned to one mesh element (simplex given by its vertices).
// Constant for square/circle/voxel; the pyramid profile restricts to a
// polynomial per element, evaluated on demand through the spec.
struct ElementMaterial {
  bool constant = true;
  SymMat tensor;  // valid when constant
};

ElementMaterial element_material(const MaterialSpec& spec,
                                 std::span<const std::array<double, 3>> vertices);

// Exact distance from a point to a closed simplex (segment/triangle/tet
// faces handled exactly); used by the circle's outer element assignment.
double point_simplex_distance(std::span<const double> point,
                              std::span<const std::array<double, 3>> vertices, int d);

}  // namespace homog
