#pragma once

#include <array>
#include <complex>
#include <initializer_list>
#include <span>
#include <vector>

#include "homog/fft.hpp"

namespace homog {

/**
 * Regular periodic grid on the unit cell (-1/2, 1/2)^d, d in {2, 3}.
 *
 * Grid points and frequencies share the centered index set
 * { k : |k_a| <= (N_a - 1)/2 } for odd N_a; point k sits at k_a / N_a.
 * Storage follows natural FFT order, so storage index i along an axis of
 * extent N maps to the centered index wrap(i) = i <= N/2 ? i : i - N.
 * With odd extents this covers the centered set exactly, with no Nyquist
 * index to special-case; the centered DFT then coincides with the plain
 * DFT of the stored array.
 */
class GridShape {
 public:
  GridShape() = default;
  GridShape(std::initializer_list<int> dims);
  explicit GridShape(std::span<const int> dims);

  int dim() const { return d_; }
  int extent(int axis) const { return dims_[axis]; }
  std::span<const int> dims() const { return {dims_.data(), static_cast<std::size_t>(d_)}; }
  long cell_count() const;
  bool all_odd() const;

  bool operator==(const GridShape& other) const;

  int wrap(int axis, int storage_index) const {
    return storage_index <= dims_[axis] / 2 ? storage_index : storage_index - dims_[axis];
  }
  int storage(int axis, int centered) const {
    return centered >= 0 ? centered : centered + dims_[axis];
  }
  double coord(int axis, int storage_index) const {
    return static_cast<double>(wrap(axis, storage_index)) / dims_[axis];
  }

  // Grid with extents 2 N_a - 1; products of two polynomials sampled on this
  // grid integrate exactly.
  GridShape refined_double() const;

 private:
  std::array<int, 3> dims_{1, 1, 1};
  int d_ = 0;
};

// Centered frequency multi-index. Membership in the index set of a shape is
// decidable from the shape alone.
struct FreqIndex {
  std::array<int, 3> k{0, 0, 0};
  int d = 0;

  static FreqIndex of(std::initializer_list<int> comps);
  bool is_zero() const;
};

bool contains(const GridShape& shape, const FreqIndex& k);

// Walks all storage cells of a shape; fn receives the storage multi-index
// and the linear cell index.
template <typename Fn>
void for_each_cell(const GridShape& shape, Fn&& fn) {
  std::array<int, 3> idx{0, 0, 0};
  const int d = shape.dim();
  long cell = 0;
  const long total = shape.cell_count();
  while (cell < total) {
    fn(std::span<const int>(idx.data(), d), cell);
    ++cell;
    for (int a = 0; a < d; ++a) {
      if (++idx[a] < shape.extent(a)) break;
      idx[a] = 0;
    }
  }
}

/**
 * Real vector field sampled on a periodic grid. The sample at grid point k
 * equals the coefficient of the fundamental interpolation polynomial for
 * that point. Storage is component-major: component c occupies a contiguous
 * scalar grid.
 */
class GridField {
 public:
  GridField() = default;
  GridField(GridShape shape, int components);
  static GridField constant(GridShape shape, std::span<const double> value);

  const GridShape& shape() const { return shape_; }
  int components() const { return components_; }
  long cells() const { return shape_.cell_count(); }

  double* component(int c) { return data_.data() + static_cast<long>(c) * cells_; }
  const double* component(int c) const { return data_.data() + static_cast<long>(c) * cells_; }
  double& at(int c, long cell) { return data_[static_cast<long>(c) * cells_ + cell]; }
  double at(int c, long cell) const { return data_[static_cast<long>(c) * cells_ + cell]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  double max_abs() const;

 private:
  GridShape shape_;
  int components_ = 0;
  long cells_ = 0;
  std::vector<double> data_;
};

// Complex coefficient set indexed by the centered frequency set, same
// storage conventions as GridField.
class FourierField {
 public:
  FourierField() = default;
  FourierField(GridShape shape, int components);

  const GridShape& shape() const { return shape_; }
  int components() const { return components_; }
  long cells() const { return shape_.cell_count(); }

  std::complex<double>* component(int c) { return data_.data() + static_cast<long>(c) * cells_; }
  const std::complex<double>* component(int c) const {
    return data_.data() + static_cast<long>(c) * cells_;
  }
  std::complex<double>& at(int c, long cell) { return data_[static_cast<long>(c) * cells_ + cell]; }
  std::complex<double> at(int c, long cell) const {
    return data_[static_cast<long>(c) * cells_ + cell];
  }

  std::vector<std::complex<double>>& data() { return data_; }
  const std::vector<std::complex<double>>& data() const { return data_; }

 private:
  GridShape shape_;
  int components_ = 0;
  long cells_ = 0;
  std::vector<std::complex<double>> data_;
};

// Symmetric d x d matrix per grid point, stored as d^2 component-major
// scalar grids with entry (a, b) at block a*d + b.
class TensorGridField {
 public:
  TensorGridField() = default;
  TensorGridField(GridShape shape, int d);

  const GridShape& shape() const { return shape_; }
  int tensor_dim() const { return d_; }
  long cells() const { return shape_.cell_count(); }

  double& at(int a, int b, long cell) { return data_[block(a, b) * cells_ + cell]; }
  double at(int a, int b, long cell) const { return data_[block(a, b) * cells_ + cell]; }
  const double* entry(int a, int b) const { return data_.data() + block(a, b) * cells_; }
  // Writes both (a, b) and (b, a).
  void set_sym(int a, int b, long cell, double value) {
    at(a, b, cell) = value;
    at(b, a, cell) = value;
  }

  double max_symmetry_defect() const;

 private:
  long block(int a, int b) const { return static_cast<long>(a) * d_ + b; }
  GridShape shape_;
  int d_ = 0;
  long cells_ = 0;
  std::vector<double> data_;
};

// Forward DFT: coeff(k) = (1/|N|) sum_m w^(-k m) f(x_m). Inverse composed
// with forward is the identity to machine-level accuracy.
FourierField dft_forward(const GridField& f);

// Inverse DFT: f(x_m) = sum_k w^(m k) coeff(k). The input must be
// Hermitian-symmetric (it represents a real field); violations throw
// SymmetryError.
GridField dft_inverse(const FourierField& coeffs);

// Inverse without the symmetry check, for hot paths whose inputs are
// Hermitian by construction (e.g. projected outputs of dft_forward).
GridField dft_inverse_unchecked(const FourierField& coeffs);

// Mean-of-products inner product a . b = sum a^k_c b^k_c / |N|; it equals
// the L2 inner product of the trigonometric polynomials the samples
// represent.
double grid_inner(const GridField& a, const GridField& b);

// Per-point matrix-vector product (A v)(x) = A(x) v(x).
GridField tensor_apply(const TensorGridField& a, const GridField& v);

// Largest per-component mean magnitude, used by zero-mean assertions.
double max_component_mean(const GridField& f);

}  // namespace homog
