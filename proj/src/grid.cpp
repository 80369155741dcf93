#include "homog/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "homog/common.hpp"

namespace homog {

GridShape::GridShape(std::initializer_list<int> dims)
    : GridShape(std::span<const int>(dims.begin(), dims.size())) {}

GridShape::GridShape(std::span<const int> dims) {
  if (dims.size() < 1 || dims.size() > 3)
    throw std::invalid_argument("GridShape: dimension must be 1, 2 or 3");
  d_ = static_cast<int>(dims.size());
  for (int a = 0; a < d_; ++a) {
    if (dims[a] < 1) throw std::invalid_argument("GridShape: extents must be positive");
    dims_[a] = dims[a];
  }
}

long GridShape::cell_count() const {
  long n = 1;
  for (int a = 0; a < d_; ++a) n *= dims_[a];
  return n;
}

bool GridShape::all_odd() const {
  for (int a = 0; a < d_; ++a)
    if (dims_[a] % 2 == 0) return false;
  return true;
}

bool GridShape::operator==(const GridShape& other) const {
  if (d_ != other.d_) return false;
  for (int a = 0; a < d_; ++a)
    if (dims_[a] != other.dims_[a]) return false;
  return true;
}

GridShape GridShape::refined_double() const {
  std::array<int, 3> dims;
  for (int a = 0; a < d_; ++a) dims[a] = 2 * dims_[a] - 1;
  return GridShape(std::span<const int>(dims.data(), d_));
}

FreqIndex FreqIndex::of(std::initializer_list<int> comps) {
  FreqIndex f;
  f.d = static_cast<int>(comps.size());
  int a = 0;
  for (int c : comps) f.k[a++] = c;
  return f;
}

bool FreqIndex::is_zero() const {
  for (int a = 0; a < d; ++a)
    if (k[a] != 0) return false;
  return true;
}

bool contains(const GridShape& shape, const FreqIndex& k) {
  if (shape.dim() != k.d) return false;
  for (int a = 0; a < k.d; ++a)
    if (2 * std::abs(k.k[a]) >= shape.extent(a)) return false;
  return true;
}

GridField::GridField(GridShape shape, int components)
    : shape_(shape), components_(components), cells_(shape.cell_count()) {
  data_.assign(static_cast<long>(components_) * cells_, 0.0);
}

GridField GridField::constant(GridShape shape, std::span<const double> value) {
  GridField f(shape, static_cast<int>(value.size()));
  for (int c = 0; c < f.components(); ++c)
    std::fill(f.component(c), f.component(c) + f.cells(), value[c]);
  return f;
}

double GridField::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

FourierField::FourierField(GridShape shape, int components)
    : shape_(shape), components_(components), cells_(shape.cell_count()) {
  data_.assign(static_cast<long>(components_) * cells_, std::complex<double>{0.0, 0.0});
}

TensorGridField::TensorGridField(GridShape shape, int d)
    : shape_(shape), d_(d), cells_(shape.cell_count()) {
  data_.assign(static_cast<long>(d_) * d_ * cells_, 0.0);
}

double TensorGridField::max_symmetry_defect() const {
  double m = 0.0;
  for (int a = 0; a < d_; ++a)
    for (int b = a + 1; b < d_; ++b)
      for (long cell = 0; cell < cells_; ++cell)
        m = std::max(m, std::abs(at(a, b, cell) - at(b, a, cell)));
  return m;
}

FourierField dft_forward(const GridField& f) {
  FourierField out(f.shape(), f.components());
  const long cells = f.cells();
  const double scale = 1.0 / static_cast<double>(cells);
  for (int c = 0; c < f.components(); ++c) {
    std::complex<double>* dst = out.component(c);
    const double* src = f.component(c);
    for (long i = 0; i < cells; ++i) dst[i] = src[i];
    fft::transform_all_axes(dst, f.shape().dims(), -1);
    for (long i = 0; i < cells; ++i) dst[i] *= scale;
  }
  return out;
}

namespace {

// Linear index of the mirrored storage index (-k per axis).
long mirror_cell(const GridShape& shape, long cell) {
  long out = 0;
  long stride = 1;
  long rem = cell;
  for (int a = 0; a < shape.dim(); ++a) {
    const int n = shape.extent(a);
    const int i = static_cast<int>(rem % n);
    rem /= n;
    const int mi = i == 0 ? 0 : n - i;
    out += stride * mi;
    stride *= n;
  }
  return out;
}

void check_hermitian(const FourierField& coeffs) {
  const long cells = coeffs.cells();
  double max_abs = 0.0;
  for (const auto& z : coeffs.data()) max_abs = std::max(max_abs, std::abs(z));
  const double tol = 1e-10 * std::max(max_abs, 1e-300);
  for (int c = 0; c < coeffs.components(); ++c) {
    const std::complex<double>* z = coeffs.component(c);
    for (long i = 0; i < cells; ++i) {
      const long m = mirror_cell(coeffs.shape(), i);
      if (std::abs(z[i] - std::conj(z[m])) > tol)
        throw SymmetryError("dft_inverse: coefficients are not Hermitian-symmetric");
    }
  }
}

}  // namespace

GridField dft_inverse(const FourierField& coeffs) {
  check_hermitian(coeffs);
  return dft_inverse_unchecked(coeffs);
}

GridField dft_inverse_unchecked(const FourierField& coeffs) {
  GridField out(coeffs.shape(), coeffs.components());
  const long cells = coeffs.cells();
  std::vector<std::complex<double>> buf(cells);
  for (int c = 0; c < coeffs.components(); ++c) {
    std::copy(coeffs.component(c), coeffs.component(c) + cells, buf.begin());
    fft::transform_all_axes(buf.data(), coeffs.shape().dims(), +1);
    double* dst = out.component(c);
    for (long i = 0; i < cells; ++i) dst[i] = buf[i].real();
  }
  return out;
}

double grid_inner(const GridField& a, const GridField& b) {
  if (!(a.shape() == b.shape()) || a.components() != b.components())
    throw std::invalid_argument("grid_inner: shape or component mismatch");
  const auto& x = a.data();
  const auto& y = b.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += x[i] * y[i];
  return sum / static_cast<double>(a.cells());
}

GridField tensor_apply(const TensorGridField& a, const GridField& v) {
  if (!(a.shape() == v.shape()) || a.tensor_dim() != v.components())
    throw std::invalid_argument("tensor_apply: shape or component mismatch");
  const int d = a.tensor_dim();
  const long cells = v.cells();
  GridField out(v.shape(), d);
  for (int i = 0; i < d; ++i) {
    double* dst = out.component(i);
    for (int j = 0; j < d; ++j) {
      const double* src = v.component(j);
      const double* mat = a.entry(i, j);
      for (long cell = 0; cell < cells; ++cell) dst[cell] += mat[cell] * src[cell];
    }
  }
  return out;
}

double max_component_mean(const GridField& f) {
  double m = 0.0;
  for (int c = 0; c < f.components(); ++c) {
    double sum = 0.0;
    const double* p = f.component(c);
    for (long i = 0; i < f.cells(); ++i) sum += p[i];
    m = std::max(m, std::abs(sum / static_cast<double>(f.cells())));
  }
  return m;
}

}  // namespace homog
