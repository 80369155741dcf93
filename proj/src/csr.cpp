#include "homog/csr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace homog {

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (static_cast<std::int64_t>(x.size()) != n || static_cast<std::int64_t>(y.size()) != n)
    throw std::invalid_argument("CsrMatrix::multiply: size mismatch");
  for (std::int64_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
    y[i] = s;
  }
}

double CsrMatrix::infinity_norm() const {
  double m = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += std::abs(val[k]);
    m = std::max(m, s);
  }
  return m;
}

double CsrMatrix::symmetry_defect() const {
  double m = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      const std::int64_t j = col[k];
      // Binary search for (j, i).
      const auto begin = col.begin() + row_ptr[j];
      const auto end = col.begin() + row_ptr[j + 1];
      const auto it = std::lower_bound(begin, end, i);
      const double aji = (it != end && *it == i) ? val[it - col.begin()] : 0.0;
      m = std::max(m, std::abs(val[k] - aji));
    }
  }
  return m;
}

CsrMatrix csr_from_triplets(std::int64_t n, std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  CsrMatrix m;
  m.n = n;
  m.row_ptr.assign(n + 1, 0);
  for (std::size_t i = 0; i < triplets.size();) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < triplets.size() && triplets[j].row == triplets[i].row &&
           triplets[j].col == triplets[i].col) {
      sum += triplets[j].value;
      ++j;
    }
    m.col.push_back(triplets[i].col);
    m.val.push_back(sum);
    ++m.row_ptr[triplets[i].row + 1];
    i = j;
  }
  for (std::int64_t i = 0; i < n; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
  return m;
}

}  // namespace homog
