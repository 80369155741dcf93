#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace homog {

// Symmetric sparse matrix in compressed-sparse-row form. Both triangles are
// stored for the matvec; accounting that assumes symmetric storage uses
// nnz_symmetric().
struct CsrMatrix {
  std::int64_t n = 0;
  std::vector<std::int64_t> row_ptr;  // n + 1 offsets
  std::vector<std::int64_t> col;      // ascending within each row
  std::vector<double> val;

  std::int64_t nnz() const { return static_cast<std::int64_t>(col.size()); }
  std::int64_t nnz_symmetric() const { return (nnz() + n) / 2; }

  void multiply(std::span<const double> x, std::span<double> y) const;
  double infinity_norm() const;
  // Largest |A_ij - A_ji|; zero for exactly symmetric assembly.
  double symmetry_defect() const;
};

struct Triplet {
  std::int64_t row, col;
  double value;
};

// Sums duplicate entries; column indices come out sorted.
CsrMatrix csr_from_triplets(std::int64_t n, std::vector<Triplet> triplets);

}  // namespace homog
