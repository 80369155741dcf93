#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace homog {

/**
 * Regular periodic simplicial mesh of the unit cell (-1/2, 1/2)^d with N
 * cells per axis. Every cube (square) is split the same way: two triangles
 * in 2-D, six tetrahedra through the main diagonal in 3-D, so faces of
 * neighbouring cells and of periodic images always match.
 *
 * Vertices live on the integer lattice i in [0, N]^d at coordinates
 * -1/2 + i/N; lattice index N identifies with 0, leaving N^d distinct
 * vertices. Elements are enumerated procedurally as (cell, pattern).
 */
class PeriodicMesh {
 public:
  PeriodicMesh(int d, int n);

  int dim() const { return d_; }
  int cells_per_axis() const { return n_; }
  std::int64_t element_count() const;  // 2 N^2 or 6 N^3
  std::int64_t vertex_count() const;   // N^d

  int simplices_per_cell() const { return d_ == 2 ? 2 : 6; }
  int vertices_per_simplex() const { return d_ + 1; }

  // Unwrapped lattice corners of element e (entries in [0, N]); geometric
  // coordinates are -1/2 + lattice/N.
  void element_lattice(std::int64_t e, std::array<std::array<int, 3>, 4>& corners) const;
  void element_coords(std::int64_t e, std::array<std::array<double, 3>, 4>& coords) const;

  double element_volume() const;  // all elements are congruent

 private:
  int d_;
  int n_;
  // Per pattern, per local vertex, 0/1 offsets from the cell corner.
  std::vector<std::array<std::array<int, 3>, 4>> patterns_;
};

PeriodicMesh build_mesh(int d, int n);

// Quadrature on the reference simplex {x >= 0, sum x <= 1}, exact for
// polynomials up to the requested total degree. Built by mapping a tensor
// Gauss-Legendre rule through the Duffy transform; the per-axis order
// accounts for the transform's polynomial Jacobian.
struct SimplexRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;  // sum to the reference simplex volume 1/d!
};

SimplexRule simplex_rule(int d, int degree);

}  // namespace homog
