#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "homog/csr.hpp"
#include "homog/material.hpp"
#include "homog/mesh.hpp"
#include "homog/solver.hpp"

namespace homog {

/**
 * Continuous piecewise-polynomial space of order p in {1, 2} on a periodic
 * regular simplicial mesh. Degrees of freedom are the Lagrange nodes, which
 * for this mesh family are exactly the points of the refined lattice
 * (p N)^d: vertices at even multi-indices, edge midpoints at the rest. The
 * node at the cell corner is fixed to zero, leaving (p N)^d - 1 unknowns.
 */
class FemSpace {
 public:
  FemSpace(PeriodicMesh mesh, int order);

  const PeriodicMesh& mesh() const { return mesh_; }
  int order() const { return order_; }
  int dim() const { return mesh_.dim(); }
  std::int64_t dof_count() const;  // (p N)^d - 1
  int local_nodes() const;
  // Local vertex pairs carrying the midpoint nodes (order 2 only).
  const std::vector<std::array<int, 2>>& edges() const { return edges_; }

  // Global DOF ids of one element's local nodes; -1 marks the fixed node.
  void element_dofs(std::int64_t e, std::span<std::int64_t> dofs) const;

 private:
  PeriodicMesh mesh_;
  int order_;
  std::vector<std::array<int, 2>> edges_;  // local vertex pairs for p = 2
};

struct AssembledSystem {
  CsrMatrix matrix;
  std::vector<double> rhs;
  double rhs_fixed = 0.0;  // entry of the eliminated node (unreduced b sums to 0)
  double energy_offset = 0.0;  // a(E, E), exactly integrated
};

// Exactly integrated stiffness matrix and right-hand side for the cell
// problem with macroscopic vector `macro`. Throws NonConformingMeshError
// when the mesh does not resolve the material's interfaces.
AssembledSystem assemble(const FemSpace& space, const MaterialSpec& spec,
                         std::span<const double> macro);

// Exact-quadrature evaluation of a(E + grad u, E + grad u); u may be any
// DOF vector, converged or not.
double homogenized_value_fem(const FemSpace& space, const MaterialSpec& spec,
                             std::span<const double> u, std::span<const double> macro);

// CSR memory footprint under symmetric storage:
// nnz u + nnz b + 2 nnz A + rank A.
std::int64_t memory_fem(const CsrMatrix& a);

struct FemSolveResult {
  std::vector<double> solution;
  double homogenized = 0.0;
  IterationTrace trace;
  double ic_shift = 0.0;  // diagonal shift the factorization needed, if any
};

// Assembles and solves the cell problem with (optionally IC(0)
// preconditioned) conjugate gradients from the zero vector.
FemSolveResult solve_fem(const FemSpace& space, const MaterialSpec& spec,
                         std::span<const double> macro, bool precondition,
                         const CgOptions& options = {});

// Solve step alone, for callers that keep the assembled system around.
FemSolveResult solve_assembled(const AssembledSystem& sys, bool precondition,
                               const CgOptions& options = {});

// Plain-text dump (vertex list, cell list, per-DOF values) for external
// visualisation.
void write_solution(const FemSpace& space, std::span<const double> u, const std::string& path);

}  // namespace homog
