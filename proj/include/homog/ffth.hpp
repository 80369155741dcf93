#pragma once

#include <atomic>
#include <cstdint>
#include <memory>

#include "homog/grid.hpp"
#include "homog/material.hpp"
#include "homog/solver.hpp"

namespace homog {

/**
 * Spectral projection onto zero-mean curl-free polynomials.
 *
 * In Fourier space the block at frequency k is the rank-1 projector
 * (k (x) k) / (k . k) for k in the active centered set minus zero, and the
 * zero block elsewhere (at k = 0 and, on a double grid, at the padding
 * frequencies outside the active set).
 */
class Projection {
 public:
  // Single-grid projection: active set == storage grid.
  explicit Projection(GridShape shape) : shape_(shape), active_(shape) {}
  // Double-grid projection: storage on `shape`, active frequencies limited
  // to the centered set of `active`.
  Projection(GridShape shape, GridShape active) : shape_(shape), active_(active) {}

  const GridShape& shape() const { return shape_; }
  const GridShape& active() const { return active_; }

  GridField apply(const GridField& v) const;
  // Same projection acting on an already-transformed coefficient set.
  void apply_fourier(FourierField& coeffs) const;

 private:
  GridShape shape_;
  GridShape active_;
};

GridField project(const Projection& p, const GridField& v);

enum class FfthVariant { Ga, GaNi };

/**
 * The projected material operator e -> G(A e) for one discretisation.
 *
 * Ga places the exactly integrated material on the double grid 2N-1 and the
 * unknown lives there as the samples of a degree-N polynomial; GaNi samples
 * the material at the N grid points directly. Both operators are symmetric
 * positive definite on the compatible subspace (zero-mean curl-free fields)
 * with spectrum inside the material's ellipticity interval.
 */
class FfthOperator {
 public:
  static FfthOperator make(const MaterialSpec& spec, const GridShape& n_grid, FfthVariant variant);

  FfthVariant variant() const { return variant_; }
  const GridShape& grid() const { return grid_; }          // storage grid
  const GridShape& base_grid() const { return n_grid_; }   // discretisation parameter N
  const TensorGridField& material() const { return material_; }
  const Projection& projection() const { return projection_; }
  int dim() const { return d_; }

  GridField apply(const GridField& e) const;  // G(A e)
  GridField rhs(std::span<const double> macro) const;    // -G(A E)
  double energy_offset(std::span<const double> macro) const;  // a(E, E) under this quadrature

  std::int64_t matvec_count() const { return matvecs_.load(); }
  std::int64_t fft_pair_count() const { return fft_pairs_.load(); }

  LinearOperator linear_operator() const;

 private:
  FfthOperator(FfthVariant variant, GridShape n_grid, GridShape grid, TensorGridField material);

  // F^{-1} Ghat F with pairs of real components packed into single complex
  // transforms; the projector loop unpacks through the mirror table.
  GridField apply_projected(const GridField& ae) const;

  FfthVariant variant_;
  GridShape n_grid_;
  GridShape grid_;
  int d_;
  TensorGridField material_;
  Projection projection_;
  std::vector<long> mirror_;  // linear index of -k per storage cell
  mutable std::atomic<std::int64_t> matvecs_{0};
  mutable std::atomic<std::int64_t> fft_pairs_{0};
};

struct FfthSolveResult {
  GridField minimiser;        // e_N on the operator's storage grid
  double homogenized = 0.0;   // a(E + e, E + e) under the operator's quadrature
  IterationTrace trace;
};

// Assembles the operator for the variant and runs CG from the zero field.
// The trace records residual norms and per-iteration homogenised values.
FfthSolveResult solve_ffth(const MaterialSpec& spec, const GridShape& n_grid, FfthVariant variant,
                           std::span<const double> macro, const CgOptions& options = {});

// Exactly integrated energy a(E + e, E + e) for a degree-N polynomial given
// by double-grid samples; an upper bound on the effective coefficient.
double homogenized_value_ga(const MaterialSpec& spec, const GridShape& n_grid, const GridField& e,
                            std::span<const double> macro);

// Re-expands a single-grid minimiser to the double grid by zero-padding in
// Fourier space (an exact polynomial identity, no interpolation error).
GridField expand_to_double_grid(const GridField& e);

// A-posteriori bound from a GaNi minimiser: the exactly integrated energy of
// the conforming polynomial it represents. Always >= the Ga minimum at the
// same N.
double gani_posteriori_bound(const MaterialSpec& spec, const GridShape& n_grid,
                             const GridField& e_gani, std::span<const double> macro);

// Extreme Ritz estimates of the operator restricted to the compatible
// subspace: the start vector is projected and every Lanczos vector is
// re-projected to keep the huge null space out of the recurrence.
LanczosResult ffth_condition_estimate(const FfthOperator& op, int iterations, std::uint64_t seed);

// Size accounting for one discretisation parameter N per axis.
std::int64_t system_size(int d, std::int64_t n, FfthVariant variant);     // reduced count d N^d
std::int64_t double_grid_system_size(int d, std::int64_t n);              // d (2N-1)^d
std::int64_t independent_dofs(int d, std::int64_t n);                     // N^d - 1

}  // namespace homog
