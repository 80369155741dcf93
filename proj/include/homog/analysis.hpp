#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homog/material.hpp"
#include "homog/solver.hpp"

namespace homog {

enum class Method { FfthGa, FfthGaNi, FfthGaNiBound, FemP1, FemP2 };

const char* method_label(Method m);  // "ffth-ga", "ffth-gani", ...

// Squared energetic norm of the discretisation error: the excess of an
// upper-bound value over the reference effective coefficient.
double energetic_error(double value, double reference);

// Linear-system footprints in stored scalars.
//   fem        nnz u + nnz b + 2 nnz A + rank A   (symmetric CSR storage)
//   ffth-ga    2 d N^d + d^2 N^d + d^2 (2N-1)^d
//   ffth-gani  (2 d + 2 d^2) N^d
struct CsrStats {
  std::int64_t rank = 0;
  std::int64_t nnz_symmetric = 0;
};
std::int64_t memory_count_ffth(Method m, int d, std::int64_t n);
std::int64_t memory_count_fem(const CsrStats& stats);

// Operation counts of one operator application. The transform term
// 5 d |N| log2 |N| is real-valued; everything else is exact integer
// arithmetic.
//   ffth-ga    d^2 (2N-1)^d + d^2 N^d + 5 d (2N-1)^d log2((2N-1)^d)
//   ffth-gani  2 d^2 N^d + 5 d N^d log2(N^d)
//   fem        2 nnz A (+ 2 nnz L for the triangular sweeps when
//              preconditioned)
double matvec_ops_ffth(Method m, int d, std::int64_t n);
double matvec_ops_fem(const CsrStats& stats, bool preconditioned);

struct FitPoint {
  double n = 0.0;  // discretisation parameter
  double value = 0.0;
};

struct FitResult {
  double a_eff = 0.0;
  double rate = 0.0;      // s in value(N) = a_eff + c N^(-2s)
  double c = 0.0;
  double residual_norm = 0.0;
  int iterations = 0;
  std::vector<double> grids;
  bool warn_nonmonotone = false;   // input values were not strictly decreasing
  bool exactly_determined = false; // three points determine the three parameters
};

// Gauss-Newton with Levenberg damping for value(N) = a_eff + c N^(-2s).
// Needs at least three points (three points are accepted as the
// exactly-determined case and flagged); four or more are recommended.
FitResult fit_reference(std::span<const FitPoint> points);

// Reference-extrapolation policy: fit the finest three points. Coarse grids
// sit outside the asymptotic regime of the single-rate model on desk-scale
// schedules and bias the limit; the tail is plain Richardson extrapolation.
// On exact model data this coincides with the full fit.
FitResult extrapolate_reference(std::span<const FitPoint> points);

// Per-iteration squared algebraic error value_k - converged_value,
// clamped at zero against roundoff.
std::vector<double> algebraic_error_trace(const IterationTrace& trace, double converged_value);

// Pinned reference coefficients for the built-in geometries, obtained by
// fine-schedule extrapolation; returns nothing for other parameter sets.
std::optional<double> reference_value_for(int d, Geometry geometry, double rho);

struct ExperimentReport {
  Method method = Method::FfthGa;
  int d = 0;
  std::int64_t n = 0;
  int order = 0;  // polynomial order (FEM), 0 otherwise
  double rho = 0.0;
  Geometry geometry = Geometry::Square;
  double value = 0.0;
  double reference = 0.0;
  std::string reference_source;  // "pinned", "fit", "min-upper-bound"
  double sq_error = 0.0;
  bool clamped = false;          // negative error within roundoff, clamped to 0
  bool bound_violation = false;  // negative beyond the roundoff band
  std::int64_t size = 0;
  std::int64_t memory = 0;
  double ops = 0.0;
  double kappa = 0.0;  // NaN when not estimated
  std::int64_t iterations = 0;
};

// Fills sq_error (clamping tiny negatives for bound-producing methods) and
// the violation flag.
void finalize_error(ExperimentReport& report);

struct TraceSeries {
  ExperimentReport run;  // the run the series belongs to
  std::vector<double> residuals;
  std::vector<double> values;
  std::vector<double> algebraic_errors;
};

// Writes report.csv, the per-figure views, error_vs_iteration.csv (when
// traces are present) and summary.json into the directory. Outputs are
// byte-stable for identical inputs.
void emit_reports(std::span<const ExperimentReport> reports, std::span<const TraceSeries> traces,
                  const std::string& directory, const std::string& config_hash);

// FNV-1a hash of a canonical config string, hex-encoded.
std::string config_hash(const std::string& canonical_text);

}  // namespace homog
