#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "homog/csr.hpp"

namespace homog {

// Abstract symmetric positive (semi)definite operator. The inner product is
// the one the operator is self-adjoint under; it defaults to the Euclidean
// dot product when left empty.
struct LinearOperator {
  std::int64_t dim = 0;
  std::function<void(std::span<const double>, std::span<double>)> apply;
  std::function<double(std::span<const double>, std::span<const double>)> inner;

  double inner_or_dot(std::span<const double> a, std::span<const double> b) const;
};

LinearOperator csr_operator(const CsrMatrix& a);

struct IterationSample {
  double residual_norm = 0.0;
  // Energy value a(E+x_k, E+x_k) when the solve carries an energy offset;
  // NaN otherwise. Nonincreasing along CG.
  double energy_value = std::numeric_limits<double>::quiet_NaN();
  std::int64_t matvec_count = 0;
  double seconds = 0.0;
};

struct IterationTrace {
  std::vector<IterationSample> samples;  // samples[k] describes iterate k
  bool converged = false;

  std::int64_t iterations() const {
    return static_cast<std::int64_t>(samples.size()) - 1;
  }
};

// Non-convergence or breakdown; carries the trace accumulated so far.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, IterationTrace trace)
      : std::runtime_error(what), trace(std::move(trace)) {}
  IterationTrace trace;
};

// Zero-fill incomplete Cholesky factor with the sparsity pattern of the
// lower triangle of A. M = L L^T.
class IcPreconditioner {
 public:
  void solve(std::span<const double> r, std::span<double> z) const;
  void multiply(std::span<const double> x, std::span<double> y) const;  // y = L L^T x
  const CsrMatrix& lower() const { return lower_; }
  std::int64_t nnz() const { return lower_.nnz(); }
  double applied_shift() const { return shift_; }

  // Assembles the transpose for the backward sweep; used by the factorizers.
  static IcPreconditioner from_factor(CsrMatrix lower, double shift);

 private:
  CsrMatrix lower_;   // row-sorted, diagonal last in each row
  CsrMatrix upper_;   // transpose, for the backward sweep
  double shift_ = 0.0;
};

// Throws FactorizationError on a nonpositive pivot.
IcPreconditioner ic0_factor(const CsrMatrix& a);

// Retries with growing diagonal shifts until the factorization succeeds;
// the shift used is reported.
IcPreconditioner ic0_factor_shifted(const CsrMatrix& a, double* shift_out = nullptr);

struct CgOptions {
  double rtol = 1e-10;
  std::int64_t max_iterations = 0;  // 0: 10 * dim
  const IcPreconditioner* preconditioner = nullptr;
  // When set, the trace records energy values offset - <b,x> - <r,x>; for
  // systems derived from energy minimisation with offset a(E,E) this equals
  // a(E+x, E+x).
  std::optional<double> energy_offset;
  // Test hook: collects a copy of every iterate (including x_0).
  std::vector<std::vector<double>>* iterate_log = nullptr;
};

struct CgResult {
  std::vector<double> x;
  IterationTrace trace;
};

// Preconditioned conjugate gradients with the Hestenes-Stiefel recurrence,
// run in the operator's inner product. Stops when ||r|| <= rtol ||b||.
// Throws SolverError when the iteration cap is hit and on indefiniteness
// breakdown (p.Ap <= 0).
CgResult cg(const LinearOperator& op, std::span<const double> b, std::span<const double> x0,
            const CgOptions& options = {});

struct LanczosResult {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  int iterations = 0;
  // True when the run stopped on an exactly invariant subspace rather than
  // on the iteration budget; budget-limited extremes are inner estimates.
  bool exhausted_subspace = false;

  double condition_estimate() const { return lambda_max / lambda_min; }
};

// Extreme Ritz values with full reorthogonalization. The start vector is
// seeded deterministically unless one is supplied (pass a start inside the
// operator's invariant subspace to estimate the spectrum there). When the
// operator has a large null space complementing that subspace, `purify`
// must re-project candidate basis vectors: the three-term recurrence feeds
// null-space roundoff back through -alpha v_j, which otherwise grows.
LanczosResult lanczos_extremes(const LinearOperator& op, int iterations, std::uint64_t seed,
                               std::span<const double> start = {},
                               const std::function<void(std::span<double>)>& purify = {});

// Energy-error envelope 4 ((sqrt(k)-1)/(sqrt(k)+1))^(2k_iter) * e0.
double cg_bound(double kappa, std::int64_t iteration, double initial_energy_error);

// Dense symmetric eigenvalues (cyclic Jacobi), ascending. Row-major input.
std::vector<double> dense_symmetric_eigenvalues(std::vector<double> a, int n);

}  // namespace homog
