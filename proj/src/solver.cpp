#include "homog/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "homog/common.hpp"

namespace homog {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double LinearOperator::inner_or_dot(std::span<const double> a, std::span<const double> b) const {
  return inner ? inner(a, b) : dot(a, b);
}

LinearOperator csr_operator(const CsrMatrix& a) {
  LinearOperator op;
  op.dim = a.n;
  op.apply = [&a](std::span<const double> x, std::span<double> y) { a.multiply(x, y); };
  return op;
}

void IcPreconditioner::solve(std::span<const double> r, std::span<double> z) const {
  const std::int64_t n = lower_.n;
  std::vector<double> y(n);
  // Forward sweep L y = r; the diagonal is the last entry of each row.
  for (std::int64_t i = 0; i < n; ++i) {
    double s = r[i];
    const std::int64_t end = lower_.row_ptr[i + 1] - 1;
    for (std::int64_t k = lower_.row_ptr[i]; k < end; ++k) s -= lower_.val[k] * y[lower_.col[k]];
    y[i] = s / lower_.val[end];
  }
  // Backward sweep L^T z = y; upper_ holds L^T with the diagonal first.
  for (std::int64_t i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (std::int64_t k = upper_.row_ptr[i] + 1; k < upper_.row_ptr[i + 1]; ++k)
      s -= upper_.val[k] * z[upper_.col[k]];
    z[i] = s / upper_.val[upper_.row_ptr[i]];
  }
}

void IcPreconditioner::multiply(std::span<const double> x, std::span<double> y) const {
  const std::int64_t n = lower_.n;
  // t = L^T x, then y = L t.
  std::vector<double> t(n, 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::int64_t k = upper_.row_ptr[i]; k < upper_.row_ptr[i + 1]; ++k)
      s += upper_.val[k] * x[upper_.col[k]];
    t[i] = s;
  }
  for (std::int64_t i = 0; i < n; ++i) {
    double s = 0.0;
    const std::int64_t end = lower_.row_ptr[i + 1];
    for (std::int64_t k = lower_.row_ptr[i]; k < end; ++k) s += lower_.val[k] * t[lower_.col[k]];
    y[i] = s;
  }
}

namespace {

CsrMatrix lower_triangle(const CsrMatrix& a) {
  CsrMatrix l;
  l.n = a.n;
  l.row_ptr.assign(a.n + 1, 0);
  for (std::int64_t i = 0; i < a.n; ++i)
    for (std::int64_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
      if (a.col[k] <= i) ++l.row_ptr[i + 1];
  for (std::int64_t i = 0; i < a.n; ++i) l.row_ptr[i + 1] += l.row_ptr[i];
  l.col.resize(l.row_ptr[a.n]);
  l.val.resize(l.row_ptr[a.n]);
  std::vector<std::int64_t> cursor(l.row_ptr.begin(), l.row_ptr.end() - 1);
  for (std::int64_t i = 0; i < a.n; ++i) {
    for (std::int64_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      if (a.col[k] <= i) {
        l.col[cursor[i]] = a.col[k];
        l.val[cursor[i]] = a.val[k];
        ++cursor[i];
      }
    }
  }
  return l;
}

CsrMatrix transpose(const CsrMatrix& a) {
  CsrMatrix t;
  t.n = a.n;
  t.row_ptr.assign(a.n + 1, 0);
  for (std::int64_t k = 0; k < a.nnz(); ++k) ++t.row_ptr[a.col[k] + 1];
  for (std::int64_t i = 0; i < a.n; ++i) t.row_ptr[i + 1] += t.row_ptr[i];
  t.col.resize(a.nnz());
  t.val.resize(a.nnz());
  std::vector<std::int64_t> cursor(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (std::int64_t i = 0; i < a.n; ++i) {
    for (std::int64_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      const std::int64_t j = a.col[k];
      t.col[cursor[j]] = i;
      t.val[cursor[j]] = a.val[k];
      ++cursor[j];
    }
  }
  return t;
}

IcPreconditioner ic0_with_shift(const CsrMatrix& a, double shift) {
  CsrMatrix l = lower_triangle(a);
  const std::int64_t n = l.n;
  if (shift != 0.0) {
    for (std::int64_t i = 0; i < n; ++i) l.val[l.row_ptr[i + 1] - 1] += shift;
  }
  // Row-by-row factorization on the fixed pattern. Rows are sorted with the
  // diagonal last, so L_jk prefixes are final when row i needs them.
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t row_end = l.row_ptr[i + 1] - 1;  // diagonal position
    for (std::int64_t k = l.row_ptr[i]; k < row_end; ++k) {
      const std::int64_t j = l.col[k];
      // Sparse dot of rows i and j over columns < j.
      double s = l.val[k];
      std::int64_t pi = l.row_ptr[i];
      std::int64_t pj = l.row_ptr[j];
      const std::int64_t ji_end = k;
      const std::int64_t jj_end = l.row_ptr[j + 1] - 1;
      while (pi < ji_end && pj < jj_end) {
        if (l.col[pi] == l.col[pj]) {
          s -= l.val[pi] * l.val[pj];
          ++pi;
          ++pj;
        } else if (l.col[pi] < l.col[pj]) {
          ++pi;
        } else {
          ++pj;
        }
      }
      l.val[k] = s / l.val[jj_end];
    }
    double diag = l.val[row_end];
    for (std::int64_t k = l.row_ptr[i]; k < row_end; ++k) diag -= l.val[k] * l.val[k];
    if (!(diag > 0.0))
      throw FactorizationError("ic0_factor: nonpositive pivot at row " + std::to_string(i), i);
    l.val[row_end] = std::sqrt(diag);
  }
  return IcPreconditioner::from_factor(std::move(l), shift);
}

}  // namespace

IcPreconditioner IcPreconditioner::from_factor(CsrMatrix lower, double shift) {
  IcPreconditioner m;
  m.lower_ = std::move(lower);
  m.upper_ = transpose(m.lower_);
  m.shift_ = shift;
  return m;
}

IcPreconditioner ic0_factor(const CsrMatrix& a) { return ic0_with_shift(a, 0.0); }

IcPreconditioner ic0_factor_shifted(const CsrMatrix& a, double* shift_out) {
  double scale = 0.0;
  for (std::int64_t i = 0; i < a.n; ++i)
    for (std::int64_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
      if (a.col[k] == i) scale = std::max(scale, std::abs(a.val[k]));
  double shift = 0.0;
  for (int attempt = 0; attempt < 30; ++attempt) {
    try {
      IcPreconditioner m = ic0_with_shift(a, shift);
      if (shift_out) *shift_out = shift;
      return m;
    } catch (const FactorizationError&) {
      shift = shift == 0.0 ? 1e-8 * scale : 4.0 * shift;
    }
  }
  throw FactorizationError("ic0_factor_shifted: no usable shift found", -1);
}

CgResult cg(const LinearOperator& op, std::span<const double> b, std::span<const double> x0,
            const CgOptions& options) {
  const std::int64_t n = op.dim;
  if (static_cast<std::int64_t>(b.size()) != n || static_cast<std::int64_t>(x0.size()) != n)
    throw std::invalid_argument("cg: size mismatch");
  const std::int64_t maxit = options.max_iterations > 0 ? options.max_iterations : 10 * n;

  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> r(n), z(n), p(n), ap(n);

  const auto t_start = std::chrono::steady_clock::now();
  std::int64_t matvecs = 0;

  op.apply(x, r);
  ++matvecs;
  for (std::int64_t i = 0; i < n; ++i) r[i] = b[i] - r[i];

  const double b_norm = std::sqrt(op.inner_or_dot(b, b));
  const double stop = options.rtol * b_norm;

  CgResult result;
  auto record = [&](double resid) {
    IterationSample s;
    s.residual_norm = resid;
    s.matvec_count = matvecs;
    s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    if (options.energy_offset)
      s.energy_value = *options.energy_offset - op.inner_or_dot(b, x) - op.inner_or_dot(r, x);
    result.trace.samples.push_back(s);
    if (options.iterate_log) options.iterate_log->push_back(x);
  };

  double resid = std::sqrt(op.inner_or_dot(r, r));
  record(resid);
  if (resid <= stop) {
    result.trace.converged = true;
    result.x = std::move(x);
    return result;
  }

  if (options.preconditioner)
    options.preconditioner->solve(r, z);
  else
    z = r;
  p = z;
  double rho = op.inner_or_dot(r, z);

  for (std::int64_t k = 1; k <= maxit; ++k) {
    op.apply(p, ap);
    ++matvecs;
    const double p_ap = op.inner_or_dot(p, ap);
    if (!(p_ap > 0.0)) {
      record(resid);
      throw SolverError("cg: operator not positive definite on the search space",
                        std::move(result.trace));
    }
    const double alpha = rho / p_ap;
    for (std::int64_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    resid = std::sqrt(op.inner_or_dot(r, r));
    record(resid);
    if (resid <= stop) {
      result.trace.converged = true;
      result.x = std::move(x);
      return result;
    }
    if (options.preconditioner)
      options.preconditioner->solve(r, z);
    else
      z = r;
    const double rho_next = op.inner_or_dot(r, z);
    const double beta = rho_next / rho;
    rho = rho_next;
    for (std::int64_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw SolverError("cg: no convergence within the iteration cap", std::move(result.trace));
}

LanczosResult lanczos_extremes(const LinearOperator& op, int iterations, std::uint64_t seed,
                               std::span<const double> start,
                               const std::function<void(std::span<double>)>& purify) {
  const std::int64_t n = op.dim;
  if (iterations < 2) throw std::invalid_argument("lanczos_extremes: need at least 2 iterations");
  iterations = static_cast<int>(std::min<std::int64_t>(iterations, n));

  std::vector<double> v(n);
  if (!start.empty()) {
    std::copy(start.begin(), start.end(), v.begin());
  } else {
    SplitMix64 rng(seed);
    for (auto& x : v) x = rng.symmetric();
  }
  if (purify) purify(v);
  double norm = std::sqrt(op.inner_or_dot(v, v));
  for (auto& x : v) x /= norm;

  std::vector<std::vector<double>> basis;
  basis.push_back(v);
  std::vector<double> alpha, beta;
  std::vector<double> w(n);

  LanczosResult result;
  for (int j = 0; j < iterations; ++j) {
    op.apply(basis[j], w);
    const double a = op.inner_or_dot(w, basis[j]);
    alpha.push_back(a);
    for (std::int64_t i = 0; i < n; ++i) w[i] -= a * basis[j][i];
    if (j > 0)
      for (std::int64_t i = 0; i < n; ++i) w[i] -= beta[j - 1] * basis[j - 1][i];
    if (purify) purify(w);
    // Full reorthogonalization, applied twice.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis) {
        const double c = op.inner_or_dot(w, q);
        for (std::int64_t i = 0; i < n; ++i) w[i] -= c * q[i];
      }
    }
    const double b = std::sqrt(op.inner_or_dot(w, w));
    result.iterations = j + 1;
    if (j + 1 == iterations) break;
    if (b < 1e-12 * std::max(1.0, std::abs(a))) {
      result.exhausted_subspace = true;
      break;
    }
    beta.push_back(b);
    for (std::int64_t i = 0; i < n; ++i) w[i] /= b;
    basis.push_back(w);
  }

  // Ritz values of the tridiagonal section.
  const int m = static_cast<int>(alpha.size());
  std::vector<double> t(static_cast<std::size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) {
    t[static_cast<std::size_t>(i) * m + i] = alpha[i];
    if (i + 1 < m) {
      t[static_cast<std::size_t>(i) * m + i + 1] = beta[i];
      t[static_cast<std::size_t>(i + 1) * m + i] = beta[i];
    }
  }
  auto eig = dense_symmetric_eigenvalues(std::move(t), m);
  result.lambda_min = eig.front();
  result.lambda_max = eig.back();
  return result;
}

double cg_bound(double kappa, std::int64_t iteration, double initial_energy_error) {
  const double q = (std::sqrt(kappa) - 1.0) / (std::sqrt(kappa) + 1.0);
  return 4.0 * std::pow(q, 2.0 * static_cast<double>(iteration)) * initial_energy_error;
}

std::vector<double> dense_symmetric_eigenvalues(std::vector<double> a, int n) {
  auto idx = [n](int i, int j) { return static_cast<std::size_t>(i) * n + j; };
  double scale = 0.0;
  for (double x : a) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return std::vector<double>(n, 0.0);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off = std::max(off, std::abs(a[idx(i, j)]));
    if (off < 1e-15 * scale) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a[idx(p, q)];
        if (std::abs(apq) < 1e-18 * scale) continue;
        const double app = a[idx(p, p)], aqq = a[idx(q, q)];
        const double theta = 0.5 * (aqq - app) / apq;
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[idx(k, p)], akq = a[idx(k, q)];
          a[idx(k, p)] = c * akp - s * akq;
          a[idx(k, q)] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[idx(p, k)], aqk = a[idx(q, k)];
          a[idx(p, k)] = c * apk - s * aqk;
          a[idx(q, k)] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (int i = 0; i < n; ++i) eig[i] = a[idx(i, i)];
  std::sort(eig.begin(), eig.end());
  return eig;
}

}  // namespace homog
