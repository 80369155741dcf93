#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "homog/common.hpp"
#include "homog/csr.hpp"
#include "homog/solver.hpp"
#include "support/oracles.hpp"

using namespace homog;

namespace {

CsrMatrix dense_to_csr(const std::vector<double>& a, std::int64_t n, double drop = 0.0) {
  std::vector<Triplet> t;
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < n; ++j)
      if (std::abs(a[i * n + j]) > drop || i == j) t.push_back({i, j, a[i * n + j]});
  return csr_from_triplets(n, std::move(t));
}

// Random SPD matrix Q D Q^T built from Jacobi-style rotations of a diagonal.
std::vector<double> random_spd(int n, std::uint64_t seed, double cond) {
  std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
  SplitMix64 rng(seed);
  for (int i = 0; i < n; ++i)
    a[static_cast<std::size_t>(i) * n + i] = 1.0 + (cond - 1.0) * i / std::max(1, n - 1);
  // Apply a few random plane rotations on both sides.
  for (int rot = 0; rot < 4 * n; ++rot) {
    const int p = static_cast<int>(rng.below(n));
    int q = static_cast<int>(rng.below(n));
    if (p == q) q = (q + 1) % n;
    const double ang = 3.14159 * rng.uniform();
    const double c = std::cos(ang), s = std::sin(ang);
    for (int k = 0; k < n; ++k) {
      const double akp = a[static_cast<std::size_t>(k) * n + p];
      const double akq = a[static_cast<std::size_t>(k) * n + q];
      a[static_cast<std::size_t>(k) * n + p] = c * akp - s * akq;
      a[static_cast<std::size_t>(k) * n + q] = s * akp + c * akq;
    }
    for (int k = 0; k < n; ++k) {
      const double apk = a[static_cast<std::size_t>(p) * n + k];
      const double aqk = a[static_cast<std::size_t>(q) * n + k];
      a[static_cast<std::size_t>(p) * n + k] = c * apk - s * aqk;
      a[static_cast<std::size_t>(q) * n + k] = s * apk + c * aqk;
    }
  }
  return a;
}

}  // namespace

TEST_CASE("cg solves the identity in one iteration") {
  const std::int64_t n = 17;
  LinearOperator op;
  op.dim = n;
  op.apply = [](std::span<const double> x, std::span<double> y) {
    std::copy(x.begin(), x.end(), y.begin());
  };
  std::vector<double> b(n, 1.0), x0(n, 0.0);
  auto res = cg(op, b, x0, {.rtol = 1e-12});
  CHECK(res.trace.converged);
  CHECK(res.trace.iterations() == 1);
  for (double v : res.x) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("cg reproduces the hand-solved 2x2 system") {
  CsrMatrix a = dense_to_csr({2.0, 1.0, 1.0, 2.0}, 2);
  auto op = csr_operator(a);
  std::vector<double> b{1.0, 0.0}, x0{0.0, 0.0};
  auto res = cg(op, b, x0, {.rtol = 1e-14});
  CHECK(res.x[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(res.x[1] == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("cg on a diagonal with k distinct eigenvalues stops within k iterations") {
  const std::int64_t n = 40;
  std::vector<double> diag(n);
  const double values[4] = {1.0, 3.0, 7.0, 20.0};
  for (std::int64_t i = 0; i < n; ++i) diag[i] = values[i % 4];
  std::vector<double> dense(static_cast<std::size_t>(n) * n, 0.0);
  for (std::int64_t i = 0; i < n; ++i) dense[i * n + i] = diag[i];
  CsrMatrix a = dense_to_csr(dense, n);
  auto op = csr_operator(a);

  SplitMix64 rng(5);
  std::vector<double> b(n), x0(n, 0.0);
  for (auto& v : b) v = rng.symmetric();

  auto res = cg(op, b, x0, {.rtol = 1e-12});
  CHECK(res.trace.iterations() <= 4);
  auto exact = oracle::dense_solve(dense, b);
  for (std::int64_t i = 0; i < n; ++i) CHECK(res.x[i] == doctest::Approx(exact[i]).epsilon(1e-9));
}

TEST_CASE("cg throws with trace when the iteration cap is too small") {
  auto dense = random_spd(30, 3, 1e4);
  CsrMatrix a = dense_to_csr(dense, 30);
  auto op = csr_operator(a);
  std::vector<double> b(30, 1.0), x0(30, 0.0);
  CgOptions opt;
  opt.rtol = 1e-13;
  opt.max_iterations = 3;
  CHECK_THROWS_AS(cg(op, b, x0, opt), SolverError);
  try {
    cg(op, b, x0, opt);
  } catch (const SolverError& e) {
    CHECK(e.trace.samples.size() == 4);  // x0 plus three iterates
  }
}

TEST_CASE("cg detects indefiniteness") {
  CsrMatrix a = dense_to_csr({1.0, 0.0, 0.0, -1.0}, 2);
  auto op = csr_operator(a);
  std::vector<double> b{0.0, 1.0}, x0{0.0, 0.0};
  CHECK_THROWS_AS(cg(op, b, x0, {}), SolverError);
}

TEST_CASE("cg energy trace is nonincreasing and reproduces the energy identity") {
  const int n = 60;
  auto dense = random_spd(n, 11, 500.0);
  CsrMatrix a = dense_to_csr(dense, n);
  auto op = csr_operator(a);
  SplitMix64 rng(13);
  std::vector<double> b(n), x0(n, 0.0);
  for (auto& v : b) v = rng.symmetric();

  CgOptions opt;
  opt.rtol = 1e-13;
  opt.energy_offset = 0.0;  // energy value becomes -<b,x> - <r,x> = 2 f(x)
  std::vector<std::vector<double>> iterates;
  opt.iterate_log = &iterates;
  auto res = cg(op, b, x0, opt);

  auto exact = oracle::dense_solve(dense, b);
  // value(x) - value(x*) must equal ||x - x*||_A^2 at every iterate.
  const auto& samples = res.trace.samples;
  double prev = samples.front().energy_value;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    CHECK(samples[k].energy_value <= prev + 1e-11);
    prev = samples[k].energy_value;
    std::vector<double> diff(n), adiff(n);
    for (int i = 0; i < n; ++i) diff[i] = iterates[k][i] - exact[i];
    a.multiply(diff, adiff);
    double err_a = 0.0;
    for (int i = 0; i < n; ++i) err_a += diff[i] * adiff[i];
    const double from_trace = samples[k].energy_value - samples.back().energy_value;
    CHECK(std::abs(from_trace - err_a) < 1e-9 * std::max(1.0, err_a));
  }
}

TEST_CASE("cg energy error stays below the condition-number envelope") {
  const int n = 80;
  auto dense = random_spd(n, 21, 2000.0);
  CsrMatrix a = dense_to_csr(dense, n);
  auto op = csr_operator(a);
  SplitMix64 rng(22);
  std::vector<double> b(n), x0(n, 0.0);
  for (auto& v : b) v = rng.symmetric();

  CgOptions opt;
  opt.rtol = 1e-12;
  opt.energy_offset = 0.0;
  auto res = cg(op, b, x0, opt);

  const auto eig = oracle::dense_sym_eigenvalues(dense, n);
  const double kappa = eig.back() / eig.front();
  const auto& s = res.trace.samples;
  const double e0 = s.front().energy_value - s.back().energy_value;
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    const double err = s[k].energy_value - s.back().energy_value;
    CHECK(err <= cg_bound(kappa, static_cast<std::int64_t>(k), e0) + 1e-12 * std::abs(e0));
  }
}

TEST_CASE("cg_bound arithmetic") {
  CHECK(cg_bound(1.0, 0, 2.0) == doctest::Approx(8.0));
  CHECK(cg_bound(1.0, 1, 2.0) == 0.0);
  CHECK(cg_bound(9.0, 1, 3.0) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("ic0 on a full pattern reproduces the exact Cholesky factorization") {
  const int n = 12;
  auto dense = random_spd(n, 31, 50.0);
  CsrMatrix a = dense_to_csr(dense, n);
  auto m = ic0_factor(a);
  // M x == A x for several random vectors.
  SplitMix64 rng(32);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<double> x(n), ax(n), mx(n);
    for (auto& v : x) v = rng.symmetric();
    a.multiply(x, ax);
    m.multiply(x, mx);
    for (int i = 0; i < n; ++i) CHECK(mx[i] == doctest::Approx(ax[i]).epsilon(1e-10));
  }
}

TEST_CASE("pcg with an exact factorization converges in one iteration") {
  const int n = 25;
  auto dense = random_spd(n, 41, 1e4);
  CsrMatrix a = dense_to_csr(dense, n);
  auto m = ic0_factor(a);
  auto op = csr_operator(a);
  SplitMix64 rng(42);
  std::vector<double> b(n), x0(n, 0.0);
  for (auto& v : b) v = rng.symmetric();
  CgOptions opt;
  opt.rtol = 1e-10;
  opt.preconditioner = &m;
  auto res = cg(op, b, x0, opt);
  CHECK(res.trace.iterations() == 1);
}

TEST_CASE("ic0 of a tridiagonal matrix is exact (no fill to drop)") {
  const int n = 20;
  std::vector<double> dense(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    dense[static_cast<std::size_t>(i) * n + i] = 2.0;
    if (i + 1 < n) {
      dense[static_cast<std::size_t>(i) * n + i + 1] = -1.0;
      dense[static_cast<std::size_t>(i + 1) * n + i] = -1.0;
    }
  }
  CsrMatrix a = dense_to_csr(dense, n, 0.5);  // keeps only the tridiagonal
  auto m = ic0_factor(a);
  std::vector<double> x(n), ax(n), mx(n);
  SplitMix64 rng(50);
  for (auto& v : x) v = rng.symmetric();
  a.multiply(x, ax);
  m.multiply(x, mx);
  for (int i = 0; i < n; ++i) CHECK(mx[i] == doctest::Approx(ax[i]).epsilon(1e-12));
  // And solve() really applies M^{-1}.
  std::vector<double> back(n);
  m.solve(ax, back);
  for (int i = 0; i < n; ++i) CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-10));
}

TEST_CASE("ic0 reports breakdown on an indefinite matrix") {
  CsrMatrix a = dense_to_csr({1.0, 2.0, 2.0, 1.0}, 2);
  CHECK_THROWS_AS(ic0_factor(a), FactorizationError);
  double shift = 0.0;
  auto m = ic0_factor_shifted(a, &shift);
  CHECK(shift > 0.0);
  CHECK(m.applied_shift() == shift);
}

TEST_CASE("lanczos on diag(1..10) recovers the exact extremes") {
  const int n = 10;
  std::vector<double> dense(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) dense[static_cast<std::size_t>(i) * n + i] = i + 1.0;
  CsrMatrix a = dense_to_csr(dense, n);
  auto op = csr_operator(a);
  auto res = lanczos_extremes(op, 10, 7);
  CHECK(res.lambda_min == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(res.lambda_max == doctest::Approx(10.0).epsilon(1e-10));
}

TEST_CASE("lanczos extremes are inner estimates of the true spectrum") {
  const int n = 90;
  auto dense = random_spd(n, 61, 300.0);
  CsrMatrix a = dense_to_csr(dense, n);
  auto eig = oracle::dense_sym_eigenvalues(dense, n);
  auto op = csr_operator(a);
  auto res = lanczos_extremes(op, 35, 8);
  CHECK(res.lambda_min >= eig.front() - 1e-9);
  CHECK(res.lambda_max <= eig.back() + 1e-9);
  // With a full budget the estimates are tight.
  auto full = lanczos_extremes(op, n, 8);
  CHECK(full.lambda_min == doctest::Approx(eig.front()).epsilon(1e-8));
  CHECK(full.lambda_max == doctest::Approx(eig.back()).epsilon(1e-8));
}

TEST_CASE("ic0 preconditioning lowers the lanczos condition estimate") {
  // 2-D five-point Laplacian plus identity: a standard ill-conditioned SPD
  // test matrix with a sparse pattern (fill is actually dropped).
  const int grid = 14;
  const int n = grid * grid;
  std::vector<Triplet> t;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const std::int64_t row = i * grid + j;
      t.push_back({row, row, 4.01});
      if (i > 0) t.push_back({row, row - grid, -1.0});
      if (i + 1 < grid) t.push_back({row, row + grid, -1.0});
      if (j > 0) t.push_back({row, row - 1, -1.0});
      if (j + 1 < grid) t.push_back({row, row + 1, -1.0});
    }
  }
  CsrMatrix a = csr_from_triplets(n, std::move(t));
  auto op = csr_operator(a);
  auto plain = lanczos_extremes(op, 120, 9);

  auto m = ic0_factor(a);
  // M^{-1} A is symmetric in the M inner product.
  LinearOperator pop;
  pop.dim = n;
  pop.apply = [&](std::span<const double> x, std::span<double> y) {
    std::vector<double> ax(n);
    a.multiply(x, ax);
    m.solve(ax, y);
  };
  pop.inner = [&](std::span<const double> x, std::span<const double> y) {
    std::vector<double> my(n);
    m.multiply(y, my);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += x[i] * my[i];
    return s;
  };
  auto pre = lanczos_extremes(pop, 120, 9);
  CHECK(pre.condition_estimate() < plain.condition_estimate());
  CHECK(pre.lambda_min > 0.0);
}
