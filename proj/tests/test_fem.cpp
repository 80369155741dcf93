#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "homog/fem.hpp"
#include "homog/voxel_io.hpp"
#include "support/fem_oracle.hpp"
#include "support/oracles.hpp"

using namespace homog;

namespace {

const double kMacro2[2] = {1.0, 0.0};
const double kMacro3[3] = {1.0, 0.0, 0.0};

std::span<const double> macro_for(int d) {
  return d == 2 ? std::span<const double>(kMacro2, 2) : std::span<const double>(kMacro3, 3);
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

TEST_CASE("mesh counting and volume partition") {
  auto mesh2 = build_mesh(2, 10);
  CHECK(mesh2.element_count() == 200);
  CHECK(mesh2.vertex_count() == 100);
  auto mesh3 = build_mesh(3, 2);
  CHECK(mesh3.element_count() == 48);
  CHECK(mesh3.vertex_count() == 8);

  for (const auto& mesh : {mesh2, mesh3}) {
    double vol = 0.0;
    std::array<std::array<double, 3>, 4> coords{};
    for (std::int64_t e = 0; e < mesh.element_count(); ++e) {
      mesh.element_coords(e, coords);
      const int d = mesh.dim();
      if (d == 2) {
        const double ax = coords[1][0] - coords[0][0], ay = coords[1][1] - coords[0][1];
        const double bx = coords[2][0] - coords[0][0], by = coords[2][1] - coords[0][1];
        vol += std::abs(ax * by - ay * bx) / 2.0;
      } else {
        double u[3], v[3], w[3];
        for (int a = 0; a < 3; ++a) {
          u[a] = coords[1][a] - coords[0][a];
          v[a] = coords[2][a] - coords[0][a];
          w[a] = coords[3][a] - coords[0][a];
        }
        vol += std::abs(u[0] * (v[1] * w[2] - v[2] * w[1]) -
                        u[1] * (v[0] * w[2] - v[2] * w[0]) +
                        u[2] * (v[0] * w[1] - v[1] * w[0])) /
               6.0;
      }
    }
    CHECK(vol == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("simplex quadrature integrates monomials exactly") {
  // int_simplex prod x_i^{a_i} = prod(a_i!) / (d + sum a_i)!.
  for (int d : {2, 3}) {
    for (int degree : {1, 2, 4, 5}) {
      auto rule = simplex_rule(d, degree);
      std::array<int, 3> alpha{0, 0, 0};
      std::function<void(int, int)> scan = [&](int axis, int remaining) {
        if (axis == d) {
          int total = 0;
          for (int a = 0; a < d; ++a) total += alpha[a];
          double expect = 1.0;
          for (int a = 0; a < d; ++a) expect *= factorial(alpha[a]);
          expect /= factorial(total + d);
          double got = 0.0;
          for (std::size_t q = 0; q < rule.points.size(); ++q) {
            double term = rule.weights[q];
            for (int a = 0; a < d; ++a) term *= std::pow(rule.points[q][a], alpha[a]);
            got += term;
          }
          CHECK(std::abs(got - expect) < 1e-14);
          return;
        }
        for (int k = 0; k <= remaining; ++k) {
          alpha[axis] = k;
          scan(axis + 1, remaining - k);
        }
      };
      scan(0, degree);
    }
  }
}

TEST_CASE("dof counts match (N p)^d - 1") {
  CHECK(FemSpace(build_mesh(2, 10), 1).dof_count() == 99);
  CHECK(FemSpace(build_mesh(2, 10), 2).dof_count() == 399);
  CHECK(FemSpace(build_mesh(3, 2), 2).dof_count() == 63);
}

TEST_CASE("assembly matches the dense first-principles oracle") {
  // N = 2 keeps the dense system tiny; the pyramid profile exercises the
  // nonconstant path (its kink planes are mesh planes for even N).
  for (int d : {2, 3}) {
    for (int p : {1, 2}) {
      for (double rho : {0.0, 1.5}) {
        auto spec = MaterialSpec::pyramid(d, rho);
        FemSpace space(build_mesh(d, 2), p);
        auto sys = assemble(space, spec, macro_for(d));
        auto dense = oracle::dense_assemble(space.mesh(), p, spec, macro_for(d));

        REQUIRE(sys.matrix.n == dense.n);
        double max_diff = 0.0;
        for (std::int64_t i = 0; i < sys.matrix.n; ++i) {
          std::vector<double> row(dense.n, 0.0);
          for (std::int64_t k = sys.matrix.row_ptr[i]; k < sys.matrix.row_ptr[i + 1]; ++k)
            row[sys.matrix.col[k]] = sys.matrix.val[k];
          for (std::int64_t j = 0; j < dense.n; ++j)
            max_diff = std::max(max_diff,
                                std::abs(row[j] - dense.matrix[static_cast<std::size_t>(i) * dense.n + j]));
        }
        CHECK(max_diff < 1e-12);
        for (std::int64_t i = 0; i < dense.n; ++i)
          CHECK(std::abs(sys.rhs[i] - dense.rhs[i]) < 1e-12);
        CHECK(sys.energy_offset == doctest::Approx(dense.energy_offset).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("assembled matrix is exactly symmetric and rhs sums to zero") {
  auto spec = MaterialSpec::square(2, 10.0);
  FemSpace space(build_mesh(2, 10), 2);
  auto sys = assemble(space, spec, macro_for(2));
  CHECK(sys.matrix.symmetry_defect() == 0.0);
  double sum = sys.rhs_fixed;
  for (double v : sys.rhs) sum += v;
  CHECK(std::abs(sum) < 1e-13 * sys.matrix.infinity_norm());
}

TEST_CASE("square assembly rejects meshes that miss the interface") {
  auto spec = MaterialSpec::square(2, 10.0);
  FemSpace space(build_mesh(2, 7), 1);
  CHECK_THROWS_AS(assemble(space, spec, macro_for(2)), NonConformingMeshError);
}

TEST_CASE("patch test: zero contrast solves to zero with the base coefficient") {
  for (int d : {2, 3}) {
    auto spec = MaterialSpec::square(d, 0.0);
    FemSpace space(build_mesh(d, d == 2 ? 10 : 4), 1);
    auto res = solve_fem(space, spec, macro_for(d), false);
    double umax = 0.0;
    for (double v : res.solution) umax = std::max(umax, std::abs(v));
    CHECK(umax < 1e-12);
    const double m11 = d == 2 ? 7.0 / 4.0 : 31.0 / 16.0;
    CHECK(res.homogenized == doctest::Approx(m11).epsilon(1e-13));
  }
}

TEST_CASE("value at u = 0 equals the mean coefficient") {
  auto spec = MaterialSpec::square(2, 10.0);
  FemSpace space(build_mesh(2, 10), 1);
  std::vector<double> zero(space.dof_count(), 0.0);
  CHECK(homogenized_value_fem(space, spec, zero, macro_for(2)) ==
        doctest::Approx(7.0 / 4.0 + 10.0 * 0.36).epsilon(1e-13));
}

TEST_CASE("quadrature route and algebraic identity agree on random vectors") {
  // a(E + grad u, E + grad u) = a(E,E) - 2 b.u + u.A u for any u.
  auto spec = MaterialSpec::pyramid(2, 10.0);
  FemSpace space(build_mesh(2, 10), 2);
  auto sys = assemble(space, spec, macro_for(2));
  SplitMix64 rng(3);
  std::vector<double> u(space.dof_count());
  for (auto& v : u) v = 0.1 * rng.symmetric();
  std::vector<double> au(u.size());
  sys.matrix.multiply(u, au);
  double bu = 0.0, uau = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    bu += sys.rhs[i] * u[i];
    uau += au[i] * u[i];
  }
  const double algebraic = sys.energy_offset - 2.0 * bu + uau;
  const double quadrature = homogenized_value_fem(space, spec, u, macro_for(2));
  CHECK(quadrature == doctest::Approx(algebraic).epsilon(1e-12));
}

TEST_CASE("fem reproduces the laminate harmonic mean exactly") {
  const double a_in = 7.0, a_out = 1.0;
  VoxelImage img;
  img.resolution = GridShape{5, 5};
  img.values.assign(25, a_out);
  for (int j1 = 0; j1 < 5; ++j1)
    for (int j0 = 1; j0 <= 3; ++j0) img.values[j0 + 5 * j1] = a_in;
  auto spec = MaterialSpec::voxel(img);

  FemSpace space(build_mesh(2, 10), 1);
  CgOptions opt;
  opt.rtol = 1e-12;
  auto res = solve_fem(space, spec, macro_for(2), true, opt);
  const double harmonic = 1.0 / (0.6 / a_in + 0.4 / a_out);
  CHECK(res.homogenized == doctest::Approx(harmonic).epsilon(1e-10));
}

TEST_CASE("galerkin orthogonality at convergence") {
  auto spec = MaterialSpec::square(2, 10.0);
  FemSpace space(build_mesh(2, 10), 1);
  auto sys = assemble(space, spec, macro_for(2));
  CgOptions opt;
  opt.rtol = 1e-12;
  auto res = solve_fem(space, spec, macro_for(2), true, opt);
  std::vector<double> r(res.solution.size());
  sys.matrix.multiply(res.solution, r);
  double rmax = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) rmax = std::max(rmax, std::abs(r[i] - sys.rhs[i]));
  CHECK(rmax <= 1e-9 * sys.matrix.infinity_norm());
}

TEST_CASE("nested refinement and higher order lower the value") {
  auto spec = MaterialSpec::square(2, 10.0);
  CgOptions opt;
  opt.rtol = 1e-11;
  auto v10p1 = solve_fem(FemSpace(build_mesh(2, 10), 1), spec, macro_for(2), true, opt).homogenized;
  auto v20p1 = solve_fem(FemSpace(build_mesh(2, 20), 1), spec, macro_for(2), true, opt).homogenized;
  auto v10p2 = solve_fem(FemSpace(build_mesh(2, 10), 2), spec, macro_for(2), true, opt).homogenized;
  CHECK(v20p1 <= v10p1 + 1e-10);
  CHECK(v10p2 <= v10p1 + 1e-10);
}

TEST_CASE("memory accounting on the toy diagonal and assembled matrices") {
  // Diagonal 3 x 3 with dense vectors: 3 + 3 + 2*3 + 3 = 15.
  CsrMatrix diag;
  diag.n = 3;
  diag.row_ptr = {0, 1, 2, 3};
  diag.col = {0, 1, 2};
  diag.val = {1.0, 2.0, 3.0};
  CHECK(memory_fem(diag) == 15);

  auto spec = MaterialSpec::square(2, 10.0);
  auto sys1 = assemble(FemSpace(build_mesh(2, 10), 1), spec, macro_for(2));
  auto sys2 = assemble(FemSpace(build_mesh(2, 10), 2), spec, macro_for(2));
  CHECK(memory_fem(sys1.matrix) ==
        3 * sys1.matrix.n + 2 * sys1.matrix.nnz_symmetric());
  CHECK(sys2.matrix.nnz() > sys1.matrix.nnz());
}

TEST_CASE("ic0 lowers the condition estimate of an assembled system") {
  auto spec = MaterialSpec::square(2, 10.0);
  auto sys = assemble(FemSpace(build_mesh(2, 10), 1), spec, macro_for(2));
  auto op = csr_operator(sys.matrix);
  auto plain = lanczos_extremes(op, 90, 4);

  auto m = ic0_factor(sys.matrix);
  LinearOperator pop;
  pop.dim = sys.matrix.n;
  pop.apply = [&](std::span<const double> x, std::span<double> y) {
    std::vector<double> ax(sys.matrix.n);
    sys.matrix.multiply(x, ax);
    m.solve(ax, y);
  };
  pop.inner = [&](std::span<const double> x, std::span<const double> y) {
    std::vector<double> my(sys.matrix.n);
    m.multiply(y, my);
    double s = 0.0;
    for (std::int64_t i = 0; i < sys.matrix.n; ++i) s += x[i] * my[i];
    return s;
  };
  auto pre = lanczos_extremes(pop, 90, 4);
  CHECK(pre.condition_estimate() < plain.condition_estimate());
}

TEST_CASE("circle accepts any regular mesh") {
  auto spec = MaterialSpec::circle(2, 10.0, 0.25);
  FemSpace space(build_mesh(2, 7), 1);
  auto res = solve_fem(space, spec, macro_for(2), true);
  CHECK(res.trace.converged);
  CHECK(res.homogenized > 7.0 / 4.0);
}

TEST_CASE("solution dump writes vertices, cells and values") {
  namespace fs = std::filesystem;
  auto spec = MaterialSpec::square(2, 0.0);
  FemSpace space(build_mesh(2, 4), 1);
  std::vector<double> u(space.dof_count(), 0.5);
  const auto path = fs::temp_directory_path() / "homog_fem_dump.txt";
  write_solution(space, u, path.string());
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line.find("order=1") != std::string::npos);
  std::getline(in, line);
  CHECK(line == "vertices 16");
  fs::remove(path);
}
