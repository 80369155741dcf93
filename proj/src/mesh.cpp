#include "homog/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace homog {

PeriodicMesh::PeriodicMesh(int d, int n) : d_(d), n_(n) {
  if (d != 2 && d != 3) throw std::invalid_argument("PeriodicMesh: d must be 2 or 3");
  if (n < 2) throw std::invalid_argument("PeriodicMesh: need at least 2 cells per axis");

  if (d == 2) {
    // Both triangles share the diagonal from (0,0) to (1,1).
    patterns_.push_back({{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 0, 0}}});
    patterns_.push_back({{{0, 0, 0}, {0, 1, 0}, {1, 1, 0}, {0, 0, 0}}});
    return;
  }
  // Six tetrahedra along the main diagonal: vertex chains
  // 0 -> e_{s1} -> e_{s1}+e_{s2} -> (1,1,1) over permutations s.
  const std::array<std::array<int, 3>, 6> perms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  for (const auto& s : perms) {
    std::array<std::array<int, 3>, 4> tet{};
    // tet[0] stays at the cell corner.
    for (int a = 0; a < 3; ++a) tet[1][a] = 0;
    tet[1][s[0]] = 1;
    tet[2] = tet[1];
    tet[2][s[1]] = 1;
    tet[3] = {1, 1, 1};
    patterns_.push_back(tet);
  }
}

std::int64_t PeriodicMesh::element_count() const {
  std::int64_t cells = 1;
  for (int a = 0; a < d_; ++a) cells *= n_;
  return cells * simplices_per_cell();
}

std::int64_t PeriodicMesh::vertex_count() const {
  std::int64_t v = 1;
  for (int a = 0; a < d_; ++a) v *= n_;
  return v;
}

void PeriodicMesh::element_lattice(std::int64_t e, std::array<std::array<int, 3>, 4>& corners) const {
  const int per_cell = simplices_per_cell();
  const std::int64_t cell = e / per_cell;
  const int pattern = static_cast<int>(e % per_cell);
  std::array<int, 3> base{0, 0, 0};
  std::int64_t rem = cell;
  for (int a = 0; a < d_; ++a) {
    base[a] = static_cast<int>(rem % n_);
    rem /= n_;
  }
  for (int v = 0; v < vertices_per_simplex(); ++v)
    for (int a = 0; a < d_; ++a) corners[v][a] = base[a] + patterns_[pattern][v][a];
}

void PeriodicMesh::element_coords(std::int64_t e, std::array<std::array<double, 3>, 4>& coords) const {
  std::array<std::array<int, 3>, 4> lattice{};
  element_lattice(e, lattice);
  for (int v = 0; v < vertices_per_simplex(); ++v)
    for (int a = 0; a < d_; ++a)
      coords[v][a] = -0.5 + static_cast<double>(lattice[v][a]) / n_;
}

double PeriodicMesh::element_volume() const {
  double cell = 1.0;
  for (int a = 0; a < d_; ++a) cell /= n_;
  return cell / simplices_per_cell();
}

PeriodicMesh build_mesh(int d, int n) { return PeriodicMesh(d, n); }

namespace {

void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double p0 = 0.0, dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      p0 = 1.0;
      double p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
      }
      dp = n * (t * p0 - p1) / (t * t - 1.0);
      const double dt = p0 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    p0 = 1.0;
    double p1 = 0.0;
    for (int j = 0; j < n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
    }
    dp = n * (t * p0 - p1) / (t * t - 1.0);
    // Map from [-1, 1] to [0, 1].
    x[i] = 0.5 * (1.0 - t);
    x[n - 1 - i] = 0.5 * (1.0 + t);
    w[i] = w[n - 1 - i] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
}

}  // namespace

SimplexRule simplex_rule(int d, int degree) {
  if (d != 2 && d != 3) throw std::invalid_argument("simplex_rule: d must be 2 or 3");
  // The Duffy pullback of a degree-q polynomial has per-axis degree at most
  // q + d - 1 (the Jacobian contributes d - 1).
  const int per_axis_degree = std::max(degree, 0) + d - 1;
  const int n1 = per_axis_degree / 2 + 1;
  std::vector<double> x, w;
  gauss_legendre_01(n1, x, w);

  SimplexRule rule;
  if (d == 2) {
    for (int i = 0; i < n1; ++i) {
      for (int j = 0; j < n1; ++j) {
        const double u = x[i], v = x[j];
        rule.points.push_back({u, v * (1.0 - u), 0.0});
        rule.weights.push_back(w[i] * w[j] * (1.0 - u));
      }
    }
  } else {
    for (int i = 0; i < n1; ++i) {
      for (int j = 0; j < n1; ++j) {
        for (int k = 0; k < n1; ++k) {
          const double u = x[i], v = x[j], t = x[k];
          rule.points.push_back({u, v * (1.0 - u), t * (1.0 - u) * (1.0 - v)});
          rule.weights.push_back(w[i] * w[j] * w[k] * (1.0 - u) * (1.0 - u) * (1.0 - v));
        }
      }
    }
  }
  return rule;
}

}  // namespace homog
