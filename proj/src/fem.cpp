#include "homog/fem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace homog {

namespace {

struct ElementGeometry {
  std::array<std::array<double, 3>, 4> coords{};
  double jac[3][3];      // B columns v_i - v_0
  double inv_t[3][3];    // B^{-T}
  double abs_det = 0.0;

  void build(int d) {
    for (int i = 0; i < d; ++i)
      for (int c = 0; c < d; ++c) jac[i][c] = coords[c + 1][i] - coords[0][i];
    double det;
    if (d == 2) {
      det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
      const double inv = 1.0 / det;
      // inverse of B, then transpose
      const double b00 = jac[1][1] * inv, b01 = -jac[0][1] * inv;
      const double b10 = -jac[1][0] * inv, b11 = jac[0][0] * inv;
      inv_t[0][0] = b00;
      inv_t[0][1] = b10;
      inv_t[1][0] = b01;
      inv_t[1][1] = b11;
    } else {
      det = jac[0][0] * (jac[1][1] * jac[2][2] - jac[1][2] * jac[2][1]) -
            jac[0][1] * (jac[1][0] * jac[2][2] - jac[1][2] * jac[2][0]) +
            jac[0][2] * (jac[1][0] * jac[2][1] - jac[1][1] * jac[2][0]);
      const double inv = 1.0 / det;
      double cof[3][3];
      cof[0][0] = (jac[1][1] * jac[2][2] - jac[1][2] * jac[2][1]) * inv;
      cof[0][1] = -(jac[1][0] * jac[2][2] - jac[1][2] * jac[2][0]) * inv;
      cof[0][2] = (jac[1][0] * jac[2][1] - jac[1][1] * jac[2][0]) * inv;
      cof[1][0] = -(jac[0][1] * jac[2][2] - jac[0][2] * jac[2][1]) * inv;
      cof[1][1] = (jac[0][0] * jac[2][2] - jac[0][2] * jac[2][0]) * inv;
      cof[1][2] = -(jac[0][0] * jac[2][1] - jac[0][1] * jac[2][0]) * inv;
      cof[2][0] = (jac[0][1] * jac[1][2] - jac[0][2] * jac[1][1]) * inv;
      cof[2][1] = -(jac[0][0] * jac[1][2] - jac[0][2] * jac[1][0]) * inv;
      cof[2][2] = (jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]) * inv;
      // inverse rows are cofactor columns; B^{-T} is the cofactor matrix / det
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) inv_t[i][j] = cof[i][j];
    }
    abs_det = std::abs(det);
  }

  void point(int d, const std::array<double, 3>& xi, std::array<double, 3>& x) const {
    for (int i = 0; i < d; ++i) {
      x[i] = coords[0][i];
      for (int c = 0; c < d; ++c) x[i] += jac[i][c] * xi[c];
    }
  }
};

// Gradients of the local Lagrange basis at a reference point, already
// multiplied by B^{-T} (physical gradients). Layout: grads[local][axis].
void basis_gradients(int d, int order, const std::vector<std::array<int, 2>>& edges,
                     const ElementGeometry& geom, const std::array<double, 3>& xi,
                     std::array<std::array<double, 3>, 10>& grads, int& count) {
  // Barycentric lambdas and their constant reference gradients.
  double lambda[4];
  lambda[0] = 1.0;
  for (int a = 0; a < d; ++a) lambda[0] -= xi[a];
  for (int a = 0; a < d; ++a) lambda[a + 1] = xi[a];
  // grad_ref lambda_0 = (-1, .., -1), grad_ref lambda_{a+1} = e_a.
  auto ref_grad = [&](int vertex, int axis) -> double {
    return vertex == 0 ? -1.0 : (vertex == axis + 1 ? 1.0 : 0.0);
  };

  count = order == 1 ? d + 1 : d + 1 + static_cast<int>(edges.size());
  std::array<std::array<double, 3>, 10> ref{};
  if (order == 1) {
    for (int v = 0; v <= d; ++v)
      for (int a = 0; a < d; ++a) ref[v][a] = ref_grad(v, a);
  } else {
    for (int v = 0; v <= d; ++v)
      for (int a = 0; a < d; ++a) ref[v][a] = (4.0 * lambda[v] - 1.0) * ref_grad(v, a);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const int va = edges[e][0], vb = edges[e][1];
      for (int a = 0; a < d; ++a)
        ref[d + 1 + e][a] =
            4.0 * (lambda[va] * ref_grad(vb, a) + lambda[vb] * ref_grad(va, a));
    }
  }
  for (int loc = 0; loc < count; ++loc) {
    for (int i = 0; i < d; ++i) {
      double s = 0.0;
      for (int j = 0; j < d; ++j) s += geom.inv_t[i][j] * ref[loc][j];
      grads[loc][i] = s;
    }
  }
}

}  // namespace

FemSpace::FemSpace(PeriodicMesh mesh, int order) : mesh_(std::move(mesh)), order_(order) {
  if (order != 1 && order != 2) throw std::invalid_argument("FemSpace: order must be 1 or 2");
  if (order == 2) {
    if (mesh_.dim() == 2) {
      edges_ = {{{0, 1}}, {{0, 2}}, {{1, 2}}};
    } else {
      edges_ = {{{0, 1}}, {{0, 2}}, {{0, 3}}, {{1, 2}}, {{1, 3}}, {{2, 3}}};
    }
  }
}

std::int64_t FemSpace::dof_count() const {
  std::int64_t lattice = 1;
  for (int a = 0; a < dim(); ++a) lattice *= static_cast<std::int64_t>(order_) * mesh_.cells_per_axis();
  return lattice - 1;
}

int FemSpace::local_nodes() const {
  return order_ == 1 ? dim() + 1 : dim() + 1 + static_cast<int>(edges_.size());
}

void FemSpace::element_dofs(std::int64_t e, std::span<std::int64_t> dofs) const {
  const int d = dim();
  const int pn = order_ * mesh_.cells_per_axis();
  std::array<std::array<int, 3>, 4> lattice{};
  mesh_.element_lattice(e, lattice);

  auto node_id = [&](const std::array<int, 3>& node) {
    std::int64_t linear = 0;
    std::int64_t stride = 1;
    for (int a = 0; a < d; ++a) {
      linear += stride * (node[a] % pn);
      stride *= pn;
    }
    return linear - 1;  // lattice origin is the fixed node
  };

  int loc = 0;
  for (int v = 0; v <= d; ++v, ++loc) {
    std::array<int, 3> node{};
    for (int a = 0; a < d; ++a) node[a] = order_ * lattice[v][a];
    dofs[loc] = node_id(node);
  }
  for (const auto& edge : edges_) {
    std::array<int, 3> node{};
    for (int a = 0; a < d; ++a) node[a] = lattice[edge[0]][a] + lattice[edge[1]][a];
    dofs[loc++] = node_id(node);
  }
}

namespace {

// Integral of the material tensor over one element (exact per the element's
// polynomial structure); the workhorse for order-1 assembly.
SymMat integrated_material(const MaterialSpec& spec, const ElementMaterial& em,
                           const ElementGeometry& geom, const SimplexRule& rule, int d) {
  SymMat out = SymMat::zero(d);
  if (em.constant) {
    const double vol = geom.abs_det / (d == 2 ? 2.0 : 6.0);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) out(i, j) = vol * em.tensor(i, j);
    return out;
  }
  std::array<double, 3> x{};
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    geom.point(d, rule.points[q], x);
    const SymMat a = spec.tensor_at(std::span<const double>(x.data(), d));
    const double w = rule.weights[q] * geom.abs_det;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) out(i, j) += w * a(i, j);
  }
  return out;
}

}  // namespace

AssembledSystem assemble(const FemSpace& space, const MaterialSpec& spec,
                         std::span<const double> macro) {
  const PeriodicMesh& mesh = space.mesh();
  const int d = mesh.dim();
  const int p = space.order();
  if (spec.dim() != d) throw std::invalid_argument("assemble: dimension mismatch");
  if (static_cast<int>(macro.size()) != d)
    throw std::invalid_argument("assemble: macroscopic vector dimension mismatch");

  const int nloc = space.local_nodes();
  const std::int64_t n = space.dof_count();

  // Quadrature exact for the integrand degree: the profile degree (d for the
  // pyramid, 0 otherwise) plus 2 (p - 1) from the gradients.
  const SimplexRule rule_profile = simplex_rule(d, d);               // order-1 pyramid path
  const SimplexRule rule_const = simplex_rule(d, 2 * (p - 1));       // order-2, flat material
  const SimplexRule rule_full = simplex_rule(d, d + 2 * (p - 1));    // order-2, pyramid

  AssembledSystem sys;
  sys.rhs.assign(n, 0.0);
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.element_count()) * nloc * nloc);

  ElementGeometry geom;
  std::array<std::int64_t, 10> dofs{};
  std::array<std::array<double, 3>, 10> grads{};
  std::array<double, 3> x{};
  double ke[10][10];
  double be[10];

  const std::int64_t elements = mesh.element_count();
  for (std::int64_t e = 0; e < elements; ++e) {
    mesh.element_coords(e, geom.coords);
    geom.build(d);
    const ElementMaterial em = element_material(
        spec, std::span<const std::array<double, 3>>(geom.coords.data(), d + 1));
    space.element_dofs(e, std::span<std::int64_t>(dofs.data(), nloc));

    for (int i = 0; i < nloc; ++i) {
      be[i] = 0.0;
      for (int j = 0; j < nloc; ++j) ke[i][j] = 0.0;
    }

    if (p == 1) {
      // Constant gradients: only the material integral varies per element.
      const SymMat abar = integrated_material(spec, em, geom, rule_profile, d);
      int count = 0;
      basis_gradients(d, 1, space.edges(), geom, rule_profile.points[0], grads, count);
      for (int i = 0; i < nloc; ++i) {
        std::array<double, 3> ag{};
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b) ag[a] += abar(a, b) * grads[i][b];
        for (int j = 0; j <= i; ++j) {
          double s = 0.0;
          for (int a = 0; a < d; ++a) s += ag[a] * grads[j][a];
          ke[i][j] = s;
        }
        double bs = 0.0;
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b) bs += abar(a, b) * macro[b] * grads[i][a];
        be[i] = -bs;
      }
      double ee = 0.0;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) ee += abar(a, b) * macro[b] * macro[a];
      sys.energy_offset += ee;
    } else {
      const SimplexRule& rule = em.constant ? rule_const : rule_full;
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        geom.point(d, rule.points[q], x);
        const SymMat a = em.constant ? em.tensor
                                     : spec.tensor_at(std::span<const double>(x.data(), d));
        const double w = rule.weights[q] * geom.abs_det;
        int count = 0;
        basis_gradients(d, 2, space.edges(), geom, rule.points[q], grads, count);
        for (int i = 0; i < nloc; ++i) {
          std::array<double, 3> ag{};
          for (int aa = 0; aa < d; ++aa)
            for (int bb = 0; bb < d; ++bb) ag[aa] += a(aa, bb) * grads[i][bb];
          for (int j = 0; j <= i; ++j) {
            double s = 0.0;
            for (int aa = 0; aa < d; ++aa) s += ag[aa] * grads[j][aa];
            ke[i][j] += w * s;
          }
          double bs = 0.0;
          for (int aa = 0; aa < d; ++aa)
            for (int bb = 0; bb < d; ++bb) bs += a(aa, bb) * macro[bb] * grads[i][aa];
          be[i] -= w * bs;
        }
        double ee = 0.0;
        for (int aa = 0; aa < d; ++aa)
          for (int bb = 0; bb < d; ++bb) ee += a(aa, bb) * macro[bb] * macro[aa];
        sys.energy_offset += w * ee;
      }
    }

    // Mirror the lower triangle and scatter.
    for (int i = 0; i < nloc; ++i) {
      const std::int64_t gi = dofs[i];
      if (gi < 0)
        sys.rhs_fixed += be[i];
      else
        sys.rhs[gi] += be[i];
      for (int j = 0; j < nloc; ++j) {
        const double v = j <= i ? ke[i][j] : ke[j][i];
        const std::int64_t gj = dofs[j];
        if (gi >= 0 && gj >= 0) triplets.push_back({gi, gj, v});
      }
    }
  }

  sys.matrix = csr_from_triplets(n, std::move(triplets));
  return sys;
}

double homogenized_value_fem(const FemSpace& space, const MaterialSpec& spec,
                             std::span<const double> u, std::span<const double> macro) {
  const PeriodicMesh& mesh = space.mesh();
  const int d = mesh.dim();
  const int p = space.order();
  const int nloc = space.local_nodes();
  const SimplexRule rule_const = simplex_rule(d, 2 * (p - 1));
  const SimplexRule rule_full = simplex_rule(d, d + 2 * (p - 1));

  ElementGeometry geom;
  std::array<std::int64_t, 10> dofs{};
  std::array<std::array<double, 3>, 10> grads{};
  std::array<double, 3> x{};

  double value = 0.0;
  const std::int64_t elements = mesh.element_count();
  for (std::int64_t e = 0; e < elements; ++e) {
    mesh.element_coords(e, geom.coords);
    geom.build(d);
    const ElementMaterial em = element_material(
        spec, std::span<const std::array<double, 3>>(geom.coords.data(), d + 1));
    space.element_dofs(e, std::span<std::int64_t>(dofs.data(), nloc));

    const SimplexRule& rule = em.constant ? rule_const : rule_full;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      geom.point(d, rule.points[q], x);
      const SymMat a =
          em.constant ? em.tensor : spec.tensor_at(std::span<const double>(x.data(), d));
      const double w = rule.weights[q] * geom.abs_det;
      int count = 0;
      basis_gradients(d, p, space.edges(), geom, rule.points[q], grads, count);
      std::array<double, 3> total{};
      for (int aa = 0; aa < d; ++aa) total[aa] = macro[aa];
      for (int loc = 0; loc < nloc; ++loc) {
        const std::int64_t g = dofs[loc];
        const double coeff = g < 0 ? 0.0 : u[g];
        for (int aa = 0; aa < d; ++aa) total[aa] += coeff * grads[loc][aa];
      }
      double s = 0.0;
      for (int aa = 0; aa < d; ++aa)
        for (int bb = 0; bb < d; ++bb) s += a(aa, bb) * total[bb] * total[aa];
      value += w * s;
    }
  }
  return value;
}

std::int64_t memory_fem(const CsrMatrix& a) { return 3 * a.n + 2 * a.nnz_symmetric(); }

FemSolveResult solve_fem(const FemSpace& space, const MaterialSpec& spec,
                         std::span<const double> macro, bool precondition,
                         const CgOptions& options) {
  return solve_assembled(assemble(space, spec, macro), precondition, options);
}

FemSolveResult solve_assembled(const AssembledSystem& sys, bool precondition,
                               const CgOptions& options) {
  LinearOperator op = csr_operator(sys.matrix);

  CgOptions opt = options;
  opt.energy_offset = sys.energy_offset;

  FemSolveResult out;
  IcPreconditioner precond;
  if (precondition) {
    precond = ic0_factor_shifted(sys.matrix, &out.ic_shift);
    opt.preconditioner = &precond;
  }

  std::vector<double> x0(sys.matrix.n, 0.0);
  double rhs_norm = 0.0;
  for (double v : sys.rhs) rhs_norm += v * v;
  if (std::sqrt(rhs_norm) <= 1e-14 * std::max(1.0, std::abs(sys.energy_offset))) {
    out.solution.assign(sys.matrix.n, 0.0);
    out.homogenized = sys.energy_offset;
    IterationSample s;
    s.energy_value = sys.energy_offset;
    out.trace.samples.push_back(s);
    out.trace.converged = true;
    return out;
  }

  CgResult res = cg(op, sys.rhs, x0, opt);
  out.solution = std::move(res.x);
  out.homogenized = res.trace.samples.back().energy_value;
  out.trace = std::move(res.trace);
  return out;
}

void write_solution(const FemSpace& space, std::span<const double> u, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_solution: cannot open " + path);
  const PeriodicMesh& mesh = space.mesh();
  const int d = mesh.dim();
  const int n = mesh.cells_per_axis();

  out << "# periodic cell mesh, d=" << d << " n=" << n << " order=" << space.order() << "\n";
  out << "vertices " << mesh.vertex_count() << "\n";
  std::array<int, 3> idx{0, 0, 0};
  for (std::int64_t v = 0; v < mesh.vertex_count(); ++v) {
    for (int a = 0; a < d; ++a) out << (a ? " " : "") << -0.5 + static_cast<double>(idx[a]) / n;
    out << "\n";
    for (int a = 0; a < d; ++a) {
      if (++idx[a] < n) break;
      idx[a] = 0;
    }
  }

  out << "cells " << mesh.element_count() << "\n";
  std::array<std::array<int, 3>, 4> lattice{};
  for (std::int64_t e = 0; e < mesh.element_count(); ++e) {
    mesh.element_lattice(e, lattice);
    for (int v = 0; v <= d; ++v) {
      std::int64_t linear = 0;
      std::int64_t stride = 1;
      for (int a = 0; a < d; ++a) {
        linear += stride * (lattice[v][a] % n);
        stride *= n;
      }
      out << (v ? " " : "") << linear;
    }
    out << "\n";
  }

  out << "values " << u.size() << "\n";
  for (double v : u) out << v << "\n";
}

}  // namespace homog
