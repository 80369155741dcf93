#include "homog/ffth.hpp"

#include <cmath>
#include <stdexcept>

#include "homog/common.hpp"

namespace homog {

namespace {

void check_macro(std::span<const double> macro, int d) {
  if (static_cast<int>(macro.size()) != d)
    throw std::invalid_argument("ffth: macroscopic vector dimension mismatch");
}

}  // namespace

void Projection::apply_fourier(FourierField& coeffs) const {
  const int d = shape_.dim();
  if (coeffs.components() != d || !(coeffs.shape() == shape_))
    throw std::invalid_argument("Projection: shape mismatch");
  std::array<double, 3> k{0.0, 0.0, 0.0};
  for_each_cell(shape_, [&](std::span<const int> idx, long cell) {
    bool active = true;
    double kk = 0.0;
    for (int a = 0; a < d; ++a) {
      const int ka = shape_.wrap(a, idx[a]);
      if (2 * std::abs(ka) >= active_.extent(a)) active = false;
      k[a] = ka;
      kk += k[a] * k[a];
    }
    if (!active || kk == 0.0) {
      for (int a = 0; a < d; ++a) coeffs.at(a, cell) = 0.0;
      return;
    }
    std::complex<double> kv{0.0, 0.0};
    for (int a = 0; a < d; ++a) kv += k[a] * coeffs.at(a, cell);
    kv /= kk;
    for (int a = 0; a < d; ++a) coeffs.at(a, cell) = k[a] * kv;
  });
}

GridField Projection::apply(const GridField& v) const {
  if (!(v.shape() == shape_) || v.components() != shape_.dim())
    throw std::invalid_argument("Projection: shape mismatch");
  FourierField coeffs = dft_forward(v);
  apply_fourier(coeffs);
  // Hermitian by construction: real input, even real blocks.
  return dft_inverse_unchecked(coeffs);
}

GridField project(const Projection& p, const GridField& v) { return p.apply(v); }

FfthOperator::FfthOperator(FfthVariant variant, GridShape n_grid, GridShape grid,
                           TensorGridField material)
    : variant_(variant),
      n_grid_(n_grid),
      grid_(grid),
      d_(grid.dim()),
      material_(std::move(material)),
      projection_(grid, n_grid) {
  mirror_.resize(grid_.cell_count());
  for_each_cell(grid_, [&](std::span<const int> idx, long cell) {
    long m = 0;
    long stride = 1;
    for (int a = 0; a < d_; ++a) {
      const int n = grid_.extent(a);
      m += stride * (idx[a] == 0 ? 0 : n - idx[a]);
      stride *= n;
    }
    mirror_[cell] = m;
  });
}

GridField FfthOperator::apply_projected(const GridField& ae) const {
  const long cells = grid_.cell_count();
  const double scale = 1.0 / static_cast<double>(cells);
  const int npack = (d_ + 1) / 2;

  // Pack components (0,1) [and 2 alone in 3-D] into complex arrays.
  std::vector<std::vector<std::complex<double>>> spec(npack);
  spec[0].resize(cells);
  {
    const double* c0 = ae.component(0);
    const double* c1 = ae.component(1);
    for (long i = 0; i < cells; ++i) spec[0][i] = {c0[i], c1[i]};
  }
  if (d_ == 3) {
    spec[1].resize(cells);
    const double* c2 = ae.component(2);
    for (long i = 0; i < cells; ++i) spec[1][i] = {c2[i], 0.0};
  }
  for (int s = 0; s < npack; ++s) fft::transform_all_axes(spec[s].data(), grid_.dims(), -1);

  // Projector sweep: unpack true spectra through the mirror, apply the
  // rank-1 block, repack. The forward normalisation 1/|N| rides along.
  std::vector<std::vector<std::complex<double>>> out(npack);
  for (int s = 0; s < npack; ++s) out[s].assign(cells, {0.0, 0.0});

  const GridShape& active = projection_.active();
  std::array<double, 3> k{0.0, 0.0, 0.0};
  for_each_cell(grid_, [&](std::span<const int> idx, long cell) {
    bool live = true;
    double kk = 0.0;
    for (int a = 0; a < d_; ++a) {
      const int ka = grid_.wrap(a, idx[a]);
      if (2 * std::abs(ka) >= active.extent(a)) live = false;
      k[a] = ka;
      kk += k[a] * k[a];
    }
    if (!live || kk == 0.0) return;  // output stays zero

    const long mc = mirror_[cell];
    const std::complex<double> z0 = spec[0][cell];
    const std::complex<double> z0m = std::conj(spec[0][mc]);
    std::array<std::complex<double>, 3> f{};
    f[0] = 0.5 * (z0 + z0m);
    f[1] = std::complex<double>{0.0, -0.5} * (z0 - z0m);
    if (d_ == 3) f[2] = spec[1][cell];

    std::complex<double> kf{0.0, 0.0};
    for (int a = 0; a < d_; ++a) kf += k[a] * f[a];
    kf *= scale / kk;

    // Repacked output: W0 + i W1 = (k0 + i k1) kf.
    out[0][cell] = std::complex<double>{k[0] * kf.real() - k[1] * kf.imag(),
                                        k[0] * kf.imag() + k[1] * kf.real()};
    if (d_ == 3) out[1][cell] = k[2] * kf;
  });

  for (int s = 0; s < npack; ++s) fft::transform_all_axes(out[s].data(), grid_.dims(), +1);

  GridField result(grid_, d_);
  {
    double* c0 = result.component(0);
    double* c1 = result.component(1);
    for (long i = 0; i < cells; ++i) {
      c0[i] = out[0][i].real();
      c1[i] = out[0][i].imag();
    }
  }
  if (d_ == 3) {
    double* c2 = result.component(2);
    for (long i = 0; i < cells; ++i) c2[i] = out[1][i].real();
  }
  return result;
}

FfthOperator FfthOperator::make(const MaterialSpec& spec, const GridShape& n_grid,
                                FfthVariant variant) {
  if (n_grid.dim() != spec.dim())
    throw std::invalid_argument("FfthOperator: grid dimension mismatch");
  if (!n_grid.all_odd())
    throw std::invalid_argument("FfthOperator: grid extents must be odd");
  if (variant == FfthVariant::Ga) {
    return FfthOperator(variant, n_grid, n_grid.refined_double(),
                        exact_double_grid_field(spec, n_grid));
  }
  return FfthOperator(variant, n_grid, n_grid, sample_on_grid(spec, n_grid));
}

GridField FfthOperator::apply(const GridField& e) const {
  if (!(e.shape() == grid_))
    throw std::invalid_argument("FfthOperator::apply: field lives on the wrong grid");
  GridField ae = tensor_apply(material_, e);
  ++matvecs_;
  ++fft_pairs_;
  return apply_projected(ae);
}

GridField FfthOperator::rhs(std::span<const double> macro) const {
  check_macro(macro, d_);
  GridField e = GridField::constant(grid_, macro);
  GridField out = apply_projected(tensor_apply(material_, e));
  for (auto& v : out.data()) v = -v;
  return out;
}

double FfthOperator::energy_offset(std::span<const double> macro) const {
  check_macro(macro, d_);
  GridField e = GridField::constant(grid_, macro);
  return grid_inner(tensor_apply(material_, e), e);
}

LinearOperator FfthOperator::linear_operator() const {
  LinearOperator op;
  const long cells = grid_.cell_count();
  op.dim = static_cast<std::int64_t>(d_) * cells;
  op.apply = [this](std::span<const double> x, std::span<double> y) {
    GridField e(grid_, d_);
    std::copy(x.begin(), x.end(), e.data().begin());
    GridField out = apply(e);
    std::copy(out.data().begin(), out.data().end(), y.begin());
  };
  const double scale = 1.0 / static_cast<double>(cells);
  op.inner = [scale](std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s * scale;
  };
  return op;
}

FfthSolveResult solve_ffth(const MaterialSpec& spec, const GridShape& n_grid, FfthVariant variant,
                           std::span<const double> macro, const CgOptions& options) {
  FfthOperator ffth = FfthOperator::make(spec, n_grid, variant);
  LinearOperator op = ffth.linear_operator();

  GridField b = ffth.rhs(macro);
  std::vector<double> x0(op.dim, 0.0);

  CgOptions opt = options;
  const double offset = ffth.energy_offset(macro);
  opt.energy_offset = offset;

  // A homogeneous medium leaves only transform roundoff in the right-hand
  // side; the solution is the zero field.
  if (std::sqrt(grid_inner(b, b)) <= 1e-14 * std::max(1.0, std::abs(offset))) {
    FfthSolveResult out;
    out.minimiser = GridField(ffth.grid(), ffth.dim());
    out.homogenized = offset;
    IterationSample s;
    s.residual_norm = 0.0;
    s.energy_value = offset;
    out.trace.samples.push_back(s);
    out.trace.converged = true;
    return out;
  }

  CgResult res = cg(op, b.data(), x0, opt);

  FfthSolveResult out;
  out.minimiser = GridField(ffth.grid(), ffth.dim());
  std::copy(res.x.begin(), res.x.end(), out.minimiser.data().begin());
  out.homogenized = res.trace.samples.back().energy_value;
  out.trace = std::move(res.trace);
  return out;
}

double homogenized_value_ga(const MaterialSpec& spec, const GridShape& n_grid, const GridField& e,
                            std::span<const double> macro) {
  check_macro(macro, spec.dim());
  const GridShape dbl = n_grid.refined_double();
  if (!(e.shape() == dbl))
    throw std::invalid_argument("homogenized_value_ga: field must live on the double grid");
  TensorGridField material = exact_double_grid_field(spec, n_grid);
  GridField total = e;
  for (int a = 0; a < spec.dim(); ++a) {
    double* p = total.component(a);
    for (long i = 0; i < total.cells(); ++i) p[i] += macro[a];
  }
  return grid_inner(tensor_apply(material, total), total);
}

GridField expand_to_double_grid(const GridField& e) {
  const GridShape n_grid = e.shape();
  const GridShape dbl = n_grid.refined_double();
  FourierField coeffs = dft_forward(e);
  FourierField padded(dbl, e.components());
  const int d = n_grid.dim();
  for_each_cell(n_grid, [&](std::span<const int> idx, long cell) {
    long target = 0;
    long stride = 1;
    for (int a = 0; a < d; ++a) {
      target += stride * dbl.storage(a, n_grid.wrap(a, idx[a]));
      stride *= dbl.extent(a);
    }
    for (int c = 0; c < e.components(); ++c) padded.at(c, target) = coeffs.at(c, cell);
  });
  return dft_inverse_unchecked(padded);
}

double gani_posteriori_bound(const MaterialSpec& spec, const GridShape& n_grid,
                             const GridField& e_gani, std::span<const double> macro) {
  if (!(e_gani.shape() == n_grid))
    throw std::invalid_argument("gani_posteriori_bound: minimiser must live on the single grid");
  return homogenized_value_ga(spec, n_grid, expand_to_double_grid(e_gani), macro);
}

LanczosResult ffth_condition_estimate(const FfthOperator& op, int iterations, std::uint64_t seed) {
  LinearOperator lin = op.linear_operator();
  const GridShape grid = op.grid();
  const int d = op.dim();
  const Projection& p = op.projection();

  SplitMix64 rng(seed);
  GridField start(grid, d);
  for (auto& v : start.data()) v = rng.symmetric();
  start = p.apply(start);

  auto purify = [&](std::span<double> x) {
    GridField f(grid, d);
    std::copy(x.begin(), x.end(), f.data().begin());
    GridField pf = p.apply(f);
    std::copy(pf.data().begin(), pf.data().end(), x.begin());
  };
  return lanczos_extremes(lin, iterations, seed, start.data(), purify);
}

std::int64_t system_size(int d, std::int64_t n, FfthVariant) {
  std::int64_t p = 1;
  for (int a = 0; a < d; ++a) p *= n;
  return d * p;
}

std::int64_t double_grid_system_size(int d, std::int64_t n) {
  std::int64_t p = 1;
  for (int a = 0; a < d; ++a) p *= 2 * n - 1;
  return d * p;
}

std::int64_t independent_dofs(int d, std::int64_t n) {
  std::int64_t p = 1;
  for (int a = 0; a < d; ++a) p *= n;
  return p - 1;
}

}  // namespace homog
