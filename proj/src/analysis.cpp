#include "homog/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace homog {

namespace {

std::int64_t ipow(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace

const char* method_label(Method m) {
  switch (m) {
    case Method::FfthGa: return "ffth-ga";
    case Method::FfthGaNi: return "ffth-gani";
    case Method::FfthGaNiBound: return "ffth-gani-bound";
    case Method::FemP1: return "fem-p1";
    case Method::FemP2: return "fem-p2";
  }
  return "?";
}

double energetic_error(double value, double reference) { return value - reference; }

std::int64_t memory_count_ffth(Method m, int d, std::int64_t n) {
  const std::int64_t nd = ipow(n, d);
  if (m == Method::FfthGa)
    return 2 * d * nd + d * d * nd + d * d * ipow(2 * n - 1, d);
  if (m == Method::FfthGaNi || m == Method::FfthGaNiBound)
    return (2 * d + 2 * d * d) * nd;
  throw std::invalid_argument("memory_count_ffth: not a spectral method");
}

std::int64_t memory_count_fem(const CsrStats& stats) {
  return 3 * stats.rank + 2 * stats.nnz_symmetric;
}

double matvec_ops_ffth(Method m, int d, std::int64_t n) {
  const double nd = static_cast<double>(ipow(n, d));
  if (m == Method::FfthGa) {
    const double dbl = static_cast<double>(ipow(2 * n - 1, d));
    return d * d * dbl + d * d * nd + 5.0 * d * dbl * std::log2(dbl);
  }
  if (m == Method::FfthGaNi || m == Method::FfthGaNiBound)
    return 2.0 * d * d * nd + 5.0 * d * nd * std::log2(nd);
  throw std::invalid_argument("matvec_ops_ffth: not a spectral method");
}

double matvec_ops_fem(const CsrStats& stats, bool preconditioned) {
  double ops = 2.0 * static_cast<double>(stats.nnz_symmetric);
  if (preconditioned) ops += 2.0 * static_cast<double>(stats.nnz_symmetric);
  return ops;
}

namespace {

struct Model {
  // r_i = value_i - (a + c n_i^(-2s)); returns residuals and the Jacobian
  // w.r.t. (a, s, c).
  static void residuals(std::span<const FitPoint> pts, double a, double s, double c,
                        std::vector<double>& r, std::vector<std::array<double, 3>>* jac) {
    r.resize(pts.size());
    if (jac) jac->resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double pw = std::pow(pts[i].n, -2.0 * s);
      r[i] = pts[i].value - a - c * pw;
      if (jac) {
        (*jac)[i][0] = -1.0;
        (*jac)[i][1] = 2.0 * c * std::log(pts[i].n) * pw;
        (*jac)[i][2] = -pw;
      }
    }
  }

  static double sum_sq(const std::vector<double>& r) {
    double s = 0.0;
    for (double v : r) s += v * v;
    return s;
  }
};

// Solve the damped 3x3 normal equations (J^T J + lambda diag) step = -J^T r.
bool lm_step(const std::vector<std::array<double, 3>>& jac, const std::vector<double>& r,
             double lambda, std::array<double, 3>& step) {
  double jtj[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  double jtr[3] = {0, 0, 0};
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (int a = 0; a < 3; ++a) {
      jtr[a] += jac[i][a] * r[i];
      for (int b = 0; b < 3; ++b) jtj[a][b] += jac[i][a] * jac[i][b];
    }
  }
  for (int a = 0; a < 3; ++a) jtj[a][a] *= 1.0 + lambda;
  // Cramer's rule.
  const double det = jtj[0][0] * (jtj[1][1] * jtj[2][2] - jtj[1][2] * jtj[2][1]) -
                     jtj[0][1] * (jtj[1][0] * jtj[2][2] - jtj[1][2] * jtj[2][0]) +
                     jtj[0][2] * (jtj[1][0] * jtj[2][1] - jtj[1][1] * jtj[2][0]);
  if (det == 0.0 || !std::isfinite(det)) return false;
  double m[3][4];
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) m[a][b] = jtj[a][b];
    m[a][3] = -jtr[a];
  }
  // Gaussian elimination on the tiny system.
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int row = col + 1; row < 3; ++row)
      if (std::abs(m[row][col]) > std::abs(m[piv][col])) piv = row;
    if (m[piv][col] == 0.0) return false;
    if (piv != col)
      for (int j = 0; j < 4; ++j) std::swap(m[col][j], m[piv][j]);
    for (int row = col + 1; row < 3; ++row) {
      const double f = m[row][col] / m[col][col];
      for (int j = col; j < 4; ++j) m[row][j] -= f * m[col][j];
    }
  }
  for (int row = 2; row >= 0; --row) {
    double s = m[row][3];
    for (int j = row + 1; j < 3; ++j) s -= m[row][j] * step[j];
    step[row] = s / m[row][row];
  }
  return true;
}

}  // namespace

FitResult fit_reference(std::span<const FitPoint> points) {
  if (points.size() < 3)
    throw std::invalid_argument("fit_reference: need at least three points");
  std::vector<FitPoint> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const FitPoint& a, const FitPoint& b) { return a.n < b.n; });

  FitResult result;
  result.exactly_determined = pts.size() == 3;
  for (const auto& p : pts) result.grids.push_back(p.n);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    if (!(pts[i].value > pts[i + 1].value)) result.warn_nonmonotone = true;

  // Initial guess: crude end-point extrapolation for the limit, a log-log
  // fit of successive differences for the rate.
  const std::size_t m = pts.size();
  double a = 2.0 * pts[m - 1].value - pts[m - 2].value;
  double s = 1.0;
  {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const double diff = pts[i].value - pts[i + 1].value;
      if (diff > 0.0) {
        lx.push_back(std::log(pts[i].n));
        ly.push_back(std::log(diff));
      }
    }
    if (lx.size() >= 2) {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
      }
      const double denom = lx.size() * sxx - sx * sx;
      if (denom != 0.0) {
        const double slope = (lx.size() * sxy - sx * sy) / denom;
        s = std::clamp(-slope / 2.0, 0.05, 10.0);
      }
    }
  }
  double c = (pts[0].value - a) * std::pow(pts[0].n, 2.0 * s);

  std::vector<double> r;
  std::vector<std::array<double, 3>> jac;
  Model::residuals(pts, a, s, c, r, &jac);
  double cost = Model::sum_sq(r);
  double lambda = 1e-6;

  for (int it = 0; it < 200; ++it) {
    result.iterations = it + 1;
    Model::residuals(pts, a, s, c, r, &jac);
    // Gradient of the cost; stop at stationarity.
    double g[3] = {0, 0, 0};
    for (std::size_t i = 0; i < r.size(); ++i)
      for (int q = 0; q < 3; ++q) g[q] += 2.0 * jac[i][q] * r[i];
    if (std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]) <= 1e-12) break;

    bool stepped = false;
    for (int attempt = 0; attempt < 60; ++attempt) {
      std::array<double, 3> step{};
      if (!lm_step(jac, r, lambda, step)) {
        lambda *= 10.0;
        continue;
      }
      const double a2 = a + step[0], s2 = s + step[1], c2 = c + step[2];
      if (!(s2 > 0.0)) {
        lambda *= 10.0;
        continue;
      }
      std::vector<double> r2;
      Model::residuals(pts, a2, s2, c2, r2, nullptr);
      const double cost2 = Model::sum_sq(r2);
      if (cost2 <= cost) {
        a = a2;
        s = s2;
        c = c2;
        cost = cost2;
        lambda = std::max(lambda * 0.25, 1e-14);
        stepped = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!stepped) break;
  }

  result.a_eff = a;
  result.rate = s;
  result.c = c;
  result.residual_norm = std::sqrt(cost);
  return result;
}

FitResult extrapolate_reference(std::span<const FitPoint> points) {
  if (points.size() <= 3) return fit_reference(points);
  std::vector<FitPoint> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const FitPoint& a, const FitPoint& b) { return a.n < b.n; });
  return fit_reference(std::span<const FitPoint>(pts).last(3));
}

std::vector<double> algebraic_error_trace(const IterationTrace& trace, double converged_value) {
  std::vector<double> out;
  out.reserve(trace.samples.size());
  for (const auto& s : trace.samples)
    out.push_back(std::max(0.0, s.energy_value - converged_value));
  return out;
}

std::optional<double> reference_value_for(int d, Geometry geometry, double rho) {
  struct Entry {
    int d;
    Geometry g;
    double rho;
    double value;
  };
  // Extrapolated on fine schedules; the acceptance suite reproduces them.
  static const Entry table[] = {
      {2, Geometry::Square, 10.0, 3.0416470728},
      {2, Geometry::Pyramid, 10.0, 3.6685617065},
      {3, Geometry::Square, 10.0, 2.9072530862},
      {3, Geometry::Pyramid, 10.0, 2.9870480854},
      {2, Geometry::Square, 100.0, 3.6931324468},
      {2, Geometry::Pyramid, 100.0, 14.482810295},
      {3, Geometry::Square, 100.0, 3.6418887304},
      {3, Geometry::Pyramid, 100.0, 9.1891217513},
  };
  for (const auto& e : table)
    if (e.d == d && e.g == geometry && e.rho == rho) return e.value;
  return std::nullopt;
}

void finalize_error(ExperimentReport& report) {
  report.sq_error = energetic_error(report.value, report.reference);
  report.clamped = false;
  report.bound_violation = false;
  if (report.method == Method::FfthGaNi) return;  // carries no bound claim
  if (report.sq_error < 0.0) {
    if (report.sq_error > -1e-9) {
      report.sq_error = 0.0;
      report.clamped = true;
    } else {
      report.bound_violation = true;
    }
  }
}

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_rows(std::ofstream& out, std::span<const ExperimentReport> reports) {
  out << "method,d,N,p,rho,geometry,value,ref,sq_error,size,memory,ops,kappa,iters\n";
  for (const auto& r : reports) {
    out << method_label(r.method) << ',' << r.d << ',' << r.n << ',' << r.order << ','
        << format_double(r.rho) << ',' << geometry_label(r.geometry) << ','
        << format_double(r.value) << ',' << format_double(r.reference) << ','
        << format_double(r.sq_error) << ',' << r.size << ',' << r.memory << ','
        << format_double(r.ops) << ',' << format_double(r.kappa) << ',' << r.iterations << '\n';
  }
}

}  // namespace

void emit_reports(std::span<const ExperimentReport> reports, std::span<const TraceSeries> traces,
                  const std::string& directory, const std::string& hash) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw std::runtime_error("emit_reports: cannot create " + directory);

  auto open = [&](const std::string& name) {
    std::ofstream out(fs::path(directory) / name);
    if (!out) throw std::runtime_error("emit_reports: cannot write " + name + " in " + directory);
    return out;
  };

  {
    auto out = open("report.csv");
    write_rows(out, reports);
  }
  // Per-figure views share the master schema; rows are filtered by what the
  // view plots (every run carries size/memory/ops, conditioning rows carry a
  // finite kappa).
  {
    auto out = open("error_vs_size.csv");
    write_rows(out, reports);
  }
  {
    auto out = open("error_vs_memory.csv");
    write_rows(out, reports);
  }
  {
    auto out = open("error_vs_ops.csv");
    write_rows(out, reports);
  }
  {
    std::vector<ExperimentReport> cond;
    for (const auto& r : reports)
      if (!std::isnan(r.kappa)) cond.push_back(r);
    auto out = open("cond_vs_dof.csv");
    write_rows(out, cond);
  }
  {
    auto out = open("error_vs_iteration.csv");
    out << "method,d,N,p,rho,geometry,k,residual,value,alg_sq_error\n";
    for (const auto& t : traces) {
      for (std::size_t k = 0; k < t.values.size(); ++k) {
        out << method_label(t.run.method) << ',' << t.run.d << ',' << t.run.n << ','
            << t.run.order << ',' << format_double(t.run.rho) << ','
            << geometry_label(t.run.geometry) << ',' << k << ','
            << format_double(t.residuals[k]) << ',' << format_double(t.values[k]) << ','
            << format_double(t.algebraic_errors[k]) << '\n';
      }
    }
  }

  nlohmann::json summary;
  summary["config_hash"] = hash;
  summary["row_count"] = reports.size();
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json row;
    row["method"] = method_label(r.method);
    row["d"] = r.d;
    row["N"] = r.n;
    row["p"] = r.order;
    row["rho"] = r.rho;
    row["geometry"] = geometry_label(r.geometry);
    row["value"] = r.value;
    row["ref"] = r.reference;
    row["ref_source"] = r.reference_source;
    row["sq_error"] = r.sq_error;
    row["clamped"] = r.clamped;
    row["bound_violation"] = r.bound_violation;
    row["size"] = r.size;
    row["memory"] = r.memory;
    row["ops"] = r.ops;
    if (!std::isnan(r.kappa)) row["kappa"] = r.kappa;
    row["iters"] = r.iterations;
    rows.push_back(row);
  }
  summary["rows"] = rows;
  auto out = open("summary.json");
  out << summary.dump(2) << "\n";
}

std::string config_hash(const std::string& canonical_text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical_text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace homog
