#include "homog/fft.hpp"

#include <cassert>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace homog::fft {

namespace {

constexpr int kLargestDirectPrime = 31;

std::vector<int> factorize(int n) {
  std::vector<int> factors;
  for (int p = 2; static_cast<long>(p) * p <= n; ++p) {
    while (n % p == 0) {
      factors.push_back(p);
      n /= p;
    }
  }
  if (n > 1) factors.push_back(n);
  return factors;
}

bool is_5_smooth(int n) {
  for (int p : {2, 3, 5})
    while (n % p == 0) n /= p;
  return n == 1;
}

int next_5_smooth(int n) {
  while (!is_5_smooth(n)) ++n;
  return n;
}

}  // namespace

Fft1d::Fft1d(int n, int dir) : n_(n), dir_(dir) {
  if (n < 1) throw std::invalid_argument("Fft1d: length must be positive");
  if (dir != -1 && dir != 1) throw std::invalid_argument("Fft1d: direction must be +1 or -1");

  factors_ = factorize(n);
  for (int p : factors_) {
    if (p > kLargestDirectPrime) {
      bluestein_ = true;
      break;
    }
  }

  if (!bluestein_) {
    twiddle_.resize(n);
    for (int j = 0; j < n; ++j)
      twiddle_[j] = std::polar(1.0, dir * 2.0 * std::numbers::pi * j / n);
    return;
  }

  // Bluestein: X[k] = chirp[k] * (a (*) b)[k] with a[j] = x[j] chirp[j] and
  // b[j] = conj(chirp[|j|]). The quadratic phase j^2/(2n) is reduced modulo
  // 2n in exact integer arithmetic before evaluating the exponential.
  padded_ = next_5_smooth(2 * n - 1);
  chirp_.resize(n);
  for (long j = 0; j < n; ++j) {
    long q = (j * j) % (2L * n);
    chirp_[j] = std::polar(1.0, dir * std::numbers::pi * static_cast<double>(q) / n);
  }
  pad_fwd_ = std::make_unique<Fft1d>(padded_, -1);
  pad_inv_ = std::make_unique<Fft1d>(padded_, +1);

  std::vector<Complex> c(padded_, Complex{0.0, 0.0});
  c[0] = std::conj(chirp_[0]);
  for (int j = 1; j < n; ++j) {
    c[j] = std::conj(chirp_[j]);
    c[padded_ - j] = std::conj(chirp_[j]);
  }
  Workspace ws;
  pad_fwd_->run(c.data(), ws);
  chirp_fft_ = std::move(c);
}

void Fft1d::run(Complex* line, Workspace& ws) const {
  if (n_ == 1) return;
  if (bluestein_)
    run_bluestein(line, ws);
  else
    run_smooth(line, ws);
}

void Fft1d::run_smooth(Complex* line, Workspace& ws) const {
  ws.a.assign(line, line + n_);
  ws.b.resize(n_);
  recurse(ws.a.data(), 1, line, n_, 0, ws.b.data());
}

// Decimation in time. The input is read with the given stride, the result is
// written contiguously into out. A single scratch buffer of top-level length
// is safe: a combine at length n runs only after its children (which used
// scratch[0 .. n/p)) have finished.
//
// Merge identity: X[t + s m] = sum_q w_n^(q t) w_p^(q s) Y_q[t]. The first
// factor indexes the top-level table as q t (n_/n) without reduction since
// q t < n; the second cycles through the p-th roots with small-integer
// index arithmetic. Radix 2 and 3 are unrolled.
void Fft1d::recurse(const Complex* in, long stride, Complex* out, int n, std::size_t level,
                    Complex* scratch) const {
  if (n == 1) {
    out[0] = in[0];
    return;
  }
  const int p = factors_[level];
  const int m = n / p;
  for (int q = 0; q < p; ++q) recurse(in + q * stride, stride * p, out + q * m, m, level + 1, scratch);

  const long mult = n_ / n;
  if (p == 2) {
    for (int t = 0; t < m; ++t) {
      const Complex y0 = out[t];
      const Complex z1 = out[m + t] * twiddle_[static_cast<long>(t) * mult];
      scratch[t] = y0 + z1;
      scratch[m + t] = y0 - z1;
    }
  } else if (p == 3) {
    const double s3 = dir_ * 0.8660254037844386467637232;  // sin(2 pi / 3)
    for (int t = 0; t < m; ++t) {
      const Complex y0 = out[t];
      const Complex z1 = out[m + t] * twiddle_[static_cast<long>(t) * mult];
      const Complex z2 = out[2 * m + t] * twiddle_[static_cast<long>(2 * t) * mult];
      const Complex u = z1 + z2;
      const Complex v = z1 - z2;
      const Complex rot{-s3 * v.imag(), s3 * v.real()};  // i s3 v
      const Complex w = y0 - 0.5 * u;
      scratch[t] = y0 + u;
      scratch[m + t] = w + rot;
      scratch[2 * m + t] = w - rot;
    }
  } else {
    // Generic prime: z_q = w_n^(q t) Y_q[t], then a p-point DFT over s with
    // the q s index tracked incrementally mod p.
    const long proot = n_ / p;  // stride of w_p in the top-level table
    Complex z[kLargestDirectPrime + 1];
    for (int t = 0; t < m; ++t) {
      z[0] = out[t];
      for (int q = 1; q < p; ++q)
        z[q] = out[static_cast<long>(q) * m + t] * twiddle_[static_cast<long>(q) * t * mult];
      for (int s = 0; s < p; ++s) {
        Complex acc = z[0];
        int idx = 0;
        for (int q = 1; q < p; ++q) {
          idx += s;
          if (idx >= p) idx -= p;
          acc += z[q] * twiddle_[static_cast<long>(idx) * proot];
        }
        scratch[t + static_cast<long>(s) * m] = acc;
      }
    }
  }
  std::copy(scratch, scratch + n, out);
}

void Fft1d::run_bluestein(Complex* line, Workspace& ws) const {
  ws.c.assign(padded_, Complex{0.0, 0.0});
  for (int j = 0; j < n_; ++j) ws.c[j] = line[j] * chirp_[j];

  pad_fwd_->run(ws.c.data(), ws);
  for (int j = 0; j < padded_; ++j) ws.c[j] *= chirp_fft_[j];
  pad_inv_->run(ws.c.data(), ws);

  const double scale = 1.0 / padded_;
  for (int k = 0; k < n_; ++k) line[k] = ws.c[k] * scale * chirp_[k];
}

std::shared_ptr<const Fft1d> plan(int n, int dir) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const Fft1d>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto key = std::make_pair(n, dir);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto p = std::make_shared<const Fft1d>(n, dir);
  cache.emplace(key, p);
  return p;
}

void transform_all_axes(Complex* data, std::span<const int> dims, int dir) {
  long total = 1;
  for (int d : dims) total *= d;
  if (total == 0) return;

  long stride = 1;
  for (std::size_t axis = 0; axis < dims.size(); ++axis) {
    const int n = dims[axis];
    if (n > 1) {
      auto pl = plan(n, dir);
      Fft1d::Workspace ws;
      std::vector<Complex> buf(n);
      const long inner = stride;
      const long outer = total / (stride * n);
      for (long o = 0; o < outer; ++o) {
        for (long i = 0; i < inner; ++i) {
          Complex* base = data + o * stride * n + i;
          if (inner == 1) {
            pl->run(base, ws);
          } else {
            for (int j = 0; j < n; ++j) buf[j] = base[j * stride];
            pl->run(buf.data(), ws);
            for (int j = 0; j < n; ++j) base[j * stride] = buf[j];
          }
        }
      }
    }
    stride *= n;
  }
}

}  // namespace homog::fft
