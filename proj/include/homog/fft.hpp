#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace homog::fft {

using Complex = std::complex<double>;

/**
 * One-dimensional complex transform of fixed length and direction,
 *
 *   dir = -1:  X[k] = sum_j x[j] exp(-2 pi i j k / n)
 *   dir = +1:  X[k] = sum_j x[j] exp(+2 pi i j k / n)
 *
 * with no scaling in either direction.
 *
 * Lengths with only small prime factors run through a mixed-radix
 * Cooley-Tukey recursion; lengths containing a large prime factor (the
 * double grids 2N-1 are frequently prime) fall back to Bluestein's chirp-z
 * algorithm on a 5-smooth padded length.
 *
 * Plans are immutable after construction. run() takes a caller-owned
 * workspace, so one plan can serve several threads concurrently.
 */
class Fft1d {
 public:
  struct Workspace {
    std::vector<Complex> a, b, c;
  };

  Fft1d(int n, int dir);

  int length() const { return n_; }
  int direction() const { return dir_; }

  void run(Complex* line, Workspace& ws) const;

 private:
  void run_smooth(Complex* line, Workspace& ws) const;
  void run_bluestein(Complex* line, Workspace& ws) const;
  void recurse(const Complex* in, long stride, Complex* out, int n, std::size_t level,
               Complex* scratch) const;

  int n_;
  int dir_;
  bool bluestein_ = false;
  std::vector<int> factors_;
  std::vector<Complex> twiddle_;  // twiddle_[j] = exp(dir * 2 pi i j / n)

  // Bluestein state: padded length, chirp, and the forward transform of the
  // wrapped conjugate chirp.
  int padded_ = 0;
  std::vector<Complex> chirp_;
  std::vector<Complex> chirp_fft_;
  std::unique_ptr<Fft1d> pad_fwd_, pad_inv_;
};

// Shared, mutex-guarded plan cache.
std::shared_ptr<const Fft1d> plan(int n, int dir);

// In-place transform along every axis of a d-dimensional array stored with
// axis 0 fastest. No scaling.
void transform_all_axes(Complex* data, std::span<const int> dims, int dir);

}  // namespace homog::fft
