#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace homog {

// Thrown when a DFT coefficient set that should represent a real field
// violates Hermitian symmetry.
class SymmetryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when an element straddles a material interface that the mesh was
// required to resolve.
class NonConformingMeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown on a nonpositive pivot in an incomplete factorization.
class FactorizationError : public std::runtime_error {
 public:
  FactorizationError(const std::string& what, long row) : std::runtime_error(what), row(row) {}
  long row;
};

// Deterministic, platform-independent pseudo random stream. Used everywhere a
// seed appears in the public interface so that reruns are bit-reproducible.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in [-1, 1).
  double symmetric() { return 2.0 * uniform() - 1.0; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next() % n; }
};

}  // namespace homog
