#pragma once

#include <cstdint>
#include <random>

#include "dissolve/types.hpp"

namespace dissolve {

// Deterministic random source. All variates are derived from raw mt19937_64
// output with fixed arithmetic (53-bit uniforms, Box-Muller gaussians), so a
// seed pins the stream regardless of standard library internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Uniform draw in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Standard normal draw.
  double gaussian();

  // Uniform integer in [0, bound).
  std::uint64_t uniform_index(std::uint64_t bound);

  Vector gaussian_vector(Index n);
  MatrixRM gaussian_matrix(Index rows, Index cols);

  // Child generator for stream `index`; children with distinct indices are
  // statistically independent and reproducible from the parent seed.
  Rng split(std::uint64_t index) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
  bool has_spare_{false};
  double spare_{0.0};
};

// Uniform sample from the closed ball of radius `radius` around `center`
// (radius scaled by U^(1/n) on a random direction).
Point sample_uniform_ball(const Point& center, double radius, Rng& rng);

// Matrix with orthonormal columns from the QR factorization of a gaussian
// matrix, sign-fixed so the R diagonal is nonnegative (deterministic in the
// seed). Requires rows >= cols >= 1.
MatrixRM random_orthonormal(Index rows, Index cols, Rng& rng);

}  // namespace dissolve
