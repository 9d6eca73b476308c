#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace pinn {

inline constexpr int kSobolMaxDims = 21;

/// Gray-code Sobol stream with Joe-Kuo direction numbers. Point index starts
/// at 1; the origin (index 0) is never emitted.
class SobolSequence {
 public:
  explicit SobolSequence(int dims);

  void skip(uint64_t n);
  void next(std::span<double> out);
  uint64_t index() const { return index_; }

 private:
  int dims_;
  uint64_t index_ = 0;
  std::vector<std::array<uint32_t, 32>> v_;
  std::vector<uint32_t> x_;
};

/// n Sobol points in [0,1)^dims starting at stream index skip+1.
std::vector<std::vector<double>> sobol_points(int n, int dims, uint64_t skip);

/// Deterministic uniform draws used across the library (std distributions are
/// not bit-stable across platforms).
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  uint64_t below(uint64_t n) { return eng_() % n; }

 private:
  std::mt19937_64 eng_;
};

/// Latin hypercube: each axis is split into n strata holding exactly one
/// coordinate, jittered uniformly inside its stratum.
std::vector<std::vector<double>> lhs_points(int n, int dims, uint64_t seed);

std::vector<std::vector<double>> uniform_points(int n, int dims, Rng& rng);

}  // namespace pinn
