#include "pinn/sampling.hpp"

#include <stdexcept>

namespace pinn {

namespace {

// Joe-Kuo "new-joe-kuo-6" rows for dimensions 2..21: degree s, polynomial a,
// initial direction numbers m. Dimension 1 is the van der Corput sequence.
struct JoeKuoRow {
  int s;
  uint32_t a;
  std::array<uint32_t, 7> m;
};

constexpr JoeKuoRow kJoeKuo[kSobolMaxDims - 1] = {
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 15, 13, 25}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},
};

constexpr int kBits = 32;

}  // namespace

SobolSequence::SobolSequence(int dims) : dims_(dims) {
  if (dims < 1 || dims > kSobolMaxDims)
    throw std::invalid_argument("SobolSequence: dims must be in [1, " +
                                std::to_string(kSobolMaxDims) + "]");
  v_.resize(static_cast<size_t>(dims));
  x_.assign(static_cast<size_t>(dims), 0);
  for (int j = 0; j < dims; ++j) {
    auto& v = v_[static_cast<size_t>(j)];
    if (j == 0) {
      for (int i = 0; i < kBits; ++i) v[static_cast<size_t>(i)] = 1u << (31 - i);
      continue;
    }
    const JoeKuoRow& row = kJoeKuo[j - 1];
    int s = row.s;
    for (int i = 0; i < s && i < kBits; ++i)
      v[static_cast<size_t>(i)] = row.m[static_cast<size_t>(i)] << (31 - i);
    for (int i = s; i < kBits; ++i) {
      uint32_t vi = v[static_cast<size_t>(i - s)] ^ (v[static_cast<size_t>(i - s)] >> s);
      for (int k = 1; k <= s - 1; ++k)
        vi ^= ((row.a >> (s - 1 - k)) & 1u) * v[static_cast<size_t>(i - k)];
      v[static_cast<size_t>(i)] = vi;
    }
  }
}

void SobolSequence::skip(uint64_t n) {
  for (uint64_t i = 0; i < n; ++i) {
    int c = 0;
    uint64_t idx = index_;
    while (idx & 1u) {
      idx >>= 1;
      ++c;
    }
    for (int j = 0; j < dims_; ++j)
      x_[static_cast<size_t>(j)] ^= v_[static_cast<size_t>(j)][static_cast<size_t>(c)];
    ++index_;
  }
}

void SobolSequence::next(std::span<double> out) {
  skip(1);
  for (int j = 0; j < dims_; ++j)
    out[static_cast<size_t>(j)] = static_cast<double>(x_[static_cast<size_t>(j)]) * 0x1.0p-32;
}

std::vector<std::vector<double>> sobol_points(int n, int dims, uint64_t skip) {
  SobolSequence seq(dims);
  seq.skip(skip);
  std::vector<std::vector<double>> pts(static_cast<size_t>(n),
                                       std::vector<double>(static_cast<size_t>(dims)));
  for (auto& p : pts) seq.next(p);
  return pts;
}

std::vector<std::vector<double>> lhs_points(int n, int dims, uint64_t seed) {
  if (n < 1) throw std::invalid_argument("lhs_points: n must be positive");
  Rng rng(seed);
  std::vector<std::vector<double>> pts(static_cast<size_t>(n),
                                       std::vector<double>(static_cast<size_t>(dims)));
  std::vector<int> strata(static_cast<size_t>(n));
  for (int d = 0; d < dims; ++d) {
    for (int i = 0; i < n; ++i) strata[static_cast<size_t>(i)] = i;
    for (int i = n - 1; i > 0; --i) {  // Fisher-Yates with the stable Rng
      uint64_t j = rng.below(static_cast<uint64_t>(i + 1));
      std::swap(strata[static_cast<size_t>(i)], strata[j]);
    }
    for (int i = 0; i < n; ++i) {
      double lo = static_cast<double>(strata[static_cast<size_t>(i)]) / n;
      pts[static_cast<size_t>(i)][static_cast<size_t>(d)] = lo + rng.unit() / n;
    }
  }
  return pts;
}

std::vector<std::vector<double>> uniform_points(int n, int dims, Rng& rng) {
  std::vector<std::vector<double>> pts(static_cast<size_t>(n),
                                       std::vector<double>(static_cast<size_t>(dims)));
  for (auto& p : pts)
    for (auto& c : p) c = rng.unit();
  return pts;
}

}  // namespace pinn
