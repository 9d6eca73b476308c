#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "pinn/sampling.hpp"

using namespace pinn;

namespace {

// Brute-force star discrepancy over the anchored-box family with corners on
// an m x m lattice.
double star_discrepancy_2d(const std::vector<std::vector<double>>& pts, int m) {
  double n = static_cast<double>(pts.size());
  double worst = 0.0;
  for (int i = 1; i <= m; ++i) {
    for (int j = 1; j <= m; ++j) {
      double a = static_cast<double>(i) / m;
      double b = static_cast<double>(j) / m;
      size_t inside = 0;
      for (const auto& p : pts)
        if (p[0] < a && p[1] < b) ++inside;
      worst = std::max(worst, std::fabs(static_cast<double>(inside) / n - a * b));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("sobol: first three 1-d points are 0.5, 0.75, 0.25") {
  auto pts = sobol_points(3, 1, 0);
  CHECK(pts[0][0] == doctest::Approx(0.5));
  CHECK(pts[1][0] == doctest::Approx(0.75));
  CHECK(pts[2][0] == doctest::Approx(0.25));
}

TEST_CASE("sobol: skip continues the same stream") {
  auto all = sobol_points(10, 3, 0);
  auto tail = sobol_points(6, 3, 4);
  for (int i = 0; i < 6; ++i) CHECK(tail[static_cast<size_t>(i)] == all[static_cast<size_t>(i + 4)]);

  SobolSequence stream(3);
  std::vector<double> p(3);
  for (int i = 0; i < 10; ++i) {
    stream.next(p);
    CHECK(p == all[static_cast<size_t>(i)]);
  }
}

TEST_CASE("sobol: all points in [0,1)^d and distinct per dimension count") {
  for (int d : {1, 2, 5, 13, 21}) {
    auto pts = sobol_points(128, d, 0);
    for (const auto& p : pts)
      for (double c : p) {
        CHECK(c >= 0.0);
        CHECK(c < 1.0);
      }
  }
  CHECK_THROWS(sobol_points(4, 22, 0));
}

TEST_CASE("sobol: first 2^k block hits every dyadic stratum once per axis") {
  auto pts = sobol_points(16, 2, 0);  // indices 1..16
  for (int axis = 0; axis < 2; ++axis) {
    std::set<int> bins;
    for (const auto& p : pts) bins.insert(static_cast<int>(p[static_cast<size_t>(axis)] * 16));
    // indices 1..15 fill 15 of 16 strata; index 16 duplicates one
    CHECK(bins.size() >= 15);
  }
}

TEST_CASE("sobol: lower star discrepancy than a fixed-seed uniform sample") {
  auto sob = sobol_points(256, 2, 0);
  Rng rng(2024);
  auto uni = uniform_points(256, 2, rng);
  double ds = star_discrepancy_2d(sob, 64);
  double du = star_discrepancy_2d(uni, 64);
  CHECK(ds < du);
}

TEST_CASE("lhs: one point per stratum, flat marginal histogram, deterministic") {
  auto pts = lhs_points(4, 1, 7);
  std::vector<double> xs;
  for (const auto& p : pts) xs.push_back(p[0]);
  std::sort(xs.begin(), xs.end());
  for (int i = 0; i < 4; ++i) {
    CHECK(xs[static_cast<size_t>(i)] >= i / 4.0);
    CHECK(xs[static_cast<size_t>(i)] < (i + 1) / 4.0);
  }

  auto a = lhs_points(32, 3, 99);
  auto b = lhs_points(32, 3, 99);
  CHECK(a == b);
  auto c = lhs_points(32, 3, 100);
  CHECK(a != c);

  // exactly flat histogram with n bins on every axis
  for (int axis = 0; axis < 3; ++axis) {
    std::vector<int> hist(32, 0);
    for (const auto& p : a) hist[static_cast<size_t>(p[static_cast<size_t>(axis)] * 32)]++;
    for (int h : hist) CHECK(h == 1);
  }
}
