#include "pinn/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace pinn {

namespace {

// QUADPACK dqk15 nodes/weights on [-1,1]. Nodes are the positive half.
constexpr double kKronrodNode[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0,
};
constexpr double kKronrodWeight[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728,
};
// 7-point Gauss weights for nodes 1, 3, 5, 7 of the list above.
constexpr double kGaussWeight[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469,
};

using VecFn = std::function<void(std::span<const double>, std::span<double>)>;

struct Region {
  std::vector<double> center;
  std::vector<double> half;
  std::vector<double> value;  // per component
  std::vector<double> error;  // per component
  double key = 0.0;           // queue priority
  int split_axis = 0;
  uint64_t serial = 0;        // deterministic tie-break
};

struct RegionOrder {
  bool operator()(const Region& a, const Region& b) const {
    if (a.key != b.key) return a.key < b.key;
    return a.serial > b.serial;
  }
};

void rule_gk15(const VecFn& f, size_t ncomp, Region& r) {
  double c = r.center[0], h = r.half[0];
  std::vector<double> fv(ncomp), kron(ncomp, 0.0), gauss(ncomp, 0.0);
  double x[1];
  for (int i = 0; i < 8; ++i) {
    int reps = kKronrodNode[i] == 0.0 ? 1 : 2;
    for (int s = 0; s < reps; ++s) {
      x[0] = c + (s == 0 ? 1.0 : -1.0) * kKronrodNode[i] * h;
      f(std::span<const double>(x, 1), fv);
      for (size_t k = 0; k < ncomp; ++k) {
        kron[k] += kKronrodWeight[i] * fv[k];
        if (i % 2 == 1 || i == 7) gauss[k] += kGaussWeight[i / 2] * fv[k];
      }
    }
  }
  r.value.resize(ncomp);
  r.error.resize(ncomp);
  r.key = 0.0;
  for (size_t k = 0; k < ncomp; ++k) {
    r.value[k] = kron[k] * h;
    r.error[k] = std::fabs(kron[k] - gauss[k]) * h;
    r.key += r.error[k];
  }
  r.split_axis = 0;
}

// Genz-Malik degree-7 rule with embedded degree-5 estimate, as in
// h-adaptive cubature practice. Valid for dim >= 2.
void rule_genz_malik(const VecFn& f, size_t ncomp, Region& r) {
  const size_t dim = r.center.size();
  const double d = static_cast<double>(dim);
  const double l2 = std::sqrt(9.0 / 70.0);
  const double l4 = std::sqrt(9.0 / 10.0);
  const double l5 = std::sqrt(9.0 / 19.0);
  double volume = 1.0;
  for (double h : r.half) volume *= 2.0 * h;
  const double w1 = volume * (12824.0 - 9120.0 * d + 400.0 * d * d) / 19683.0;
  const double w2 = volume * 980.0 / 6561.0;
  const double w3 = volume * (1820.0 - 400.0 * d) / 19683.0;
  const double w4 = volume * 200.0 / 19683.0;
  const double w5 = volume * 6859.0 / 19683.0 / std::ldexp(1.0, static_cast<int>(dim));
  const double e1 = volume * (729.0 - 950.0 * d + 50.0 * d * d) / 729.0;
  const double e2 = volume * 245.0 / 486.0;
  const double e3 = volume * (265.0 - 100.0 * d) / 1458.0;
  const double e4 = volume * 25.0 / 729.0;

  std::vector<double> x(r.center.begin(), r.center.end());
  std::vector<double> fv(ncomp);
  std::vector<double> sum7(ncomp, 0.0), sum5(ncomp, 0.0);

  f(x, fv);
  for (size_t k = 0; k < ncomp; ++k) {
    sum7[k] += w1 * fv[k];
    sum5[k] += e1 * fv[k];
  }

  // single-axis points; also records the second differences per axis
  std::vector<double> seconddiff(dim, 0.0);
  std::vector<double> fcenter = fv;
  std::vector<double> pair_sum(ncomp);
  for (size_t i = 0; i < dim; ++i) {
    for (double lambda : {l2, l4}) {
      double w = lambda == l2 ? w2 : w3;
      double e = lambda == l2 ? e2 : e3;
      std::fill(pair_sum.begin(), pair_sum.end(), 0.0);
      for (double sgn : {1.0, -1.0}) {
        x[i] = r.center[i] + sgn * lambda * r.half[i];
        f(x, fv);
        for (size_t k = 0; k < ncomp; ++k) {
          sum7[k] += w * fv[k];
          sum5[k] += e * fv[k];
          pair_sum[k] += fv[k];
        }
      }
      if (lambda == l4)
        for (size_t k = 0; k < ncomp; ++k)
          seconddiff[i] += std::fabs(pair_sum[k] - 2.0 * fcenter[k]);
    }
    x[i] = r.center[i];
  }

  // paired-axis points (+-l4, +-l4)
  for (size_t i = 0; i + 1 < dim; ++i) {
    for (size_t j = i + 1; j < dim; ++j) {
      for (double si : {1.0, -1.0}) {
        for (double sj : {1.0, -1.0}) {
          x[i] = r.center[i] + si * l4 * r.half[i];
          x[j] = r.center[j] + sj * l4 * r.half[j];
          f(x, fv);
          for (size_t k = 0; k < ncomp; ++k) {
            sum7[k] += w4 * fv[k];
            sum5[k] += e4 * fv[k];
          }
        }
      }
      x[i] = r.center[i];
      x[j] = r.center[j];
    }
  }

  // corner points (+-l5, ..., +-l5)
  for (size_t mask = 0; mask < (size_t{1} << dim); ++mask) {
    for (size_t i = 0; i < dim; ++i) {
      double sgn = (mask >> i) & 1 ? -1.0 : 1.0;
      x[i] = r.center[i] + sgn * l5 * r.half[i];
    }
    f(x, fv);
    for (size_t k = 0; k < ncomp; ++k) sum7[k] += w5 * fv[k];
  }

  r.value.assign(sum7.begin(), sum7.end());
  r.error.resize(ncomp);
  r.key = 0.0;
  for (size_t k = 0; k < ncomp; ++k) {
    r.error[k] = std::fabs(sum7[k] - sum5[k]);
    r.key += r.error[k];
  }

  // split along the largest second difference; ties prefer the wider axis
  size_t best = 0;
  for (size_t i = 1; i < dim; ++i) {
    if (seconddiff[i] > seconddiff[best] ||
        (seconddiff[i] == seconddiff[best] && r.half[i] > r.half[best]))
      best = i;
  }
  r.split_axis = static_cast<int>(best);
}

void apply_rule(const VecFn& f, size_t ncomp, Region& r) {
  if (r.center.size() == 1)
    rule_gk15(f, ncomp, r);
  else
    rule_genz_malik(f, ncomp, r);
}

}  // namespace

VectorIntegralEstimate integrate_adaptive_vec(const VecFn& f, size_t ncomp,
                                              std::span<const double> lo,
                                              std::span<const double> hi, double reltol,
                                              double abstol, int maxiters) {
  const size_t dim = lo.size();
  if (dim == 0 || hi.size() != dim)
    throw std::invalid_argument("integrate_adaptive: bad bounds");
  if (abstol <= 0.0 && reltol <= 0.0)
    throw std::invalid_argument("integrate_adaptive: need a positive tolerance");
  if (maxiters < 1) throw std::invalid_argument("integrate_adaptive: maxiters >= 1");

  VectorIntegralEstimate total;
  total.value.assign(ncomp, 0.0);
  total.error_bound.assign(ncomp, 0.0);

  Region first;
  first.center.resize(dim);
  first.half.resize(dim);
  for (size_t i = 0; i < dim; ++i) {
    first.center[i] = 0.5 * (lo[i] + hi[i]);
    first.half[i] = 0.5 * (hi[i] - lo[i]);
  }
  apply_rule(f, ncomp, first);
  total.evaluations = 1;
  for (size_t k = 0; k < ncomp; ++k) {
    total.value[k] = first.value[k];
    total.error_bound[k] = first.error[k];
  }

  auto done = [&]() {
    for (size_t k = 0; k < ncomp; ++k) {
      double tol = std::max(abstol, reltol * std::fabs(total.value[k]));
      if (total.error_bound[k] > tol) return false;
    }
    return true;
  };

  std::priority_queue<Region, std::vector<Region>, RegionOrder> queue;
  uint64_t serial = 0;
  first.serial = serial++;
  queue.push(std::move(first));

  while (!done() && total.evaluations + 2 <= maxiters && !queue.empty()) {
    Region parent = queue.top();
    queue.pop();
    for (size_t k = 0; k < ncomp; ++k) {
      total.value[k] -= parent.value[k];
      total.error_bound[k] -= parent.error[k];
    }
    size_t ax = static_cast<size_t>(parent.split_axis);
    for (int side = 0; side < 2; ++side) {
      Region child;
      child.center = parent.center;
      child.half = parent.half;
      child.half[ax] *= 0.5;
      child.center[ax] += (side == 0 ? -1.0 : 1.0) * child.half[ax];
      apply_rule(f, ncomp, child);
      total.evaluations += 1;
      for (size_t k = 0; k < ncomp; ++k) {
        total.value[k] += child.value[k];
        total.error_bound[k] += child.error[k];
      }
      child.serial = serial++;
      queue.push(std::move(child));
    }
  }
  total.converged = done();
  return total;
}

IntegralEstimate integrate_adaptive(
    const std::function<double(std::span<const double>)>& f, std::span<const double> lo,
    std::span<const double> hi, double reltol, double abstol, int maxiters) {
  VecFn vf = [&f](std::span<const double> x, std::span<double> out) { out[0] = f(x); };
  VectorIntegralEstimate v = integrate_adaptive_vec(vf, 1, lo, hi, reltol, abstol,
                                                    maxiters);
  IntegralEstimate out;
  out.value = v.value[0];
  out.error_bound = v.error_bound[0];
  out.evaluations = v.evaluations;
  out.converged = v.converged;
  return out;
}

}  // namespace pinn
