#pragma once

#include <functional>
#include <span>
#include <vector>

namespace pinn {

enum class QuadRule { GaussKronrod1D, GenzMalik };

struct IntegralEstimate {
  double value = 0.0;
  double error_bound = 0.0;
  int evaluations = 0;  // region rule applications
  bool converged = false;
};

struct VectorIntegralEstimate {
  std::vector<double> value;
  std::vector<double> error_bound;
  int evaluations = 0;
  bool converged = false;
};

/// h-adaptive integration over a hyper-rectangle. One dimension uses
/// Gauss-Kronrod (7,15) with recursive bisection; two or more use the
/// Genz-Malik degree-7 rule with its embedded degree-5 error estimate,
/// splitting the region whose error bound is largest along the axis of
/// largest second difference. Runs until the summed error bound drops to
/// max(abstol, reltol*|value|) or `maxiters` region evaluations; hitting the
/// cap returns converged=false rather than throwing.
IntegralEstimate integrate_adaptive(
    const std::function<double(std::span<const double>)>& f, std::span<const double> lo,
    std::span<const double> hi, double reltol, double abstol, int maxiters);

/// Componentwise variant over shared regions; all components must meet the
/// tolerance. Used for integrating gradient integrands.
VectorIntegralEstimate integrate_adaptive_vec(
    const std::function<void(std::span<const double>, std::span<double>)>& f,
    size_t ncomp, std::span<const double> lo, std::span<const double> hi, double reltol,
    double abstol, int maxiters);

}  // namespace pinn
