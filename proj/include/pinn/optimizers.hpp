#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pinn/mlp.hpp"

namespace pinn {

struct AdamState {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<double> m, v;
  long t = 0;
};

/// Bias-corrected update theta -= lr * m_hat / (sqrt(v_hat) + eps).
void adam_step(AdamState& state, FlatParams& params, std::span<const double> grad);

struct RmsPropState {
  double lr = 0.001;
  double rho = 0.9;
  double eps = 1e-8;
  std::vector<double> sq;
  long t = 0;
};

void rmsprop_step(RmsPropState& state, FlatParams& params, std::span<const double> grad);

enum class QuasiNewtonVariant { Bfgs, Lbfgs };

struct QuasiNewtonState {
  QuasiNewtonVariant variant = QuasiNewtonVariant::Bfgs;
  int history = 10;               // L-BFGS window
  double armijo_c1 = 1e-4;
  double wolfe_c2 = 0.1;
  double backtrack_shrink = 0.5;
  int max_line_trials = 40;
  double grad_tol = 1e-8;         // infinity norm
};

enum class QuasiNewtonStatus { MaxIters, GradientConverged, LineSearchFailed };

const char* status_name(QuasiNewtonStatus s);

/// Loss and gradient oracle. `value` and `value_and_grad_frozen` are used
/// inside the line search (samples frozen by the caller); `value_and_grad` is
/// called once per outer iteration and may resample. When
/// `value_and_grad_frozen` is unset, `value_and_grad` stands in for it.
struct LossOracle {
  std::function<double(const FlatParams&)> value;
  std::function<std::pair<double, std::vector<double>>(const FlatParams&)> value_and_grad;
  std::function<std::pair<double, std::vector<double>>(const FlatParams&)>
      value_and_grad_frozen;
};

/// Called after each accepted iterate; return false to stop early.
using IterCallback = std::function<bool(int iter, const FlatParams&, double loss,
                                        std::span<const double> grad)>;

QuasiNewtonStatus quasi_newton_run(const QuasiNewtonState& cfg, const LossOracle& oracle,
                                   FlatParams& params, int maxiters,
                                   const IterCallback& cb = {});

/// One phase of an optimizer schedule.
struct OptimizerPhase {
  enum class Kind { Adam, RmsProp, Bfgs, Lbfgs } kind = Kind::Adam;
  double lr = 0.001;
  int iters = -1;  // -1 = take the run default
};

/// adam:0.001:50+bfgs:150  |  rmsprop:0.005  |  lbfgs:200
std::vector<OptimizerPhase> parse_schedule(const std::string& text);
std::string schedule_name(const std::vector<OptimizerPhase>& phases);

}  // namespace pinn
