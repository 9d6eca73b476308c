#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pinn/lowering.hpp"
#include "pinn/quadrature.hpp"
#include "pinn/sampling.hpp"

namespace pinn {

struct GridStrategy {
  std::vector<double> dx;  // one per independent variable, or one broadcast value
};

struct StochasticStrategy {
  int points_per_term = 100;
};

enum class QmcSampler { Sobol, LatinHypercube };

struct QuasiRandomStrategy {
  int points_per_term = 100;
  QmcSampler sampler = QmcSampler::Sobol;
  bool resample_each_step = true;
};

struct QuadratureStrategy {
  QuadRule rule = QuadRule::GenzMalik;
  double reltol = 1.0;
  double abstol = 1e-4;
  int maxiters = 100;
};

using TrainingStrategy =
    std::variant<GridStrategy, StochasticStrategy, QuasiRandomStrategy, QuadratureStrategy>;

/// grid:0.05 | grid:0.2,0.1 | stochastic:100 | quasirandom:100[:sobol|lhs][:fixed]
/// | quadrature[:abstol=..][:reltol=..][:maxiters=..]
TrainingStrategy parse_strategy(const std::string& text);
std::string strategy_name(const TrainingStrategy& s);

struct LossBreakdown {
  double total = 0.0;
  std::vector<double> per_term;      // unweighted
  std::vector<double> error_bounds;  // quadrature strategies only
  double additional = 0.0;           // data loss, own weight applied
};

struct LossGradient {
  LossBreakdown breakdown;
  std::vector<double> grad;
  std::vector<std::vector<double>> per_term_grad;  // unweighted, when requested
};

/// Binds a LossProgram to a discretization strategy. Owns the sampling state:
/// stochastic and quasi-random terms resample on every unfrozen loss_value
/// call, grids are fixed, quadrature carries no points at all. Gradients are
/// Discretize-then-Optimize at the current sample for point strategies and
/// Optimize-then-Discretize (the integral of the gradient integrand, its own
/// adaptive run) for quadrature.
class LossEvaluator {
 public:
  LossEvaluator(const LossProgram& program, TrainingStrategy strategy,
                uint64_t sampling_seed);
  ~LossEvaluator();

  LossBreakdown loss_value(const FlatParams& params, std::span<const double> weights);
  LossGradient loss_gradient(const FlatParams& params, std::span<const double> weights,
                             bool want_per_term = false);

  void freeze(bool on) { frozen_ = on; }
  bool frozen() const { return frozen_; }
  void resample();

  const LossProgram& program() const { return *prog_; }
  size_t term_count() const { return prog_->terms.size(); }
  bool is_quadrature() const;

  /// Test hook: the collocation points backing the current sample.
  const std::vector<std::vector<double>>& term_points(size_t term) const;

 private:
  struct TermState;
  void ensure_sample();
  void resample_term(size_t i);

  const LossProgram* prog_;
  TrainingStrategy strat_;
  std::vector<TermState> terms_;
  Rng rng_;
  uint64_t draw_counter_ = 0;
  uint64_t seed_;
  bool frozen_ = false;
  bool have_sample_ = false;
};

/// PINN_THREADS cap (0 or unset = auto). Evaluation work is split into fixed
/// blocks so results do not depend on the thread count.
int thread_cap();

}  // namespace pinn
