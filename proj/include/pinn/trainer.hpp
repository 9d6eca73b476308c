#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "pinn/lowering.hpp"
#include "pinn/optimizers.hpp"
#include "pinn/reweighting.hpp"
#include "pinn/strategies.hpp"

namespace pinn {

/// Reference solution used only for evaluation callbacks: closed form or an
/// interpolated table, queried by dependent-variable index.
struct EvalOracle {
  bool present = false;
  std::function<double(int dvar, std::span<const double> coords)> value;
};

struct RunConfig {
  std::string problem;    // builtin id, or empty when spec_file is set
  std::string spec_file;
  TrainingStrategy strategy = GridStrategy{{0.1}};
  WeightSchemeConfig weights = FixedWeights{};
  std::vector<OptimizerPhase> schedule = {OptimizerPhase{}};
  uint64_t seed_init = 0;
  uint64_t seed_sampling = 1;
  double eval_dx = 0.1;
  int log_every = 0;       // 0 = every iteration up to 2000, every 10 beyond
  int default_iters = 1000;  // for schedule phases without an explicit count
  std::string out_csv;
  std::string out_svg;
  FlatParams warm_start;  // empty = draw from seed_init
};

/// Line-oriented `key = value` run-config text.
RunConfig parse_run_config(const std::string& text);

struct HistoryRow {
  int iter = 0;
  double wall_s = 0.0;
  double loss = 0.0;
  std::vector<double> term_losses;
  std::vector<double> term_weights;
  std::vector<double> error_bounds;  // quadrature strategies only
  double rel_l2 = std::numeric_limits<double>::quiet_NaN();   // max over variables
  double max_abs = std::numeric_limits<double>::quiet_NaN();
};

struct RunHistory {
  std::vector<HistoryRow> rows;
};

struct TrainResult {
  FlatParams best_params;
  RunHistory history;
  double final_loss = 0.0;
  double final_rel_l2 = std::numeric_limits<double>::quiet_NaN();
  double final_max_abs = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> lambda;  // physical-parameter slice (param_estim runs)
  double wall_s = 0.0;
};

struct ErrorReport {
  std::vector<double> rel_l2;   // per dependent variable
  std::vector<double> max_abs;
};

/// Relative L2 and max-abs error on the endpoint-inclusive evaluation lattice
/// with spacing grid_dx, per dependent variable over its own coordinates.
ErrorReport evaluate_error(const LossProgram& program, const FlatParams& params,
                           const EvalOracle& oracle, double grid_dx);

/// Runs the optimizer schedule over the program's loss. Each phase starts
/// from the best-loss parameters of the previous one; the returned parameters
/// are the best by evaluation error when an oracle exists, else by loss.
TrainResult train(const LossProgram& program, const RunConfig& config,
                  const EvalOracle& oracle = {});

/// Joint network/parameter optimization; requires a program lowered with
/// param_estim and data attached. The recovered physical parameters land in
/// TrainResult::lambda.
TrainResult solve_inverse(const LossProgram& program, const RunConfig& config,
                          const EvalOracle& oracle = {});

}  // namespace pinn
