#include "pinn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

namespace pinn {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("run config lines look like 'key = value': " + line);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "problem") cfg.problem = value;
    else if (key == "spec") cfg.spec_file = value;
    else if (key == "strategy") cfg.strategy = parse_strategy(value);
    else if (key == "opt") cfg.schedule = parse_schedule(value);
    else if (key == "weights") cfg.weights = parse_weight_scheme(value);
    else if (key == "seed") {
      cfg.seed_init = std::stoull(value);
      cfg.seed_sampling = cfg.seed_init + 1;
    } else if (key == "seed_init") cfg.seed_init = std::stoull(value);
    else if (key == "seed_sampling") cfg.seed_sampling = std::stoull(value);
    else if (key == "iters") cfg.default_iters = std::stoi(value);
    else if (key == "eval_dx") cfg.eval_dx = std::stod(value);
    else if (key == "log_every") cfg.log_every = std::stoi(value);
    else if (key == "out") cfg.out_csv = value;
    else if (key == "plot") cfg.out_svg = value;
    else throw std::invalid_argument("unknown run-config key '" + key + "'");
  }
  if (cfg.eval_dx <= 0.0) throw std::invalid_argument("eval_dx must be positive");
  return cfg;
}

ErrorReport evaluate_error(const LossProgram& program, const FlatParams& params,
                           const EvalOracle& oracle, double grid_dx) {
  ErrorReport rep;
  if (!oracle.present) return rep;
  const auto& sys = program.system;
  for (size_t d = 0; d < sys.dependent_vars.size(); ++d) {
    const auto& dv = sys.dependent_vars[d];
    std::vector<std::vector<double>> axes;
    for (const auto& arg : dv.args) {
      const IntervalDomain* dom = sys.domain_of(arg);
      std::vector<double> ticks;
      int m = static_cast<int>(std::floor((dom->upper - dom->lower) / grid_dx + 1e-9));
      for (int i = 0; i <= m; ++i) ticks.push_back(dom->lower + i * grid_dx);
      if (std::fabs(ticks.back() - dom->upper) > 1e-9 * (1.0 + std::fabs(dom->upper)))
        ticks.push_back(dom->upper);
      axes.push_back(std::move(ticks));
    }
    std::vector<double> coords(dv.args.size(), 0.0);
    double num = 0.0, den = 0.0, worst = 0.0;
    std::vector<size_t> idx(axes.size(), 0);
    while (true) {
      for (size_t k = 0; k < axes.size(); ++k) coords[k] = axes[k][idx[k]];
      double truth = oracle.value(static_cast<int>(d), coords);
      if (!std::isfinite(truth))
        throw EvalError("evaluation oracle undefined at a lattice point for '" +
                        dv.name + "'");
      double got = network_value(program, static_cast<int>(d), coords, params);
      double diff = got - truth;
      num += diff * diff;
      den += truth * truth;
      worst = std::max(worst, std::fabs(diff));
      size_t k = 0;
      for (; k < axes.size(); ++k) {
        if (++idx[k] < axes[k].size()) break;
        idx[k] = 0;
      }
      if (k == axes.size()) break;
    }
    rep.rel_l2.push_back(den > 0.0 ? std::sqrt(num) / std::sqrt(den)
                                   : std::sqrt(num));
    rep.max_abs.push_back(worst);
  }
  return rep;
}

namespace {

class TrainLoop {
 public:
  TrainLoop(const LossProgram& program, const RunConfig& cfg, const EvalOracle& oracle)
      : prog_(program),
        cfg_(cfg),
        oracle_(oracle),
        evaluator_(program, cfg.strategy, cfg.seed_sampling),
        scheme_(make_scheme(program, cfg)),
        t0_(std::chrono::steady_clock::now()) {}

  TrainResult run() {
    FlatParams params = cfg_.warm_start.empty() ? prog_.initial_params(cfg_.seed_init)
                                                : cfg_.warm_start;
    if (params.size() != prog_.param_count())
      throw EvalError("warm-start parameter vector has the wrong length");

    {
      std::vector<double> w = scheme_.weights();
      double l0 = evaluator_.loss_value(params, w).total;
      if (!std::isfinite(l0))
        throw EvalError("non-finite loss at initialization");
      track_best(l0, params);
    }

    for (const OptimizerPhase& phase : cfg_.schedule) {
      int iters = phase.iters >= 0 ? phase.iters : cfg_.default_iters;
      switch (phase.kind) {
        case OptimizerPhase::Kind::Adam: {
          AdamState st;
          st.lr = phase.lr;
          first_order_phase(params, iters,
                            [&](FlatParams& p, std::span<const double> g) {
                              adam_step(st, p, g);
                            });
          break;
        }
        case OptimizerPhase::Kind::RmsProp: {
          RmsPropState st;
          st.lr = phase.lr;
          first_order_phase(params, iters,
                            [&](FlatParams& p, std::span<const double> g) {
                              rmsprop_step(st, p, g);
                            });
          break;
        }
        case OptimizerPhase::Kind::Bfgs:
        case OptimizerPhase::Kind::Lbfgs:
          quasi_newton_phase(params, iters,
                             phase.kind == OptimizerPhase::Kind::Bfgs
                                 ? QuasiNewtonVariant::Bfgs
                                 : QuasiNewtonVariant::Lbfgs);
          break;
      }
      // next phase starts from the best parameters seen so far
      params = best_loss_params_.empty() ? params : best_loss_params_;
    }

    TrainResult out;
    out.history = std::move(history_);
    out.best_params = pick_best(params);
    out.final_loss = best_metric_loss_;
    if (oracle_.present) {
      ErrorReport rep = evaluate_error(prog_, out.best_params, oracle_, cfg_.eval_dx);
      out.final_rel_l2 = *std::max_element(rep.rel_l2.begin(), rep.rel_l2.end());
      out.final_max_abs = *std::max_element(rep.max_abs.begin(), rep.max_abs.end());
    }
    if (prog_.param_estim) {
      out.lambda.assign(out.best_params.begin() +
                            static_cast<long>(prog_.net_param_total),
                        out.best_params.end());
    }
    out.wall_s = elapsed();
    return out;
  }

 private:
  static WeightScheme make_scheme(const LossProgram& program, const RunConfig& cfg) {
    std::vector<bool> bc;
    for (const auto& t : program.terms)
      bc.push_back(t.kind == LossTerm::Kind::Boundary);
    std::unique_ptr<bool[]> buf(new bool[bc.size()]);
    for (size_t i = 0; i < bc.size(); ++i) buf[i] = bc[i];
    return WeightScheme(cfg.weights, bc.size(),
                        std::span<const bool>(buf.get(), bc.size()));
  }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_)
        .count();
  }

  bool should_log(int step) const {
    if (cfg_.log_every > 0) return step % cfg_.log_every == 0;
    return step <= 2000 || step % 10 == 0;
  }

  void record(int step, const LossBreakdown& bd, const FlatParams& params) {
    track_best(bd.total, params);
    if (!should_log(step)) return;
    HistoryRow row;
    row.iter = step;
    row.wall_s = elapsed();
    row.loss = bd.total;
    row.term_losses = bd.per_term;
    row.term_weights = scheme_.weights();
    row.error_bounds = bd.error_bounds;
    if (oracle_.present) {
      ErrorReport rep = evaluate_error(prog_, params, oracle_, cfg_.eval_dx);
      row.rel_l2 = *std::max_element(rep.rel_l2.begin(), rep.rel_l2.end());
      row.max_abs = *std::max_element(rep.max_abs.begin(), rep.max_abs.end());
      if (row.rel_l2 < best_eval_) {
        best_eval_ = row.rel_l2;
        best_eval_params_ = params;
      }
    }
    history_.rows.push_back(std::move(row));
  }

  void track_best(double loss, const FlatParams& params) {
    if (loss < best_loss_) {
      best_loss_ = loss;
      best_loss_params_ = params;
      best_metric_loss_ = loss;
    }
  }

  FlatParams pick_best(const FlatParams& fallback) const {
    if (oracle_.present && !best_eval_params_.empty()) return best_eval_params_;
    if (!best_loss_params_.empty()) return best_loss_params_;
    return fallback;
  }

  template <class Step>
  void first_order_phase(FlatParams& params, int iters, Step&& apply_step) {
    for (int i = 0; i < iters; ++i) {
      int step = ++step_;
      evaluator_.resample();
      bool want_pt = scheme_.wants_term_gradients(step);
      LossGradient g = evaluator_.loss_gradient(params, scheme_.weights(), want_pt);
      record(step, g.breakdown, params);
      if (want_pt) scheme_.update_loss_gradients(step, g.per_term_grad);
      if (scheme_.wants_term_losses(step))
        scheme_.update_minimax(step, g.breakdown.per_term);
      apply_step(params, g.grad);
    }
  }

  void quasi_newton_phase(FlatParams& params, int iters, QuasiNewtonVariant variant) {
    QuasiNewtonState cfg;
    cfg.variant = variant;
    LossBreakdown last_bd;
    std::vector<std::vector<double>> last_per_term;

    LossOracle oracle;
    oracle.value = [&](const FlatParams& p) {
      return evaluator_.loss_value(p, scheme_.weights()).total;
    };
    oracle.value_and_grad = [&](const FlatParams& p) {
      evaluator_.freeze(false);
      evaluator_.resample();
      evaluator_.freeze(true);
      bool want_pt = scheme_.wants_term_gradients(step_ + 1);
      LossGradient g = evaluator_.loss_gradient(p, scheme_.weights(), want_pt);
      last_bd = g.breakdown;
      last_per_term = std::move(g.per_term_grad);
      return std::make_pair(g.breakdown.total, std::move(g.grad));
    };

    quasi_newton_run(cfg, oracle, params, iters,
                     [&](int, const FlatParams& p, double, std::span<const double>) {
                       int step = ++step_;
                       record(step, last_bd, p);
                       if (scheme_.wants_term_gradients(step) && !last_per_term.empty())
                         scheme_.update_loss_gradients(step, last_per_term);
                       if (scheme_.wants_term_losses(step))
                         scheme_.update_minimax(step, last_bd.per_term);
                       return true;
                     });
    evaluator_.freeze(false);
  }

  const LossProgram& prog_;
  const RunConfig& cfg_;
  const EvalOracle& oracle_;
  LossEvaluator evaluator_;
  WeightScheme scheme_;
  std::chrono::steady_clock::time_point t0_;

  RunHistory history_;
  int step_ = 0;
  double best_loss_ = std::numeric_limits<double>::infinity();
  double best_metric_loss_ = std::numeric_limits<double>::infinity();
  double best_eval_ = std::numeric_limits<double>::infinity();
  FlatParams best_loss_params_;
  FlatParams best_eval_params_;
};

}  // namespace

TrainResult train(const LossProgram& program, const RunConfig& config,
                  const EvalOracle& oracle) {
  return TrainLoop(program, config, oracle).run();
}

TrainResult solve_inverse(const LossProgram& program, const RunConfig& config,
                          const EvalOracle& oracle) {
  if (!program.param_estim)
    throw LoweringError("solve_inverse needs a program lowered with param_estim");
  if (program.system.physical_params.empty())
    throw LoweringError("solve_inverse: no physical parameters declared");
  return TrainLoop(program, config, oracle).run();
}

}  // namespace pinn
