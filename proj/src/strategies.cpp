#include "pinn/strategies.hpp"

#include <cmath>
#include <cstdlib>
#include <future>
#include <sstream>
#include <thread>

namespace pinn {

int thread_cap() {
  static int cap = [] {
    const char* env = std::getenv("PINN_THREADS");
    int v = env ? std::atoi(env) : 0;
    if (v <= 0) v = static_cast<int>(std::thread::hardware_concurrency());
    if (v < 1) v = 1;
    return v;
  }();
  return cap;
}

namespace {

constexpr int kChunks = 4;  // fixed partition; reduction order never varies

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

TrainingStrategy parse_strategy(const std::string& text) {
  std::vector<std::string> parts = split(text, ':');
  if (parts.empty()) throw std::invalid_argument("empty strategy");
  const std::string& kind = parts[0];
  if (kind == "grid") {
    if (parts.size() != 2) throw std::invalid_argument("grid strategy needs grid:<dx>");
    GridStrategy g;
    for (const auto& tok : split(parts[1], ',')) g.dx.push_back(std::stod(tok));
    for (double d : g.dx)
      if (!(d > 0.0)) throw std::invalid_argument("grid dx must be positive");
    return g;
  }
  if (kind == "stochastic") {
    StochasticStrategy s;
    if (parts.size() > 1) s.points_per_term = std::stoi(parts[1]);
    if (s.points_per_term < 1)
      throw std::invalid_argument("stochastic points_per_term must be >= 1");
    return s;
  }
  if (kind == "quasirandom") {
    QuasiRandomStrategy q;
    if (parts.size() > 1) q.points_per_term = std::stoi(parts[1]);
    if (q.points_per_term < 1)
      throw std::invalid_argument("quasirandom points_per_term must be >= 1");
    for (size_t i = 2; i < parts.size(); ++i) {
      if (parts[i] == "sobol") q.sampler = QmcSampler::Sobol;
      else if (parts[i] == "lhs") q.sampler = QmcSampler::LatinHypercube;
      else if (parts[i] == "fixed") q.resample_each_step = false;
      else throw std::invalid_argument("unknown quasirandom option '" + parts[i] + "'");
    }
    return q;
  }
  if (kind == "quadrature") {
    QuadratureStrategy q;
    for (size_t i = 1; i < parts.size(); ++i) {
      auto kv = split(parts[i], '=');
      if (kv.size() != 2)
        throw std::invalid_argument("quadrature options look like abstol=1e-5");
      if (kv[0] == "abstol") q.abstol = std::stod(kv[1]);
      else if (kv[0] == "reltol") q.reltol = std::stod(kv[1]);
      else if (kv[0] == "maxiters") q.maxiters = std::stoi(kv[1]);
      else if (kv[0] == "rule")
        q.rule = kv[1] == "gk" ? QuadRule::GaussKronrod1D : QuadRule::GenzMalik;
      else throw std::invalid_argument("unknown quadrature option '" + kv[0] + "'");
    }
    if (q.abstol <= 0.0 && q.reltol <= 0.0)
      throw std::invalid_argument("quadrature needs a positive tolerance");
    if (q.maxiters < 1) throw std::invalid_argument("quadrature maxiters must be >= 1");
    return q;
  }
  throw std::invalid_argument("unknown strategy '" + kind + "'");
}

std::string strategy_name(const TrainingStrategy& s) {
  std::ostringstream os;
  if (const auto* g = std::get_if<GridStrategy>(&s)) {
    os << "grid:";
    for (size_t i = 0; i < g->dx.size(); ++i) os << (i ? "," : "") << g->dx[i];
  } else if (const auto* st = std::get_if<StochasticStrategy>(&s)) {
    os << "stochastic:" << st->points_per_term;
  } else if (const auto* q = std::get_if<QuasiRandomStrategy>(&s)) {
    os << "quasirandom:" << q->points_per_term << ':'
       << (q->sampler == QmcSampler::Sobol ? "sobol" : "lhs");
    if (!q->resample_each_step) os << ":fixed";
  } else if (const auto* qd = std::get_if<QuadratureStrategy>(&s)) {
    os << "quadrature:abstol=" << qd->abstol << ":reltol=" << qd->reltol
       << ":maxiters=" << qd->maxiters;
  }
  return os.str();
}

struct LossEvaluator::TermState {
  std::vector<std::vector<double>> points;
  double quad_weight = 1.0;  // grid cell measure; 1 for sampling strategies
  std::unique_ptr<SobolSequence> sobol;
  int n_points_target = 0;
};

LossEvaluator::LossEvaluator(const LossProgram& program, TrainingStrategy strategy,
                             uint64_t sampling_seed)
    : prog_(&program), strat_(std::move(strategy)), rng_(sampling_seed),
      seed_(sampling_seed) {
  terms_.resize(prog_->terms.size());
  const auto& sys = prog_->system;

  for (size_t i = 0; i < prog_->terms.size(); ++i) {
    const LossTerm& term = prog_->terms[i];
    TermState& st = terms_[i];

    if (const auto* g = std::get_if<GridStrategy>(&strat_)) {
      if (g->dx.size() != 1 && g->dx.size() != sys.independent_vars.size())
        throw std::invalid_argument("grid strategy needs one dx or one per variable");
      // per-axis interior/boundary lattices
      std::vector<std::vector<double>> axes;
      st.quad_weight = 1.0;
      for (int d = 0; d < term.dim(); ++d) {
        int axis = term.free_axes[static_cast<size_t>(d)];
        double dx = g->dx.size() == 1 ? g->dx[0] : g->dx[static_cast<size_t>(axis)];
        const auto& b = term.free_bounds[static_cast<size_t>(d)];
        double extent = b.upper - b.lower;
        int m = static_cast<int>(std::floor(extent / dx + 1e-9));
        std::vector<double> ticks;
        if (term.kind == LossTerm::Kind::Interior) {
          for (int k = 1; k < m; ++k) ticks.push_back(b.lower + k * dx);
        } else {
          for (int k = 0; k <= m; ++k) ticks.push_back(b.lower + k * dx);
        }
        if (ticks.empty())
          throw std::invalid_argument("empty grid lattice for " + term.label +
                                      " (dx >= extent)");
        st.quad_weight *= dx;
        axes.push_back(std::move(ticks));
      }
      if (term.dim() == 0) st.quad_weight = 1.0;
      // Cartesian product
      st.points.assign(1, {});
      for (const auto& ticks : axes) {
        std::vector<std::vector<double>> next;
        next.reserve(st.points.size() * ticks.size());
        for (const auto& p : st.points)
          for (double t : ticks) {
            auto q = p;
            q.push_back(t);
            next.push_back(std::move(q));
          }
        st.points = std::move(next);
      }
    } else if (std::holds_alternative<QuadratureStrategy>(strat_)) {
      st.points.clear();
    } else {
      int n = 0;
      if (const auto* s = std::get_if<StochasticStrategy>(&strat_))
        n = s->points_per_term;
      else
        n = std::get<QuasiRandomStrategy>(strat_).points_per_term;
      // fewer points on the lower-dimensional boundary faces
      if (term.kind == LossTerm::Kind::Boundary) n = std::max(4, n / 4);
      if (term.dim() == 0) n = 1;
      st.n_points_target = n;
      if (const auto* q = std::get_if<QuasiRandomStrategy>(&strat_)) {
        if (q->sampler == QmcSampler::Sobol && term.dim() > 0)
          st.sobol = std::make_unique<SobolSequence>(term.dim());
      }
    }
  }
}

LossEvaluator::~LossEvaluator() = default;

bool LossEvaluator::is_quadrature() const {
  return std::holds_alternative<QuadratureStrategy>(strat_);
}

const std::vector<std::vector<double>>& LossEvaluator::term_points(size_t term) const {
  return terms_[term].points;
}

void LossEvaluator::resample_term(size_t i) {
  const LossTerm& term = prog_->terms[i];
  TermState& st = terms_[i];
  int n = st.n_points_target;
  int d = term.dim();
  if (d == 0) {
    st.points.assign(1, {});
    return;
  }
  std::vector<std::vector<double>> unit;
  if (std::holds_alternative<StochasticStrategy>(strat_)) {
    unit = uniform_points(n, d, rng_);
  } else {
    const auto& q = std::get<QuasiRandomStrategy>(strat_);
    if (q.sampler == QmcSampler::Sobol) {
      unit.assign(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(d)));
      for (auto& p : unit) st.sobol->next(p);  // successive blocks, one stream
    } else {
      unit = lhs_points(n, d, seed_ ^ (0x9e3779b97f4a7c15ull * (i + 1)) ^
                                  (draw_counter_ * 0x2545F4914F6CDD1Dull));
    }
  }
  for (auto& p : unit)
    for (int k = 0; k < d; ++k) {
      const auto& b = term.free_bounds[static_cast<size_t>(k)];
      p[static_cast<size_t>(k)] = b.lower + (b.upper - b.lower) * p[static_cast<size_t>(k)];
    }
  st.points = std::move(unit);
}

void LossEvaluator::resample() {
  if (std::holds_alternative<GridStrategy>(strat_) ||
      std::holds_alternative<QuadratureStrategy>(strat_))
    return;
  if (const auto* q = std::get_if<QuasiRandomStrategy>(&strat_)) {
    if (!q->resample_each_step && have_sample_) return;
  }
  for (size_t i = 0; i < terms_.size(); ++i) resample_term(i);
  ++draw_counter_;
  have_sample_ = true;
}

void LossEvaluator::ensure_sample() {
  if (std::holds_alternative<GridStrategy>(strat_) ||
      std::holds_alternative<QuadratureStrategy>(strat_))
    return;
  if (!have_sample_) resample();
}

namespace {

// Per-chunk gradient worker: one tape, reused across points.
struct GradWorker {
  Tape tape;
  std::vector<TScalar> leaves;
  std::vector<double> grad;
  std::vector<double> adjoints;
  double loss_partial = 0.0;

  void init(const FlatParams& params) {
    leaves.resize(params.size());
    for (size_t i = 0; i < params.size(); ++i)
      leaves[i] = TScalar{&tape, tape.add_leaf(params[i])};
    grad.assign(params.size(), 0.0);
  }

  void reset_for_term(const FlatParams& params) {
    if (leaves.size() != params.size()) {
      tape = Tape();
      leaves.clear();
      init(params);
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    loss_partial = 0.0;
  }
};

}  // namespace

LossBreakdown LossEvaluator::loss_value(const FlatParams& params,
                                        std::span<const double> weights) {
  if (params.size() != prog_->param_count())
    throw EvalError("loss_value: parameter vector length mismatch");
  if (weights.size() != terms_.size())
    throw EvalError("loss_value: weight vector length mismatch");
  if (!frozen_) resample();
  ensure_sample();

  LossBreakdown out;
  out.per_term.resize(terms_.size(), 0.0);
  if (const auto* q = std::get_if<QuadratureStrategy>(&strat_)) {
    out.error_bounds.assign(terms_.size(), 0.0);
    for (size_t i = 0; i < terms_.size(); ++i) {
      const LossTerm& term = prog_->terms[i];
      if (term.dim() == 0) {
        double r = eval_residual_value(*prog_, term, {}, params);
        out.per_term[i] = r * r;
        continue;
      }
      std::vector<double> lo, hi;
      for (const auto& b : term.free_bounds) {
        lo.push_back(b.lower);
        hi.push_back(b.upper);
      }
      auto est = integrate_adaptive(
          [&](std::span<const double> x) {
            double r = eval_residual_value(*prog_, term, x, params);
            return r * r;
          },
          lo, hi, q->reltol, q->abstol, q->maxiters);
      out.per_term[i] = est.value;
      out.error_bounds[i] = est.error_bound;
    }
  } else {
    for (size_t i = 0; i < terms_.size(); ++i) {
      const LossTerm& term = prog_->terms[i];
      const TermState& st = terms_[i];
      double acc = 0.0;
      for (const auto& p : st.points) {
        double r = eval_residual_value(*prog_, term, p, params);
        acc += r * r;
      }
      if (std::holds_alternative<GridStrategy>(strat_))
        out.per_term[i] = acc * st.quad_weight;
      else
        out.per_term[i] = acc / static_cast<double>(st.points.size());
    }
  }
  out.additional = additional_loss_value(*prog_, params);
  out.total = out.additional;
  for (size_t i = 0; i < terms_.size(); ++i) out.total += weights[i] * out.per_term[i];
  return out;
}

LossGradient LossEvaluator::loss_gradient(const FlatParams& params,
                                          std::span<const double> weights,
                                          bool want_per_term) {
  if (params.size() != prog_->param_count())
    throw EvalError("loss_gradient: parameter vector length mismatch");
  if (weights.size() != terms_.size())
    throw EvalError("loss_gradient: weight vector length mismatch");
  ensure_sample();

  const size_t np = params.size();
  LossGradient out;
  out.grad.assign(np, 0.0);
  out.breakdown.per_term.resize(terms_.size(), 0.0);
  if (want_per_term)
    out.per_term_grad.assign(terms_.size(), std::vector<double>(np, 0.0));

  if (const auto* q = std::get_if<QuadratureStrategy>(&strat_)) {
    out.breakdown.error_bounds.assign(terms_.size(), 0.0);
    GradWorker w;
    w.init(params);
    std::vector<double> term_grad(np);
    for (size_t i = 0; i < terms_.size(); ++i) {
      const LossTerm& term = prog_->terms[i];
      std::fill(term_grad.begin(), term_grad.end(), 0.0);
      if (term.dim() == 0) {
        w.tape.rewind();
        TScalar r = eval_residual_tape(*prog_, term, {}, w.tape, w.leaves);
        out.breakdown.per_term[i] = r.val() * r.val();
        w.tape.backprop_accumulate(r.id, 2.0 * r.val(), term_grad, w.adjoints);
      } else {
        std::vector<double> lo, hi;
        for (const auto& b : term.free_bounds) {
          lo.push_back(b.lower);
          hi.push_back(b.upper);
        }
        // loss run: its own scalar adaptive integral with error bound
        auto est = integrate_adaptive(
            [&](std::span<const double> x) {
              double r = eval_residual_value(*prog_, term, x, params);
              return r * r;
            },
            lo, hi, q->reltol, q->abstol, q->maxiters);
        out.breakdown.per_term[i] = est.value;
        out.breakdown.error_bounds[i] = est.error_bound;
        // gradient run: integrate d(r^2)/dw componentwise over its own regions
        auto gest = integrate_adaptive_vec(
            [&](std::span<const double> x, std::span<double> g) {
              w.tape.rewind();
              TScalar r = eval_residual_tape(*prog_, term, x, w.tape, w.leaves);
              std::fill(g.begin(), g.end(), 0.0);
              w.tape.backprop_accumulate(r.id, 2.0 * r.val(), g, w.adjoints);
            },
            np, lo, hi, q->reltol, q->abstol, q->maxiters);
        term_grad = std::move(gest.value);
      }
      for (size_t k = 0; k < np; ++k) out.grad[k] += weights[i] * term_grad[k];
      if (want_per_term) out.per_term_grad[i] = term_grad;
    }
  } else {
    // Discretize-then-Optimize at exactly the current sample.
    std::vector<std::unique_ptr<GradWorker>> workers;
    int nthreads = std::min(thread_cap(), kChunks);
    for (int c = 0; c < kChunks; ++c) workers.push_back(std::make_unique<GradWorker>());

    for (size_t i = 0; i < terms_.size(); ++i) {
      const LossTerm& term = prog_->terms[i];
      const TermState& st = terms_[i];
      const size_t n = st.points.size();
      double scale = std::holds_alternative<GridStrategy>(strat_)
                         ? st.quad_weight
                         : 1.0 / static_cast<double>(n);

      auto run_chunk = [&](int c) {
        GradWorker& w = *workers[static_cast<size_t>(c)];
        w.reset_for_term(params);
        for (size_t k = 0; k < w.leaves.size(); ++k) w.tape.set_leaf(static_cast<uint32_t>(k), params[k]);
        size_t begin = n * static_cast<size_t>(c) / kChunks;
        size_t end = n * static_cast<size_t>(c + 1) / kChunks;
        for (size_t p = begin; p < end; ++p) {
          w.tape.rewind();
          TScalar r = eval_residual_tape(*prog_, term, st.points[p], w.tape, w.leaves);
          double rv = r.val();
          w.loss_partial += rv * rv;
          w.tape.backprop_accumulate(r.id, 2.0 * scale * rv, w.grad, w.adjoints);
        }
      };

      if (nthreads > 1 && n >= 8) {
        std::vector<std::future<void>> futs;
        for (int c = 1; c < kChunks; ++c)
          futs.push_back(std::async(std::launch::async, run_chunk, c));
        run_chunk(0);
        for (auto& f : futs) f.get();
      } else {
        for (int c = 0; c < kChunks; ++c) run_chunk(c);
      }

      // fixed chunk-order reduction keeps results independent of thread count
      double acc = 0.0;
      for (int c = 0; c < kChunks; ++c) acc += workers[static_cast<size_t>(c)]->loss_partial;
      out.breakdown.per_term[i] =
          std::holds_alternative<GridStrategy>(strat_) ? acc * st.quad_weight
                                                       : acc / static_cast<double>(n);
      for (size_t k = 0; k < np; ++k) {
        double g = 0.0;
        for (int c = 0; c < kChunks; ++c) g += workers[static_cast<size_t>(c)]->grad[k];
        out.grad[k] += weights[i] * g;
        if (want_per_term) out.per_term_grad[i][k] = g;
      }
    }
  }

  if (prog_->additional.present) {
    GradWorker w;
    w.init(params);
    TScalar extra = additional_loss_tape(*prog_, w.tape, w.leaves);
    out.breakdown.additional = extra.val();
    w.tape.backprop_accumulate(extra.id, 1.0, out.grad, w.adjoints);
  }
  out.breakdown.total = out.breakdown.additional;
  for (size_t i = 0; i < terms_.size(); ++i)
    out.breakdown.total += weights[i] * out.breakdown.per_term[i];
  for (double g : out.grad)
    if (!std::isfinite(g)) throw EvalError("loss_gradient: non-finite gradient entry");
  return out;
}

}  // namespace pinn
