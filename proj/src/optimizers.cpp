#include "pinn/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pinn {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

void check_grad(std::span<const double> grad) {
  for (double g : grad)
    if (!std::isfinite(g))
      throw std::runtime_error("optimizer: non-finite gradient entry");
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

}  // namespace

void adam_step(AdamState& state, FlatParams& params, std::span<const double> grad) {
  if (grad.size() != params.size()) throw std::invalid_argument("adam_step: size mismatch");
  check_grad(grad);
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  state.t += 1;
  double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
    double mhat = state.m[i] / c1;
    double vhat = state.v[i] / c2;
    double step = mhat / (std::sqrt(vhat) + state.eps);
    step = std::clamp(step, -1.0, 1.0);  // normalized update stays within lr
    params[i] -= state.lr * step;
  }
}

void rmsprop_step(RmsPropState& state, FlatParams& params, std::span<const double> grad) {
  if (grad.size() != params.size())
    throw std::invalid_argument("rmsprop_step: size mismatch");
  check_grad(grad);
  if (state.sq.empty()) state.sq.assign(params.size(), 0.0);
  state.t += 1;
  // bias-corrected mean square, so the very first step is already normalized
  double c = 1.0 - std::pow(state.rho, static_cast<double>(state.t));
  for (size_t i = 0; i < params.size(); ++i) {
    state.sq[i] = state.rho * state.sq[i] + (1.0 - state.rho) * grad[i] * grad[i];
    double step = grad[i] / (std::sqrt(state.sq[i] / c) + state.eps);
    step = std::clamp(step, -1.0, 1.0);  // normalized update stays within lr
    params[i] -= state.lr * step;
  }
}

const char* status_name(QuasiNewtonStatus s) {
  switch (s) {
    case QuasiNewtonStatus::MaxIters: return "maxiters";
    case QuasiNewtonStatus::GradientConverged: return "gradient_converged";
    case QuasiNewtonStatus::LineSearchFailed: return "line_search_failed";
  }
  return "?";
}

namespace {

// Strong-Wolfe line search (bracket and zoom). Trial evaluations that throw
// or return non-finite values count as overshoots and shrink the bracket.
struct LinePoint {
  double alpha = 0.0;
  double f = 0.0;
  double slope = 0.0;  // directional derivative g(x + alpha p) . p
};

class LineSearch {
 public:
  LineSearch(const QuasiNewtonState& cfg, const LossOracle& oracle,
             const FlatParams& x0, std::span<const double> p)
      : cfg_(cfg), oracle_(oracle), x0_(x0), p_(p), trial_(x0.size()) {}

  // Returns the accepted step, or alpha=0 on failure. On success *g_out holds
  // the frozen-sample gradient at the accepted point.
  LinePoint run(double f0, double slope0, std::vector<double>* g_out) {
    f0_ = f0;
    slope0_ = slope0;
    LinePoint prev{0.0, f0, slope0};
    double alpha = 1.0;
    for (int i = 0; i < cfg_.max_line_trials; ++i) {
      LinePoint cur;
      if (!eval(alpha, &cur)) {
        // overshot into a non-finite region: zoom toward the last good point
        return zoom(prev, {alpha, std::numeric_limits<double>::infinity(), 0.0}, g_out);
      }
      if (cur.f > f0_ + cfg_.armijo_c1 * cur.alpha * slope0_ ||
          (i > 0 && cur.f >= prev.f))
        return zoom(prev, cur, g_out);
      if (std::fabs(cur.slope) <= -cfg_.wolfe_c2 * slope0_) {
        *g_out = std::move(last_grad_);
        return cur;
      }
      if (cur.slope >= 0.0) return zoom(cur, prev, g_out);
      prev = cur;
      alpha *= expansion_;
    }
    return {0.0, f0, 0.0};
  }

 private:
  bool eval(double alpha, LinePoint* out) {
    for (size_t i = 0; i < x0_.size(); ++i) trial_[i] = x0_[i] + alpha * p_[i];
    try {
      auto [f, g] = oracle_.value_and_grad_frozen
                        ? oracle_.value_and_grad_frozen(trial_)
                        : oracle_.value_and_grad(trial_);
      if (!std::isfinite(f)) return false;
      out->alpha = alpha;
      out->f = f;
      out->slope = 0.0;
      for (size_t i = 0; i < p_.size(); ++i) out->slope += g[i] * p_[i];
      last_grad_ = std::move(g);
      return true;
    } catch (const std::exception&) {
      return false;
    }
  }

  // lo satisfies Armijo; hi brackets a Wolfe point (or is bad/non-finite).
  LinePoint zoom(LinePoint lo, LinePoint hi, std::vector<double>* g_out) {
    std::vector<double> lo_grad = last_grad_;
    for (int i = 0; i < cfg_.max_line_trials; ++i) {
      // quadratic-interpolated trial from the lo-side slope, kept safely
      // inside the bracket; fall back to bisection
      double alpha = 0.5 * (lo.alpha + hi.alpha);
      if (std::isfinite(hi.f)) {
        double d = hi.alpha - lo.alpha;
        double denom = hi.f - lo.f - lo.slope * d;
        if (denom != 0.0) {
          double cand = lo.alpha - 0.5 * lo.slope * d * d / denom;
          double pad = 0.1 * std::fabs(d);
          double a = std::min(lo.alpha, hi.alpha), b = std::max(lo.alpha, hi.alpha);
          if (cand > a + pad && cand < b - pad) alpha = cand;
        }
      }
      LinePoint cur;
      if (!eval(alpha, &cur)) {
        hi = {alpha, std::numeric_limits<double>::infinity(), 0.0};
        continue;
      }
      if (cur.f > f0_ + cfg_.armijo_c1 * cur.alpha * slope0_ || cur.f >= lo.f) {
        hi = cur;
        continue;
      }
      if (std::fabs(cur.slope) <= -cfg_.wolfe_c2 * slope0_) {
        *g_out = std::move(last_grad_);
        return cur;
      }
      if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
      lo = cur;
      lo_grad = last_grad_;
      if (std::fabs(hi.alpha - lo.alpha) < 1e-14 * std::max(1.0, lo.alpha)) break;
    }
    if (lo.alpha > 0.0 && lo.f < f0_) {
      // settle for the best Armijo point found
      *g_out = std::move(lo_grad);
      return lo;
    }
    return {0.0, f0_, 0.0};
  }

  const QuasiNewtonState& cfg_;
  const LossOracle& oracle_;
  const FlatParams& x0_;
  std::span<const double> p_;
  FlatParams trial_;
  std::vector<double> last_grad_;
  double f0_ = 0.0;
  double slope0_ = 0.0;
  double expansion_ = 5.0;
};

class BfgsMatrix {
 public:
  explicit BfgsMatrix(size_t n) : n_(n), h_(n * n, 0.0) {
    for (size_t i = 0; i < n; ++i) h_[i * n + i] = 1.0;
  }

  bool fresh() const { return fresh_; }

  void apply(std::span<const double> g, std::span<double> out) const {
    for (size_t i = 0; i < n_; ++i) {
      double acc = 0.0;
      const double* row = h_.data() + i * n_;
      for (size_t j = 0; j < n_; ++j) acc += row[j] * g[j];
      out[i] = acc;
    }
  }

  // Standard BFGS inverse-Hessian update; keeps the matrix symmetric.
  void update(std::span<const double> s, std::span<const double> y) {
    double sy = 0.0, yy = 0.0;
    for (size_t i = 0; i < n_; ++i) {
      sy += s[i] * y[i];
      yy += y[i] * y[i];
    }
    if (sy <= 1e-12) return;  // curvature skip
    if (fresh_ && yy > 0.0) {
      // rescale the identity seed to the curvature actually observed
      double gamma = sy / yy;
      for (size_t i = 0; i < n_; ++i) h_[i * n_ + i] = gamma;
      fresh_ = false;
    }
    double rho = 1.0 / sy;
    std::vector<double> hy(n_, 0.0);
    apply(y, hy);
    double yhy = 0.0;
    for (size_t i = 0; i < n_; ++i) yhy += y[i] * hy[i];
    double c = (1.0 + rho * yhy) * rho;
    for (size_t i = 0; i < n_; ++i) {
      for (size_t j = 0; j < n_; ++j) {
        h_[i * n_ + j] += c * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
      }
    }
  }

 private:
  size_t n_;
  std::vector<double> h_;
  bool fresh_ = true;
};

class LbfgsHistory {
 public:
  explicit LbfgsHistory(int m) : m_(static_cast<size_t>(m)) {}

  void push(std::vector<double> s, std::vector<double> y) {
    double sy = 0.0;
    for (size_t i = 0; i < s.size(); ++i) sy += s[i] * y[i];
    if (sy <= 1e-12) return;  // curvature skip
    s_.push_back(std::move(s));
    y_.push_back(std::move(y));
    rho_.push_back(1.0 / sy);
    if (s_.size() > m_) {
      s_.erase(s_.begin());
      y_.erase(y_.begin());
      rho_.erase(rho_.begin());
    }
  }

  // Two-loop recursion with gamma = s.y/y.y scaling of H0.
  void apply(std::span<const double> g, std::span<double> out) const {
    size_t n = g.size();
    std::vector<double> q(g.begin(), g.end());
    std::vector<double> alpha(s_.size());
    for (size_t k = s_.size(); k-- > 0;) {
      double a = 0.0;
      for (size_t i = 0; i < n; ++i) a += s_[k][i] * q[i];
      a *= rho_[k];
      alpha[k] = a;
      for (size_t i = 0; i < n; ++i) q[i] -= a * y_[k][i];
    }
    double gamma = 1.0;
    if (!s_.empty()) {
      double sy = 0.0, yy = 0.0;
      const auto& s = s_.back();
      const auto& y = y_.back();
      for (size_t i = 0; i < n; ++i) {
        sy += s[i] * y[i];
        yy += y[i] * y[i];
      }
      if (yy > 0.0) gamma = sy / yy;
    }
    for (size_t i = 0; i < n; ++i) q[i] *= gamma;
    for (size_t k = 0; k < s_.size(); ++k) {
      double b = 0.0;
      for (size_t i = 0; i < n; ++i) b += y_[k][i] * q[i];
      b *= rho_[k];
      for (size_t i = 0; i < n; ++i) q[i] += (alpha[k] - b) * s_[k][i];
    }
    for (size_t i = 0; i < n; ++i) out[i] = q[i];
  }

 private:
  size_t m_;
  std::vector<std::vector<double>> s_, y_;
  std::vector<double> rho_;
};

}  // namespace

QuasiNewtonStatus quasi_newton_run(const QuasiNewtonState& cfg, const LossOracle& oracle,
                                   FlatParams& params, int maxiters,
                                   const IterCallback& cb) {
  const size_t n = params.size();
  auto [f, g] = oracle.value_and_grad(params);
  check_grad(g);
  if (inf_norm(g) < cfg.grad_tol) return QuasiNewtonStatus::GradientConverged;

  BfgsMatrix dense(cfg.variant == QuasiNewtonVariant::Bfgs ? n : 0);
  LbfgsHistory history(cfg.history);

  std::vector<double> p(n), s(n), y(n);

  for (int iter = 1; iter <= maxiters; ++iter) {
    if (cfg.variant == QuasiNewtonVariant::Bfgs)
      dense.apply(g, p);
    else
      history.apply(g, p);
    double slope = 0.0;
    for (size_t i = 0; i < n; ++i) {
      p[i] = -p[i];
      slope += p[i] * g[i];
    }
    if (!(slope < 0.0)) {
      // not a descent direction (numerical breakdown): restart from steepest descent
      for (size_t i = 0; i < n; ++i) p[i] = -g[i];
      slope = 0.0;
      for (size_t i = 0; i < n; ++i) slope += p[i] * g[i];
      if (cfg.variant == QuasiNewtonVariant::Bfgs) dense = BfgsMatrix(n);
    }

    LineSearch search(cfg, oracle, params, p);
    std::vector<double> g_line;
    LinePoint accepted = search.run(f, slope, &g_line);
    if (accepted.alpha == 0.0) return QuasiNewtonStatus::LineSearchFailed;

    FlatParams trial(n);
    for (size_t i = 0; i < n; ++i) trial[i] = params[i] + accepted.alpha * p[i];

    // refresh on the live sample; deterministic strategies return the same
    // numbers the line search saw
    auto [f_fresh, g_new] = oracle.value_and_grad(trial);
    check_grad(g_new);
    for (size_t i = 0; i < n; ++i) {
      s[i] = trial[i] - params[i];
      y[i] = g_line[i] - g[i];
    }
    if (cfg.variant == QuasiNewtonVariant::Bfgs)
      dense.update(s, y);
    else
      history.push(s, y);

    params = std::move(trial);
    f = f_fresh;
    g = std::move(g_new);
    if (cb && !cb(iter, params, f, g)) return QuasiNewtonStatus::MaxIters;
    if (inf_norm(g) < cfg.grad_tol) return QuasiNewtonStatus::GradientConverged;
  }
  return QuasiNewtonStatus::MaxIters;
}

std::vector<OptimizerPhase> parse_schedule(const std::string& text) {
  std::vector<OptimizerPhase> phases;
  for (const std::string& part : split(text, '+')) {
    std::vector<std::string> bits = split(part, ':');
    if (bits.empty()) throw std::invalid_argument("empty optimizer phase");
    OptimizerPhase ph;
    size_t next = 1;
    if (bits[0] == "adam") {
      ph.kind = OptimizerPhase::Kind::Adam;
      ph.lr = 0.001;
      if (bits.size() > next) ph.lr = std::stod(bits[next++]);
    } else if (bits[0] == "rmsprop") {
      ph.kind = OptimizerPhase::Kind::RmsProp;
      ph.lr = 0.001;
      if (bits.size() > next) ph.lr = std::stod(bits[next++]);
    } else if (bits[0] == "bfgs") {
      ph.kind = OptimizerPhase::Kind::Bfgs;
    } else if (bits[0] == "lbfgs") {
      ph.kind = OptimizerPhase::Kind::Lbfgs;
    } else {
      throw std::invalid_argument("unknown optimizer '" + bits[0] + "'");
    }
    if (bits.size() > next) ph.iters = std::stoi(bits[next++]);
    if (bits.size() > next)
      throw std::invalid_argument("too many fields in optimizer phase '" + part + "'");
    phases.push_back(ph);
  }
  if (phases.empty()) throw std::invalid_argument("empty optimizer schedule");
  return phases;
}

std::string schedule_name(const std::vector<OptimizerPhase>& phases) {
  std::ostringstream os;
  for (size_t i = 0; i < phases.size(); ++i) {
    if (i) os << '+';
    switch (phases[i].kind) {
      case OptimizerPhase::Kind::Adam: os << "adam:" << phases[i].lr; break;
      case OptimizerPhase::Kind::RmsProp: os << "rmsprop:" << phases[i].lr; break;
      case OptimizerPhase::Kind::Bfgs: os << "bfgs"; break;
      case OptimizerPhase::Kind::Lbfgs: os << "lbfgs"; break;
    }
    if (phases[i].iters >= 0) os << ':' << phases[i].iters;
  }
  return os.str();
}

}  // namespace pinn
