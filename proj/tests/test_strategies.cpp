#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "pinn/parse.hpp"
#include "pinn/strategies.hpp"

using namespace pinn;

namespace {

// u(x) with a single identity layer W=1, b=0 evaluates to x exactly, so the
// equation u(x) = 0 has residual x.
LossProgram residual_is_x_program() {
  PdeSystem sys = parse_system(R"(
ivars x
dvars u(x)
domain x in [0, 1]
eq u(x) = 0
)");
  std::map<std::string, MlpSpec> nets;
  MlpSpec lin;
  lin.layers = {{1, 1, Activation::Identity}};
  nets["u"] = lin;
  return lower_system(sys, nets);
}

LossProgram poisson_program(int width = 8) {
  PdeSystem sys = parse_system(R"(
ivars x y
dvars u(x,y)
domain x in [0, 1]
domain y in [0, 1]
eq Dxx(u(x,y)) + Dyy(u(x,y)) = -sin(pi*x)*sin(pi*y)
bc u(0,y) = 0
bc u(1,y) = 0
bc u(x,0) = 0
bc u(x,1) = 0
)");
  std::map<std::string, MlpSpec> nets;
  nets["u"] = MlpSpec::dense({2, width, width, 1}, Activation::Sigmoid);
  return lower_system(sys, nets);
}

std::vector<double> unit_weights(const LossProgram& p) {
  return std::vector<double>(p.terms.size(), 1.0);
}

}  // namespace

TEST_CASE("parse_strategy round trips") {
  CHECK(std::holds_alternative<GridStrategy>(parse_strategy("grid:0.05")));
  auto g = std::get<GridStrategy>(parse_strategy("grid:0.2,0.1"));
  CHECK(g.dx == std::vector<double>{0.2, 0.1});
  auto q = std::get<QuasiRandomStrategy>(parse_strategy("quasirandom:64:lhs:fixed"));
  CHECK(q.points_per_term == 64);
  CHECK(q.sampler == QmcSampler::LatinHypercube);
  CHECK_FALSE(q.resample_each_step);
  auto qd = std::get<QuadratureStrategy>(parse_strategy("quadrature:abstol=1e-5:maxiters=250"));
  CHECK(qd.abstol == 1e-5);
  CHECK(qd.reltol == 1.0);
  CHECK(qd.maxiters == 250);
  CHECK_THROWS(parse_strategy("grid:-1"));
  CHECK_THROWS(parse_strategy("bogus"));
}

TEST_CASE("grid lattices: interior strict, boundary endpoint-inclusive") {
  LossProgram prog = poisson_program();
  LossEvaluator ev(prog, parse_strategy("grid:0.25"), 1);
  // interior [0,1]^2 at dx=0.25 -> {0.25,0.5,0.75}^2 = 9 points
  CHECK(ev.term_points(0).size() == 9);
  for (const auto& p : ev.term_points(0))
    for (double c : p) {
      CHECK(c > 0.0);
      CHECK(c < 1.0);
    }
  // boundary faces: free axis {0,...,1} inclusive
  LossEvaluator ev2(prog, parse_strategy("grid:0.5"), 1);
  CHECK(ev2.term_points(1).size() == 3);
  std::set<double> ys;
  for (const auto& p : ev2.term_points(1)) ys.insert(p[0]);
  CHECK(ys == std::set<double>{0.0, 0.5, 1.0});

  // dx >= extent leaves the interior lattice empty
  CHECK_THROWS(LossEvaluator(prog, parse_strategy("grid:1.0"), 1));
}

TEST_CASE("grid loss: residual x on [0,1], dx=0.25 -> 0.21875") {
  LossProgram prog = residual_is_x_program();
  FlatParams p = {1.0, 0.0};
  LossEvaluator ev(prog, parse_strategy("grid:0.25"), 1);
  auto lb = ev.loss_value(p, unit_weights(prog));
  CHECK(lb.total == doctest::Approx(0.21875).epsilon(1e-12));
}

TEST_CASE("quadrature loss: residual x gives integral of x^2 = 1/3") {
  LossProgram prog = residual_is_x_program();
  FlatParams p = {1.0, 0.0};
  LossEvaluator ev(prog, parse_strategy("quadrature:abstol=1e-6:maxiters=1000"), 1);
  auto lb = ev.loss_value(p, unit_weights(prog));
  CHECK(lb.total == doctest::Approx(1.0 / 3.0).epsilon(1e-5));
  REQUIRE(lb.error_bounds.size() == 1);
  CHECK(lb.error_bounds[0] >= std::fabs(lb.total - 1.0 / 3.0));
}

TEST_CASE("sampling strategies: boundary point counts and the mean rule") {
  LossProgram prog = poisson_program();
  FlatParams p = prog.initial_params(3);
  LossEvaluator ev(prog, parse_strategy("stochastic:100"), 42);
  auto lb = ev.loss_value(p, unit_weights(prog));
  CHECK(ev.term_points(0).size() == 100);
  for (size_t t = 1; t < 5; ++t) CHECK(ev.term_points(t).size() == 25);  // max(4, 100/4)
  // mean rule: term value equals hand mean over logged points
  double acc = 0.0;
  for (const auto& pt : ev.term_points(0)) {
    double r = eval_residual_value(prog, prog.terms[0], pt, p);
    acc += r * r;
  }
  CHECK(lb.per_term[0] == doctest::Approx(acc / 100.0).epsilon(1e-12));
}

TEST_CASE("exact oracle network zeroes the loss under every strategy") {
  // u(x) = 0 is an exact solution of Dt(u)=0 with bc u(0)=0; use zero params.
  PdeSystem sys = parse_system(R"(
ivars t
dvars u(t)
domain t in [0, 1]
eq Dt(u(t)) = 0
bc u(0) = 0
)");
  std::map<std::string, MlpSpec> nets;
  nets["u"] = MlpSpec::dense({1, 8, 1}, Activation::Tanh);
  LossProgram prog = lower_system(sys, nets);
  FlatParams p(prog.param_count(), 0.0);
  for (const char* s : {"grid:0.1", "stochastic:50", "quasirandom:50",
                        "quadrature:abstol=1e-8:maxiters=2000"}) {
    LossEvaluator ev(prog, parse_strategy(s), 7);
    CHECK(ev.loss_value(p, unit_weights(prog)).total < 1e-10);
  }
}

TEST_CASE("stochastic resamples between consecutive loss_value calls; grid does not") {
  LossProgram prog = poisson_program();
  FlatParams p = prog.initial_params(5);
  auto w = unit_weights(prog);

  LossEvaluator st(prog, parse_strategy("stochastic:16"), 11);
  st.loss_value(p, w);
  auto pts1 = st.term_points(0);
  st.loss_value(p, w);
  auto pts2 = st.term_points(0);
  CHECK(pts1 != pts2);

  // frozen: the sample is reused
  st.freeze(true);
  st.loss_value(p, w);
  CHECK(st.term_points(0) == pts2);
  st.freeze(false);

  LossEvaluator gr(prog, parse_strategy("grid:0.2"), 11);
  gr.loss_value(p, w);
  auto g1 = gr.term_points(0);
  gr.loss_value(p, w);
  CHECK(gr.term_points(0) == g1);

  LossEvaluator qf(prog, parse_strategy("quasirandom:16:sobol:fixed"), 11);
  qf.loss_value(p, w);
  auto q1 = qf.term_points(0);
  qf.loss_value(p, w);
  CHECK(qf.term_points(0) == q1);

  // resampling quasirandom draws successive blocks of one Sobol stream
  LossEvaluator qr(prog, parse_strategy("quasirandom:16:sobol"), 11);
  qr.loss_value(p, w);
  auto b1 = qr.term_points(0);
  qr.loss_value(p, w);
  auto b2 = qr.term_points(0);
  auto expect = sobol_points(32, 2, 0);
  for (int i = 0; i < 16; ++i) {
    CHECK(b1[static_cast<size_t>(i)] == expect[static_cast<size_t>(i)]);
    CHECK(b2[static_cast<size_t>(i)] == expect[static_cast<size_t>(i + 16)]);
  }
}

TEST_CASE("loss gradient: zero residual params give zero gradient everywhere") {
  PdeSystem sys = parse_system(R"(
ivars t
dvars u(t)
domain t in [0, 1]
eq Dt(u(t)) = 0
bc u(0) = 0
)");
  std::map<std::string, MlpSpec> nets;
  nets["u"] = MlpSpec::dense({1, 6, 1}, Activation::Tanh);
  LossProgram prog = lower_system(sys, nets);
  FlatParams p(prog.param_count(), 0.0);
  // all-zero params: network output identically 0 and residual 0
  for (const char* s : {"grid:0.1", "stochastic:32", "quadrature:abstol=1e-6"}) {
    LossEvaluator ev(prog, parse_strategy(s), 3);
    auto g = ev.loss_gradient(p, unit_weights(prog));
    double norm = 0.0;
    for (double v : g.grad) norm += std::fabs(v);
    CHECK(norm == doctest::Approx(0.0));
  }
}

TEST_CASE("grid gradient matches finite differences of the grid loss") {
  LossProgram prog = poisson_program(6);
  FlatParams p = prog.initial_params(9);
  auto w = unit_weights(prog);
  LossEvaluator ev(prog, parse_strategy("grid:0.25"), 1);
  auto g = ev.loss_gradient(p, w);
  CHECK(g.breakdown.total == doctest::Approx(ev.loss_value(p, w).total));
  std::mt19937_64 rng(2);
  for (int k = 0; k < 20; ++k) {
    size_t i = rng() % p.size();
    FlatParams up = p, dn = p;
    up[i] += 1e-6;
    dn[i] -= 1e-6;
    double fd =
        (ev.loss_value(up, w).total - ev.loss_value(dn, w).total) / 2e-6;
    CHECK(g.grad[i] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("per-term gradients sum (weighted) to the total gradient") {
  LossProgram prog = poisson_program(6);
  FlatParams p = prog.initial_params(13);
  std::vector<double> w = {1.0, 2.0, 0.5, 3.0, 1.5};
  LossEvaluator ev(prog, parse_strategy("quasirandom:32"), 4);
  auto g = ev.loss_gradient(p, w, true);
  REQUIRE(g.per_term_grad.size() == 5);
  for (size_t k = 0; k < p.size(); k += 7) {
    double s = 0.0;
    for (size_t i = 0; i < 5; ++i) s += w[i] * g.per_term_grad[i][k];
    CHECK(g.grad[k] == doctest::Approx(s).epsilon(1e-12));
  }
}

TEST_CASE("quadrature OtD gradient close to fine-grid DtO gradient (1-D diffusion)") {
  PdeSystem sys = parse_system(R"(
ivars t x
dvars u(t,x)
domain t in [0, 1]
domain x in [-1, 1]
eq Dt(u(t,x)) - Dxx(u(t,x)) = (exp(-t) - pi^2)*sin(pi*x)
bc u(0,x) = sin(pi*x)
bc u(t,-1) = 0
bc u(t,1) = 0
)");
  std::map<std::string, MlpSpec> nets;
  nets["u"] = MlpSpec::dense({2, 8, 1}, Activation::Sigmoid);
  LossProgram prog = lower_system(sys, nets);
  FlatParams p = prog.initial_params(17);
  auto w = unit_weights(prog);

  LossEvaluator quad(prog, parse_strategy("quadrature:abstol=1e-6:maxiters=600"), 1);
  auto gq = quad.loss_gradient(p, w);
  LossEvaluator fine(prog, parse_strategy("grid:0.01"), 1);
  auto gg = fine.loss_gradient(p, w);

  double dot = 0.0, nq = 0.0, ng = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    dot += gq.grad[i] * gg.grad[i];
    nq += gq.grad[i] * gq.grad[i];
    ng += gg.grad[i] * gg.grad[i];
  }
  double cosine = dot / std::sqrt(nq * ng);
  CHECK(cosine > 0.999);
}

TEST_CASE("loss does not depend on thread count") {
  LossProgram prog = poisson_program(6);
  FlatParams p = prog.initial_params(23);
  auto w = unit_weights(prog);
  LossEvaluator ev(prog, parse_strategy("grid:0.1"), 1);
  auto g = ev.loss_gradient(p, w);
  // the chunked reduction is fixed; run twice and compare bitwise
  auto g2 = ev.loss_gradient(p, w);
  CHECK(g.grad == g2.grad);
}

TEST_CASE("QMC beats plain MC on a smooth 2-D integrand at N=4096") {
  auto f = [](double x, double y) { return std::exp(x + y); };
  double truth = (M_E - 1.0) * (M_E - 1.0);
  auto sob = sobol_points(4096, 2, 0);
  double acc = 0.0;
  for (const auto& p : sob) acc += f(p[0], p[1]);
  double sobol_err = std::fabs(acc / 4096.0 - truth);

  std::vector<double> mc_errs;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(1000 + seed);
    auto pts = uniform_points(4096, 2, rng);
    double a = 0.0;
    for (const auto& p : pts) a += f(p[0], p[1]);
    mc_errs.push_back(std::fabs(a / 4096.0 - truth));
  }
  std::sort(mc_errs.begin(), mc_errs.end());
  double mc_median = 0.5 * (mc_errs[9] + mc_errs[10]);
  CHECK(sobol_err * 5.0 <= mc_median);
}
