#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "pinn/reweighting.hpp"

using namespace pinn;

namespace {

WeightScheme make(WeightSchemeConfig cfg, size_t n, std::vector<bool> bc = {}) {
  if (bc.empty()) bc.assign(n, false);
  std::vector<bool> flags(bc.begin(), bc.end());
  // std::vector<bool> has no data(); expand through a real bool buffer
  std::unique_ptr<bool[]> buf(new bool[n]);
  for (size_t i = 0; i < n; ++i) buf[i] = flags[i];
  return WeightScheme(std::move(cfg), n, std::span<const bool>(buf.get(), n));
}

}  // namespace

TEST_CASE("loss gradients: mean |grad| 0.5 with gamma 1 gives weight 2") {
  LossGradientsScheme cfg;
  cfg.gamma = 1.0;
  cfg.update_every = 1;
  cfg.clamp_eps = 1e-12;
  WeightScheme ws = make(cfg, 1);
  std::vector<std::vector<double>> grads = {{0.5, -0.5, 0.5, -0.5}};
  ws.update_loss_gradients(1, grads);
  CHECK(ws.weights()[0] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("loss gradients: gamma 0 leaves weights unchanged") {
  LossGradientsScheme cfg;
  cfg.gamma = 0.0;
  cfg.update_every = 1;
  WeightScheme ws = make(cfg, 2);
  std::vector<std::vector<double>> grads = {{5.0}, {0.01}};
  ws.update_loss_gradients(1, grads);
  CHECK(ws.weights() == std::vector<double>{1.0, 1.0});
}

TEST_CASE("loss gradients: all-zero gradient clamps at 1e7") {
  LossGradientsScheme cfg;
  cfg.gamma = 1.0;
  cfg.update_every = 1;
  WeightScheme ws = make(cfg, 1);
  std::vector<std::vector<double>> grads = {{0.0, 0.0}};
  ws.update_loss_gradients(1, grads);
  CHECK(ws.weights()[0] == doctest::Approx(1e7));
}

TEST_CASE("loss gradients: gamma 1 equalizes weight * mean|grad| across terms") {
  LossGradientsScheme cfg;
  cfg.gamma = 1.0;
  cfg.update_every = 1;
  WeightScheme ws = make(cfg, 3);
  std::vector<std::vector<double>> grads = {{2.0, -4.0}, {0.05, 0.15}, {10.0, 30.0}};
  ws.update_loss_gradients(1, grads);
  std::vector<double> scaled;
  for (size_t i = 0; i < 3; ++i) {
    double mean = 0.0;
    for (double g : grads[i]) mean += std::fabs(g);
    mean /= static_cast<double>(grads[i].size());
    scaled.push_back(ws.weights()[i] * mean);
  }
  for (double s : scaled) CHECK(s == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("minimax: arithmetic and per-kind learning rates") {
  MiniMaxScheme cfg;
  cfg.lr_pde = 0.1;
  cfg.lr_bc = 0.1;
  WeightScheme ws = make(cfg, 1);
  std::vector<double> losses = {2.0};
  ws.update_minimax(1, losses);
  CHECK(ws.weights()[0] == doctest::Approx(1.2));
  losses = {0.0};
  ws.update_minimax(2, losses);
  CHECK(ws.weights()[0] == doctest::Approx(1.2));

  MiniMaxScheme cfg2;
  cfg2.lr_pde = 0.01;
  cfg2.lr_bc = 0.1;
  WeightScheme ws2 = make(cfg2, 2, {false, true});
  std::vector<double> ones = {1.0, 1.0};
  ws2.update_minimax(1, ones);
  CHECK(ws2.weights()[0] == doctest::Approx(1.01));
  CHECK(ws2.weights()[1] == doctest::Approx(1.1));
}

TEST_CASE("minimax: weights non-decreasing over 1000 positive-loss steps") {
  MiniMaxScheme cfg;
  WeightScheme ws = make(cfg, 4, {false, false, true, true});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::vector<double> prev = ws.weights();
  for (int step = 1; step <= 1000; ++step) {
    std::vector<double> losses = {u(rng), u(rng), u(rng), u(rng)};
    ws.update_minimax(step, losses);
    for (size_t i = 0; i < 4; ++i) {
      CHECK(ws.weights()[i] >= prev[i]);
      CHECK(std::isfinite(ws.weights()[i]));
      CHECK(ws.weights()[i] > 0.0);
    }
    prev = ws.weights();
  }
}

TEST_CASE("update_every honored: weights change only on multiples") {
  LossGradientsScheme cfg;
  cfg.gamma = 0.5;
  cfg.update_every = 10;
  WeightScheme ws = make(cfg, 1);
  std::vector<std::vector<double>> grads = {{4.0}};
  for (int step = 1; step <= 25; ++step) {
    std::vector<double> before = ws.weights();
    CHECK(ws.wants_term_gradients(step) == (step % 10 == 0));
    ws.update_loss_gradients(step, grads);
    if (step % 10 == 0)
      CHECK(ws.weights() != before);
    else
      CHECK(ws.weights() == before);
  }
}

TEST_CASE("weights never become non-finite, zero, or negative") {
  LossGradientsScheme cfg;
  cfg.gamma = 1.0;
  cfg.update_every = 1;
  WeightScheme ws = make(cfg, 2);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int step = 1; step <= 200; ++step) {
    std::vector<std::vector<double>> grads = {{u(rng), u(rng), 0.0},
                                              {0.0, 0.0, 0.0}};
    ws.update_loss_gradients(step, grads);
    for (double w : ws.weights()) {
      CHECK(std::isfinite(w));
      CHECK(w > 0.0);
      CHECK(w <= 1e7 + 1.0);
    }
  }
}

TEST_CASE("parse_weight_scheme") {
  CHECK(std::holds_alternative<FixedWeights>(parse_weight_scheme("fixed")));
  auto lg = std::get<LossGradientsScheme>(parse_weight_scheme("lossgrad:gamma=0.3:every=5"));
  CHECK(lg.gamma == 0.3);
  CHECK(lg.update_every == 5);
  auto mm = std::get<MiniMaxScheme>(parse_weight_scheme("minimax:lrpde=0.001:lrbc=0.5"));
  CHECK(mm.lr_pde == 0.001);
  CHECK(mm.lr_bc == 0.5);
  CHECK_THROWS(parse_weight_scheme("lossgrad:gamma=2"));
  CHECK_THROWS(parse_weight_scheme("nope"));
}
