#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace pinn {

struct FixedWeights {
  std::vector<double> weights;  // empty = all ones
};

/// Per-term weights from an exponential moving average of reciprocal
/// gradient-magnitude means; the clamp keeps a vanishing gradient from
/// blowing the weight past 1/clamp_eps.
struct LossGradientsScheme {
  double gamma = 0.1;
  int update_every = 10;
  double clamp_eps = 1e-7;
};

/// Gradient ascent on the weights concurrent with descent on the parameters;
/// boundary terms get the (much larger) boundary learning rate.
struct MiniMaxScheme {
  double lr_pde = 1e-4;
  double lr_bc = 1e-2;
  int update_every = 1;
};

using WeightSchemeConfig = std::variant<FixedWeights, LossGradientsScheme, MiniMaxScheme>;

/// fixed | lossgrad[:gamma=..][:every=..][:eps=..] | minimax[:lrpde=..][:lrbc=..][:every=..]
WeightSchemeConfig parse_weight_scheme(const std::string& text);
std::string weight_scheme_name(const WeightSchemeConfig& c);

/// Mutable per-term weight state driven by the training loop.
class WeightScheme {
 public:
  WeightScheme(WeightSchemeConfig config, size_t term_count,
               std::span<const bool> is_boundary);

  const std::vector<double>& weights() const { return weights_; }

  /// True when the coming step (1-based) is an update step needing per-term
  /// gradients (Loss Gradients scheme only).
  bool wants_term_gradients(int step) const;
  bool wants_term_losses(int step) const;

  void update_loss_gradients(int step, std::span<const std::vector<double>> term_grads);
  void update_minimax(int step, std::span<const double> term_losses);

  bool is_adaptive() const { return !std::holds_alternative<FixedWeights>(config_); }

 private:
  WeightSchemeConfig config_;
  std::vector<double> weights_;
  std::vector<bool> boundary_;
};

}  // namespace pinn
