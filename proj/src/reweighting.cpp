#include "pinn/reweighting.hpp"

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

}  // namespace

WeightSchemeConfig parse_weight_scheme(const std::string& text) {
  std::vector<std::string> parts = split(text, ':');
  if (parts.empty()) throw std::invalid_argument("empty weight scheme");
  const std::string& kind = parts[0];
  auto opts = [&](auto&& apply) {
    for (size_t i = 1; i < parts.size(); ++i) {
      auto kv = split(parts[i], '=');
      if (kv.size() != 2)
        throw std::invalid_argument("weight options look like key=value");
      apply(kv[0], kv[1]);
    }
  };
  if (kind == "fixed") {
    FixedWeights f;
    for (size_t i = 1; i < parts.size(); ++i) f.weights.push_back(std::stod(parts[i]));
    return f;
  }
  if (kind == "lossgrad") {
    LossGradientsScheme s;
    opts([&](const std::string& k, const std::string& v) {
      if (k == "gamma") s.gamma = std::stod(v);
      else if (k == "every") s.update_every = std::stoi(v);
      else if (k == "eps") s.clamp_eps = std::stod(v);
      else throw std::invalid_argument("unknown lossgrad option '" + k + "'");
    });
    if (s.gamma < 0.0 || s.gamma > 1.0)
      throw std::invalid_argument("lossgrad gamma must be in [0,1]");
    if (s.update_every < 1) throw std::invalid_argument("lossgrad every must be >= 1");
    return s;
  }
  if (kind == "minimax") {
    MiniMaxScheme s;
    opts([&](const std::string& k, const std::string& v) {
      if (k == "lrpde") s.lr_pde = std::stod(v);
      else if (k == "lrbc") s.lr_bc = std::stod(v);
      else if (k == "every") s.update_every = std::stoi(v);
      else throw std::invalid_argument("unknown minimax option '" + k + "'");
    });
    if (s.update_every < 1) throw std::invalid_argument("minimax every must be >= 1");
    return s;
  }
  throw std::invalid_argument("unknown weight scheme '" + kind + "'");
}

std::string weight_scheme_name(const WeightSchemeConfig& c) {
  std::ostringstream os;
  if (std::holds_alternative<FixedWeights>(c)) {
    os << "fixed";
  } else if (const auto* lg = std::get_if<LossGradientsScheme>(&c)) {
    os << "lossgrad:gamma=" << lg->gamma << ":every=" << lg->update_every;
  } else if (const auto* mm = std::get_if<MiniMaxScheme>(&c)) {
    os << "minimax:lrpde=" << mm->lr_pde << ":lrbc=" << mm->lr_bc;
  }
  return os.str();
}

WeightScheme::WeightScheme(WeightSchemeConfig config, size_t term_count,
                           std::span<const bool> is_boundary)
    : config_(std::move(config)),
      weights_(term_count, 1.0),
      boundary_(is_boundary.begin(), is_boundary.end()) {
  if (boundary_.size() != term_count)
    throw std::invalid_argument("WeightScheme: boundary flag count mismatch");
  if (const auto* f = std::get_if<FixedWeights>(&config_)) {
    if (!f->weights.empty()) {
      if (f->weights.size() != term_count)
        throw std::invalid_argument("fixed weights: need one weight per term");
      weights_ = f->weights;
      for (double w : weights_)
        if (!(w > 0.0)) throw std::invalid_argument("weights must stay positive");
    }
  }
}

bool WeightScheme::wants_term_gradients(int step) const {
  const auto* lg = std::get_if<LossGradientsScheme>(&config_);
  return lg && step % lg->update_every == 0;
}

bool WeightScheme::wants_term_losses(int step) const {
  const auto* mm = std::get_if<MiniMaxScheme>(&config_);
  return mm && step % mm->update_every == 0;
}

void WeightScheme::update_loss_gradients(
    int step, std::span<const std::vector<double>> term_grads) {
  const auto* lg = std::get_if<LossGradientsScheme>(&config_);
  if (!lg || step % lg->update_every != 0) return;
  if (term_grads.size() != weights_.size())
    throw std::invalid_argument("update_loss_gradients: one gradient per term");
  for (size_t i = 1; i < term_grads.size(); ++i)
    if (term_grads[i].size() != term_grads[0].size())
      throw std::invalid_argument("update_loss_gradients: gradient length mismatch");
  for (size_t i = 0; i < weights_.size(); ++i) {
    double mean = 0.0;
    for (double g : term_grads[i]) mean += std::fabs(g);
    mean /= static_cast<double>(term_grads[i].size());
    double candidate = 1.0 / (mean + lg->clamp_eps);
    weights_[i] = (1.0 - lg->gamma) * weights_[i] + lg->gamma * candidate;
  }
}

void WeightScheme::update_minimax(int step, std::span<const double> term_losses) {
  const auto* mm = std::get_if<MiniMaxScheme>(&config_);
  if (!mm || step % mm->update_every != 0) return;
  if (term_losses.size() != weights_.size())
    throw std::invalid_argument("update_minimax: one loss per term");
  for (size_t i = 0; i < weights_.size(); ++i) {
    double lr = boundary_[i] ? mm->lr_bc : mm->lr_pde;
    weights_[i] += lr * term_losses[i];
  }
}

}  // namespace pinn
