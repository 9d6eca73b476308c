#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pinn {

enum class Activation { Sigmoid, Tanh, Gelu, Identity };

Activation activation_from_name(const std::string& name);
const char* activation_name(Activation a);

struct LayerSpec {
  int in = 0;
  int out = 0;
  Activation act = Activation::Identity;
};

struct MlpSpec {
  std::vector<LayerSpec> layers;

  int input_dim() const { return layers.empty() ? 0 : layers.front().in; }
  int output_dim() const { return layers.empty() ? 0 : layers.back().out; }
  size_t param_count() const;
  bool chains() const;  // consecutive layer dims match, final out >= 1

  /// dims = {2, 16, 16, 1} gives hidden layers with `hidden` activation and an
  /// identity output layer.
  static MlpSpec dense(const std::vector<int>& dims, Activation hidden);
};

/// All network weights in one contiguous vector: per layer, the row-major
/// weight matrix followed by the bias vector. Inverse problems append the
/// physical parameters at the tail.
using FlatParams = std::vector<double>;

/// Glorot-uniform weights, zero biases; a pure function of (spec, seed).
FlatParams init_params(const MlpSpec& spec, uint64_t seed);

std::vector<double> mlp_forward(const MlpSpec& spec, std::span<const double> params,
                                std::span<const double> x);

void save_params_binary(const FlatParams& p, const std::string& path);
FlatParams load_params_binary(const std::string& path);
void save_params_text(const FlatParams& p, const std::string& path);
FlatParams load_params_text(const std::string& path);

}  // namespace pinn
