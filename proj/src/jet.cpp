#include "pinn/jet.hpp"

#include <stdexcept>

namespace pinn {

JetRecord input_jet(const MlpSpec& spec, std::span<const double> params,
                    std::span<const double> x, const std::vector<int>& second_axes) {
  int dim = spec.input_dim();
  if (static_cast<int>(x.size()) != dim)
    throw std::invalid_argument("input_jet: input dimension mismatch");
  if (dim > kMaxJetAxes)
    throw std::invalid_argument("input_jet: too many input axes");
  JetShape sh;
  sh.n1 = dim;
  sh.n2 = static_cast<int>(second_axes.size());
  for (size_t j = 0; j < second_axes.size(); ++j) {
    int axis = second_axes[j];
    if (axis < 0 || axis >= dim)
      throw std::invalid_argument("input_jet: second-order axis out of range");
    sh.map2[j] = axis;
  }

  std::vector<Jet<double>> inputs(static_cast<size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    Jet<double>& in = inputs[static_cast<size_t>(i)];
    in.sh = &sh;
    in.v = x[static_cast<size_t>(i)];
    for (int k = 0; k < sh.n1; ++k) in.d1[static_cast<size_t>(k)] = (k == i) ? 1.0 : 0.0;
    for (int j = 0; j < sh.n2; ++j) in.d2[static_cast<size_t>(j)] = 0.0;
  }

  auto param = [&](size_t i) { return params[i]; };
  std::vector<Jet<double>> out =
      mlp_forward_jet<double>(spec, param, std::span<const Jet<double>>(inputs), 0.0);

  JetRecord rec;
  rec.value.resize(out.size());
  rec.first.resize(out.size());
  rec.second.resize(out.size());
  for (size_t o = 0; o < out.size(); ++o) {
    rec.value[o] = out[o].v;
    rec.first[o].assign(out[o].d1.begin(), out[o].d1.begin() + sh.n1);
    rec.second[o].assign(out[o].d2.begin(), out[o].d2.begin() + sh.n2);
  }
  return rec;
}

std::vector<double> loss_param_gradient(
    const std::function<TScalar(Tape&, std::span<const TScalar>)>& loss,
    std::span<const double> params) {
  Tape tape;
  std::vector<TScalar> leaves(params.size());
  for (size_t i = 0; i < params.size(); ++i)
    leaves[i] = TScalar{&tape, tape.add_leaf(params[i])};
  TScalar out = loss(tape, leaves);
  double value = out.val();
  if (!std::isfinite(value))
    throw std::runtime_error("loss_param_gradient: non-finite loss value " +
                             std::to_string(value));
  std::vector<double> grad(params.size(), 0.0);
  std::vector<double> scratch;
  tape.backprop_accumulate(out.id, 1.0, grad, scratch);
  return grad;
}

}  // namespace pinn
