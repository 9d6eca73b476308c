#include "pinn/tape.hpp"

namespace pinn {

void Tape::backprop_accumulate(uint32_t output, double seed, std::span<double> grad,
                               std::vector<double>& adjoint_buf) const {
  adjoint_buf.assign(nodes_.size(), 0.0);
  adjoint_buf[output] = seed;
  for (uint32_t i = static_cast<uint32_t>(nodes_.size()); i-- > n_leaves_;) {
    double adj = adjoint_buf[i];
    if (adj == 0.0) continue;  // also keeps 0 * inf out of singular branches
    const Node& n = nodes_[i];
    switch (n.op) {
      case Op::Leaf:
      case Op::Const:
        break;
      case Op::Add:
        adjoint_buf[n.a] += adj;
        adjoint_buf[n.b] += adj;
        break;
      case Op::Sub:
        adjoint_buf[n.a] += adj;
        adjoint_buf[n.b] -= adj;
        break;
      case Op::Mul:
        adjoint_buf[n.a] += adj * nodes_[n.b].val;
        adjoint_buf[n.b] += adj * nodes_[n.a].val;
        break;
      case Op::Div:
        adjoint_buf[n.a] += adj / nodes_[n.b].val;
        adjoint_buf[n.b] -= adj * n.val / nodes_[n.b].val;
        break;
      case Op::Neg:
        adjoint_buf[n.a] -= adj;
        break;
      case Op::AddImm:
        adjoint_buf[n.a] += adj;
        break;
      case Op::MulImm:
        adjoint_buf[n.a] += adj * n.imm;
        break;
      case Op::RsubImm:
        adjoint_buf[n.a] -= adj;
        break;
      case Op::RdivImm:
        adjoint_buf[n.a] -= adj * n.val / nodes_[n.a].val;
        break;
      case Op::PowImm:
        adjoint_buf[n.a] += adj * n.imm * std::pow(nodes_[n.a].val, n.imm - 1.0);
        break;
      case Op::Sin:
        adjoint_buf[n.a] += adj * std::cos(nodes_[n.a].val);
        break;
      case Op::Cos:
        adjoint_buf[n.a] -= adj * std::sin(nodes_[n.a].val);
        break;
      case Op::Exp:
        adjoint_buf[n.a] += adj * n.val;
        break;
      case Op::Log:
        adjoint_buf[n.a] += adj / nodes_[n.a].val;
        break;
      case Op::Sqrt:
        adjoint_buf[n.a] += adj * 0.5 / n.val;
        break;
      case Op::Tanh:
        adjoint_buf[n.a] += adj * (1.0 - n.val * n.val);
        break;
      case Op::Sinh:
        adjoint_buf[n.a] += adj * std::cosh(nodes_[n.a].val);
        break;
      case Op::Cosh:
        adjoint_buf[n.a] += adj * std::sinh(nodes_[n.a].val);
        break;
      case Op::Abs: {
        double x = nodes_[n.a].val;
        adjoint_buf[n.a] += adj * (x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0));
        break;
      }
      case Op::Erf:
        adjoint_buf[n.a] +=
            adj * (2.0 / std::sqrt(M_PI)) * std::exp(-nodes_[n.a].val * nodes_[n.a].val);
        break;
    }
  }
  for (uint32_t i = 0; i < n_leaves_; ++i) grad[i] += adjoint_buf[i];
}

}  // namespace pinn
