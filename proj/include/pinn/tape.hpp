#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace pinn {

/// Reverse-mode scalar tape. Leaves are registered first (network weights and
/// physical parameters); everything after the leaves is rewound between
/// evaluation points so the buffer is reused.
class Tape {
 public:
  enum class Op : uint8_t {
    Leaf, Const,
    Add, Sub, Mul, Div, Neg,
    AddImm, MulImm, RsubImm, RdivImm, PowImm,
    Sin, Cos, Exp, Log, Sqrt, Tanh, Sinh, Cosh, Abs, Erf,
  };

  struct Node {
    Op op;
    uint32_t a = 0, b = 0;
    double val = 0.0;
    double imm = 0.0;
  };

  uint32_t add_leaf(double v) {
    if (nodes_.size() != n_leaves_)
      throw std::logic_error("Tape: leaves must be registered before other nodes");
    nodes_.push_back({Op::Leaf, 0, 0, v, 0.0});
    return n_leaves_++;
  }

  void set_leaf(uint32_t i, double v) { nodes_[i].val = v; }
  double value(uint32_t i) const { return nodes_[i].val; }
  uint32_t size() const { return static_cast<uint32_t>(nodes_.size()); }
  uint32_t leaf_count() const { return n_leaves_; }

  /// Drops every non-leaf node; leaf values are kept.
  void rewind() { nodes_.resize(n_leaves_); }

  void reserve(size_t n) { nodes_.reserve(n); }

  bool is_const(uint32_t i) const { return nodes_[i].op == Op::Const; }

  // Builders fold constant operands away; the folds matter because seeded
  // input jets are mostly exact zeros and ones.
  uint32_t constant(double v) { return push({Op::Const, 0, 0, v, 0.0}); }
  uint32_t add(uint32_t a, uint32_t b) {
    if (is_const(a)) return add_imm(b, nodes_[a].val);
    if (is_const(b)) return add_imm(a, nodes_[b].val);
    return push({Op::Add, a, b, nodes_[a].val + nodes_[b].val, 0.0});
  }
  uint32_t sub(uint32_t a, uint32_t b) {
    if (is_const(b)) return add_imm(a, -nodes_[b].val);
    if (is_const(a)) return rsub_imm(b, nodes_[a].val);
    return push({Op::Sub, a, b, nodes_[a].val - nodes_[b].val, 0.0});
  }
  uint32_t mul(uint32_t a, uint32_t b) {
    if (is_const(a)) return mul_imm(b, nodes_[a].val);
    if (is_const(b)) return mul_imm(a, nodes_[b].val);
    return push({Op::Mul, a, b, nodes_[a].val * nodes_[b].val, 0.0});
  }
  uint32_t div(uint32_t a, uint32_t b) {
    if (is_const(b)) return mul_imm(a, 1.0 / nodes_[b].val);
    if (is_const(a)) return rdiv_imm(b, nodes_[a].val);
    return push({Op::Div, a, b, nodes_[a].val / nodes_[b].val, 0.0});
  }
  uint32_t neg(uint32_t a) {
    if (is_const(a)) return constant(-nodes_[a].val);
    return push({Op::Neg, a, 0, -nodes_[a].val, 0.0});
  }
  uint32_t add_imm(uint32_t a, double c) {
    if (c == 0.0) return a;
    if (is_const(a)) return constant(nodes_[a].val + c);
    return push({Op::AddImm, a, 0, nodes_[a].val + c, c});
  }
  uint32_t mul_imm(uint32_t a, double c) {
    if (c == 1.0) return a;
    if (is_const(a)) return constant(nodes_[a].val * c);
    if (c == 0.0) return constant(0.0);
    return push({Op::MulImm, a, 0, nodes_[a].val * c, c});
  }
  uint32_t rsub_imm(uint32_t a, double c) {  // c - a
    if (is_const(a)) return constant(c - nodes_[a].val);
    return push({Op::RsubImm, a, 0, c - nodes_[a].val, c});
  }
  uint32_t rdiv_imm(uint32_t a, double c) {  // c / a
    if (is_const(a)) return constant(c / nodes_[a].val);
    return push({Op::RdivImm, a, 0, c / nodes_[a].val, c});
  }
  uint32_t pow_imm(uint32_t a, double c) {
    if (is_const(a)) return constant(std::pow(nodes_[a].val, c));
    if (c == 1.0) return a;
    return push({Op::PowImm, a, 0, std::pow(nodes_[a].val, c), c});
  }
  uint32_t sin(uint32_t a) { return unary(Op::Sin, a, std::sin(nodes_[a].val)); }
  uint32_t cos(uint32_t a) { return unary(Op::Cos, a, std::cos(nodes_[a].val)); }
  uint32_t exp(uint32_t a) { return unary(Op::Exp, a, std::exp(nodes_[a].val)); }
  uint32_t log(uint32_t a) { return unary(Op::Log, a, std::log(nodes_[a].val)); }
  uint32_t sqrt(uint32_t a) { return unary(Op::Sqrt, a, std::sqrt(nodes_[a].val)); }
  uint32_t tanh(uint32_t a) { return unary(Op::Tanh, a, std::tanh(nodes_[a].val)); }
  uint32_t sinh(uint32_t a) { return unary(Op::Sinh, a, std::sinh(nodes_[a].val)); }
  uint32_t cosh(uint32_t a) { return unary(Op::Cosh, a, std::cosh(nodes_[a].val)); }
  uint32_t abs(uint32_t a) { return unary(Op::Abs, a, std::fabs(nodes_[a].val)); }
  uint32_t erf(uint32_t a) { return unary(Op::Erf, a, std::erf(nodes_[a].val)); }

  /// Accumulates d(seed * node[output]) / d(leaf_i) into grad[0..leaf_count).
  /// `adjoint_buf` is scratch, resized as needed.
  void backprop_accumulate(uint32_t output, double seed, std::span<double> grad,
                           std::vector<double>& adjoint_buf) const;

 private:
  uint32_t push(Node n) {
    nodes_.push_back(n);
    return static_cast<uint32_t>(nodes_.size() - 1);
  }

  uint32_t unary(Op op, uint32_t a, double v) {
    if (is_const(a)) return constant(v);
    return push({op, a, 0, v, 0.0});
  }

  std::vector<Node> nodes_;
  uint32_t n_leaves_ = 0;
};

/// Value on a tape; carries enough overloads that numeric templates work for
/// both double and TScalar.
struct TScalar {
  Tape* tape = nullptr;
  uint32_t id = 0;

  double val() const { return tape->value(id); }
};

inline TScalar operator+(TScalar a, TScalar b) { return {a.tape, a.tape->add(a.id, b.id)}; }
inline TScalar operator-(TScalar a, TScalar b) { return {a.tape, a.tape->sub(a.id, b.id)}; }
inline TScalar operator*(TScalar a, TScalar b) { return {a.tape, a.tape->mul(a.id, b.id)}; }
inline TScalar operator/(TScalar a, TScalar b) { return {a.tape, a.tape->div(a.id, b.id)}; }
inline TScalar operator-(TScalar a) { return {a.tape, a.tape->neg(a.id)}; }
inline TScalar operator+(TScalar a, double c) { return {a.tape, a.tape->add_imm(a.id, c)}; }
inline TScalar operator+(double c, TScalar a) { return a + c; }
inline TScalar operator-(TScalar a, double c) { return {a.tape, a.tape->add_imm(a.id, -c)}; }
inline TScalar operator-(double c, TScalar a) { return {a.tape, a.tape->rsub_imm(a.id, c)}; }
inline TScalar operator*(TScalar a, double c) { return {a.tape, a.tape->mul_imm(a.id, c)}; }
inline TScalar operator*(double c, TScalar a) { return a * c; }
inline TScalar operator/(TScalar a, double c) { return {a.tape, a.tape->mul_imm(a.id, 1.0 / c)}; }
inline TScalar operator/(double c, TScalar a) { return {a.tape, a.tape->rdiv_imm(a.id, c)}; }
inline TScalar& operator+=(TScalar& a, TScalar b) { a = a + b; return a; }
inline TScalar& operator-=(TScalar& a, TScalar b) { a = a - b; return a; }
inline TScalar& operator*=(TScalar& a, TScalar b) { a = a * b; return a; }

inline TScalar sin(TScalar a) { return {a.tape, a.tape->sin(a.id)}; }
inline TScalar cos(TScalar a) { return {a.tape, a.tape->cos(a.id)}; }
inline TScalar exp(TScalar a) { return {a.tape, a.tape->exp(a.id)}; }
inline TScalar log(TScalar a) { return {a.tape, a.tape->log(a.id)}; }
inline TScalar sqrt(TScalar a) { return {a.tape, a.tape->sqrt(a.id)}; }
inline TScalar tanh(TScalar a) { return {a.tape, a.tape->tanh(a.id)}; }
inline TScalar sinh(TScalar a) { return {a.tape, a.tape->sinh(a.id)}; }
inline TScalar cosh(TScalar a) { return {a.tape, a.tape->cosh(a.id)}; }
inline TScalar fabs(TScalar a) { return {a.tape, a.tape->abs(a.id)}; }
inline TScalar abs(TScalar a) { return {a.tape, a.tape->abs(a.id)}; }
inline TScalar erf(TScalar a) { return {a.tape, a.tape->erf(a.id)}; }
inline TScalar pow(TScalar a, double c) { return {a.tape, a.tape->pow_imm(a.id, c)}; }
inline TScalar pow(TScalar a, TScalar b) { return exp(b * log(a)); }

inline double scalar_value(double v) { return v; }
inline double scalar_value(TScalar v) { return v.val(); }

}  // namespace pinn
