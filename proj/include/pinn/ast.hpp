#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pinn {

enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class UnaryFn { Neg, Sin, Cos, Exp, Log, Sqrt, Sinh, Cosh, Tanh, Abs };

enum class ExprKind {
  Constant,
  IndependentVar,
  DependentVarApp,
  PhysicalParam,
  Derivative,
  Binary,
  Unary,
  NormOfGradient,
  Piecewise,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// One node of a symbolic expression tree. Immutable after construction;
/// shared freely across threads.
struct Expr {
  ExprKind kind;

  double value = 0.0;                    // Constant
  std::string name;                      // IndependentVar / DependentVarApp / PhysicalParam
  std::vector<ExprPtr> args;             // app args, operator operands, piecewise values
  BinaryOp bop = BinaryOp::Add;          // Binary
  UnaryFn ufn = UnaryFn::Neg;            // Unary
  std::string deriv_var;                 // Derivative direction
  int deriv_order = 0;                   // 1 or 2
  std::vector<std::string> grad_vars;    // NormOfGradient axes
  std::vector<double> breakpoints;       // Piecewise: ascending upper bounds; args holds
                                         // breakpoints.size()+1 branch values (last = else)

  static ExprPtr constant(double v);
  static ExprPtr ivar(std::string name);
  static ExprPtr dvar_app(std::string name, std::vector<ExprPtr> args);
  static ExprPtr param(std::string name);
  static ExprPtr derivative(ExprPtr operand, std::string var, int order);
  static ExprPtr binary(BinaryOp op, ExprPtr a, ExprPtr b);
  static ExprPtr unary(UnaryFn fn, ExprPtr a);
  static ExprPtr norm_of_gradient(ExprPtr operand, std::vector<std::string> vars);
  static ExprPtr piecewise(ExprPtr selector, std::vector<double> breaks,
                           std::vector<ExprPtr> values);

  /// Selector of a piecewise node.
  const ExprPtr& selector() const { return args.front(); }
};

bool structurally_equal(const Expr& a, const Expr& b);

/// Renders an expression in the text grammar; the output re-parses to a
/// structurally identical tree.
std::string pretty_print(const Expr& e);

/// Constant-folds a closed-form expression (constants, pi already folded,
/// arithmetic, unary functions). Returns nullopt if the tree references any
/// variable, parameter or derivative.
std::optional<double> try_eval_const(const Expr& e);

struct Equation {
  ExprPtr lhs;
  ExprPtr rhs;
};

struct IntervalDomain {
  std::string var;
  double lower = 0.0;
  double upper = 1.0;
};

struct DependentVar {
  std::string name;
  std::vector<std::string> args;  // ordered subset of the system's independent vars
};

struct PhysicalParam {
  std::string name;
  double default_value = 1.0;
};

struct PdeSystem {
  std::vector<Equation> equations;
  std::vector<Equation> boundary_conditions;
  std::vector<IntervalDomain> domains;
  std::vector<std::string> independent_vars;
  std::vector<DependentVar> dependent_vars;
  std::vector<PhysicalParam> physical_params;

  int ivar_index(const std::string& name) const;
  int dvar_index(const std::string& name) const;
  int param_index(const std::string& name) const;
  const IntervalDomain* domain_of(const std::string& ivar) const;
};

std::string pretty_print(const Equation& eq);

}  // namespace pinn
