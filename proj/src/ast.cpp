#include "pinn/ast.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace pinn {

namespace {

ExprPtr make(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

}  // namespace

ExprPtr Expr::constant(double v) {
  Expr e;
  e.kind = ExprKind::Constant;
  e.value = v;
  return make(std::move(e));
}

ExprPtr Expr::ivar(std::string name) {
  Expr e;
  e.kind = ExprKind::IndependentVar;
  e.name = std::move(name);
  return make(std::move(e));
}

ExprPtr Expr::dvar_app(std::string name, std::vector<ExprPtr> args) {
  Expr e;
  e.kind = ExprKind::DependentVarApp;
  e.name = std::move(name);
  e.args = std::move(args);
  return make(std::move(e));
}

ExprPtr Expr::param(std::string name) {
  Expr e;
  e.kind = ExprKind::PhysicalParam;
  e.name = std::move(name);
  return make(std::move(e));
}

ExprPtr Expr::derivative(ExprPtr operand, std::string var, int order) {
  Expr e;
  e.kind = ExprKind::Derivative;
  e.args = {std::move(operand)};
  e.deriv_var = std::move(var);
  e.deriv_order = order;
  return make(std::move(e));
}

ExprPtr Expr::binary(BinaryOp op, ExprPtr a, ExprPtr b) {
  Expr e;
  e.kind = ExprKind::Binary;
  e.bop = op;
  e.args = {std::move(a), std::move(b)};
  return make(std::move(e));
}

ExprPtr Expr::unary(UnaryFn fn, ExprPtr a) {
  Expr e;
  e.kind = ExprKind::Unary;
  e.ufn = fn;
  e.args = {std::move(a)};
  return make(std::move(e));
}

ExprPtr Expr::norm_of_gradient(ExprPtr operand, std::vector<std::string> vars) {
  Expr e;
  e.kind = ExprKind::NormOfGradient;
  e.args = {std::move(operand)};
  e.grad_vars = std::move(vars);
  return make(std::move(e));
}

ExprPtr Expr::piecewise(ExprPtr selector, std::vector<double> breaks,
                        std::vector<ExprPtr> values) {
  if (values.size() != breaks.size() + 1)
    throw std::invalid_argument("piecewise: need one value per breakpoint plus else");
  Expr e;
  e.kind = ExprKind::Piecewise;
  e.args.push_back(std::move(selector));
  for (auto& v : values) e.args.push_back(std::move(v));
  e.breakpoints = std::move(breaks);
  return make(std::move(e));
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprKind::Constant:
      if (a.value != b.value) return false;
      break;
    case ExprKind::IndependentVar:
    case ExprKind::PhysicalParam:
      return a.name == b.name;
    case ExprKind::DependentVarApp:
      if (a.name != b.name) return false;
      break;
    case ExprKind::Derivative:
      if (a.deriv_var != b.deriv_var || a.deriv_order != b.deriv_order) return false;
      break;
    case ExprKind::Binary:
      if (a.bop != b.bop) return false;
      break;
    case ExprKind::Unary:
      if (a.ufn != b.ufn) return false;
      break;
    case ExprKind::NormOfGradient:
      if (a.grad_vars != b.grad_vars) return false;
      break;
    case ExprKind::Piecewise:
      if (a.breakpoints != b.breakpoints) return false;
      break;
  }
  if (a.args.size() != b.args.size()) return false;
  for (size_t i = 0; i < a.args.size(); ++i)
    if (!structurally_equal(*a.args[i], *b.args[i])) return false;
  return true;
}

namespace {

// Precedence levels used when deciding where parentheses are needed.
// add=1, mul=2, unary=3, pow=4, primary=5.
int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Binary:
      switch (e.bop) {
        case BinaryOp::Add:
        case BinaryOp::Sub:
          return 1;
        case BinaryOp::Mul:
        case BinaryOp::Div:
          return 2;
        case BinaryOp::Pow:
          return 4;
      }
      return 1;
    case ExprKind::Unary:
      return e.ufn == UnaryFn::Neg ? 3 : 5;
    case ExprKind::Constant:
      return e.value < 0 ? 3 : 5;
    default:
      return 5;
  }
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* fn_name(UnaryFn f) {
  switch (f) {
    case UnaryFn::Neg: return "-";
    case UnaryFn::Sin: return "sin";
    case UnaryFn::Cos: return "cos";
    case UnaryFn::Exp: return "exp";
    case UnaryFn::Log: return "log";
    case UnaryFn::Sqrt: return "sqrt";
    case UnaryFn::Sinh: return "sinh";
    case UnaryFn::Cosh: return "cosh";
    case UnaryFn::Tanh: return "tanh";
    case UnaryFn::Abs: return "abs";
  }
  return "?";
}

void print(const Expr& e, std::string& out);

void print_child(const Expr& child, int min_prec, std::string& out) {
  if (precedence(child) < min_prec) {
    out += '(';
    print(child, out);
    out += ')';
  } else {
    print(child, out);
  }
}

void print(const Expr& e, std::string& out) {
  switch (e.kind) {
    case ExprKind::Constant:
      out += fmt_double(e.value);
      break;
    case ExprKind::IndependentVar:
    case ExprKind::PhysicalParam:
      out += e.name;
      break;
    case ExprKind::DependentVarApp: {
      out += e.name;
      out += '(';
      for (size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        print(*e.args[i], out);
      }
      out += ')';
      break;
    }
    case ExprKind::Derivative: {
      const Expr& op = *e.args[0];
      out += 'D';
      out += e.deriv_var;
      if (e.deriv_order == 2) out += e.deriv_var;
      out += '(';
      print(op, out);
      out += ')';
      break;
    }
    case ExprKind::Binary: {
      const char* sym = "?";
      int prec = precedence(e);
      int rhs_min = prec + 1;
      switch (e.bop) {
        case BinaryOp::Add: sym = " + "; break;
        case BinaryOp::Sub: sym = " - "; break;
        case BinaryOp::Mul: sym = "*"; break;
        case BinaryOp::Div: sym = "/"; break;
        case BinaryOp::Pow: sym = "^"; break;
      }
      print_child(*e.args[0], prec, out);
      out += sym;
      print_child(*e.args[1], rhs_min, out);
      break;
    }
    case ExprKind::Unary: {
      if (e.ufn == UnaryFn::Neg) {
        out += '-';
        print_child(*e.args[0], 3, out);
      } else {
        out += fn_name(e.ufn);
        out += '(';
        print(*e.args[0], out);
        out += ')';
      }
      break;
    }
    case ExprKind::NormOfGradient: {
      out += "norm(grad(";
      print(*e.args[0], out);
      out += "; ";
      for (size_t i = 0; i < e.grad_vars.size(); ++i) {
        if (i) out += ", ";
        out += e.grad_vars[i];
      }
      out += "))";
      break;
    }
    case ExprKind::Piecewise: {
      out += "piecewise(";
      print(*e.args[0], out);
      out += "; ";
      for (size_t i = 0; i < e.breakpoints.size(); ++i) {
        out += fmt_double(e.breakpoints[i]);
        out += ": ";
        print(*e.args[i + 1], out);
        out += ", ";
      }
      out += "else: ";
      print(*e.args.back(), out);
      out += ')';
      break;
    }
  }
}

}  // namespace

std::string pretty_print(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

std::string pretty_print(const Equation& eq) {
  return pretty_print(*eq.lhs) + " = " + pretty_print(*eq.rhs);
}

std::optional<double> try_eval_const(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Constant:
      return e.value;
    case ExprKind::Binary: {
      auto a = try_eval_const(*e.args[0]);
      auto b = try_eval_const(*e.args[1]);
      if (!a || !b) return std::nullopt;
      switch (e.bop) {
        case BinaryOp::Add: return *a + *b;
        case BinaryOp::Sub: return *a - *b;
        case BinaryOp::Mul: return *a * *b;
        case BinaryOp::Div: return *a / *b;
        case BinaryOp::Pow: return std::pow(*a, *b);
      }
      return std::nullopt;
    }
    case ExprKind::Unary: {
      auto a = try_eval_const(*e.args[0]);
      if (!a) return std::nullopt;
      switch (e.ufn) {
        case UnaryFn::Neg: return -*a;
        case UnaryFn::Sin: return std::sin(*a);
        case UnaryFn::Cos: return std::cos(*a);
        case UnaryFn::Exp: return std::exp(*a);
        case UnaryFn::Log: return std::log(*a);
        case UnaryFn::Sqrt: return std::sqrt(*a);
        case UnaryFn::Sinh: return std::sinh(*a);
        case UnaryFn::Cosh: return std::cosh(*a);
        case UnaryFn::Tanh: return std::tanh(*a);
        case UnaryFn::Abs: return std::fabs(*a);
      }
      return std::nullopt;
    }
    default:
      return std::nullopt;
  }
}

int PdeSystem::ivar_index(const std::string& name) const {
  for (size_t i = 0; i < independent_vars.size(); ++i)
    if (independent_vars[i] == name) return static_cast<int>(i);
  return -1;
}

int PdeSystem::dvar_index(const std::string& name) const {
  for (size_t i = 0; i < dependent_vars.size(); ++i)
    if (dependent_vars[i].name == name) return static_cast<int>(i);
  return -1;
}

int PdeSystem::param_index(const std::string& name) const {
  for (size_t i = 0; i < physical_params.size(); ++i)
    if (physical_params[i].name == name) return static_cast<int>(i);
  return -1;
}

const IntervalDomain* PdeSystem::domain_of(const std::string& ivar) const {
  for (const auto& d : domains)
    if (d.var == ivar) return &d;
  return nullptr;
}

}  // namespace pinn
