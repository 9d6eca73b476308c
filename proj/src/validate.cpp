#include "pinn/validate.hpp"

#include <cmath>
#include <functional>
#include <set>

namespace pinn {

std::string ValidationReport::to_string() const {
  std::string s;
  for (const auto& i : issues) {
    s += i.message;
    s += '\n';
  }
  return s;
}

bool ValidationReport::has(ValidationIssue::Code c) const {
  for (const auto& i : issues)
    if (i.code == c) return true;
  return false;
}

namespace {

using Code = ValidationIssue::Code;

class Validator {
 public:
  Validator(const PdeSystem& sys, const std::map<std::string, MlpSpec>& nets)
      : sys_(sys), nets_(nets) {}

  ValidationReport run() {
    check_domains();
    check_networks();
    for (size_t i = 0; i < sys_.equations.size(); ++i)
      check_equation(sys_.equations[i], "equation " + std::to_string(i), false);
    for (size_t i = 0; i < sys_.boundary_conditions.size(); ++i)
      check_equation(sys_.boundary_conditions[i],
                     "boundary condition " + std::to_string(i), true);
    return std::move(report_);
  }

 private:
  void add(Code c, std::string msg) { report_.issues.push_back({c, std::move(msg)}); }

  void check_domains() {
    for (const auto& v : sys_.independent_vars) {
      int count = 0;
      for (const auto& d : sys_.domains)
        if (d.var == v) ++count;
      if (count == 0) add(Code::MissingDomain, "no domain declared for '" + v + "'");
      if (count > 1) add(Code::DuplicateDomain, "multiple domains for '" + v + "'");
    }
    for (const auto& d : sys_.domains) {
      if (sys_.ivar_index(d.var) < 0)
        add(Code::UnhousedName, "domain names undeclared variable '" + d.var + "'");
      if (!(d.lower < d.upper))
        add(Code::BadDomain, "domain of '" + d.var + "' has lower >= upper");
    }
  }

  void check_networks() {
    for (const auto& dv : sys_.dependent_vars) {
      auto it = nets_.find(dv.name);
      if (it == nets_.end()) {
        add(Code::DimensionMismatch, "no network spec for '" + dv.name + "'");
        continue;
      }
      const MlpSpec& spec = it->second;
      if (!spec.chains()) {
        add(Code::DimensionMismatch, "network for '" + dv.name + "' has mismatched "
            "layer dimensions");
        continue;
      }
      if (spec.input_dim() != static_cast<int>(dv.args.size()))
        add(Code::DimensionMismatch,
            "network for '" + dv.name + "' has input dimension " +
                std::to_string(spec.input_dim()) + " but the variable is applied to " +
                std::to_string(dv.args.size()) + " independent variable(s)");
      if (spec.output_dim() != 1)
        add(Code::DimensionMismatch,
            "network for '" + dv.name + "' must have output dimension 1");
      for (const auto& a : dv.args)
        if (sys_.ivar_index(a) < 0)
          add(Code::UnhousedName, "'" + dv.name + "' is applied to undeclared "
              "variable '" + a + "'");
    }
  }

  bool is_endpoint(const std::string& ivar, double v) const {
    const IntervalDomain* d = sys_.domain_of(ivar);
    if (!d) return false;
    double scale = std::max({1.0, std::fabs(d->lower), std::fabs(d->upper)});
    return std::fabs(v - d->lower) <= 1e-12 * scale ||
           std::fabs(v - d->upper) <= 1e-12 * scale;
  }

  // Walks one expression; records per-dvar pinned axes for the boundary check.
  void walk(const Expr& e, const std::string& where, bool is_bc,
            std::map<std::string, std::set<std::string>>& pins,
            std::set<std::string>& free_ivars) {
    switch (e.kind) {
      case ExprKind::Constant:
        break;
      case ExprKind::IndependentVar:
        if (sys_.ivar_index(e.name) < 0)
          add(Code::UnhousedName, where + ": undeclared variable '" + e.name + "'");
        free_ivars.insert(e.name);
        break;
      case ExprKind::PhysicalParam:
        if (sys_.param_index(e.name) < 0)
          add(Code::UnhousedName, where + ": undeclared parameter '" + e.name + "'");
        break;
      case ExprKind::DependentVarApp: {
        int di = sys_.dvar_index(e.name);
        if (di < 0) {
          add(Code::UnhousedName, where + ": undeclared dependent variable '" +
              e.name + "'");
          break;
        }
        const DependentVar& dv = sys_.dependent_vars[static_cast<size_t>(di)];
        if (e.args.size() != dv.args.size()) {
          add(Code::BadApplication, where + ": '" + e.name + "' applied to " +
              std::to_string(e.args.size()) + " argument(s), declared with " +
              std::to_string(dv.args.size()));
          break;
        }
        for (size_t i = 0; i < e.args.size(); ++i) {
          const Expr& a = *e.args[i];
          if (a.kind == ExprKind::IndependentVar) {
            if (a.name != dv.args[i])
              add(Code::BadApplication, where + ": argument " + std::to_string(i + 1) +
                  " of '" + e.name + "' must be '" + dv.args[i] + "'");
            free_ivars.insert(a.name);
          } else if (a.kind == ExprKind::Constant) {
            if (!is_bc) {
              add(Code::BadApplication, where + ": interior equations may not pin "
                  "coordinates ('" + e.name + "')");
            } else if (!is_endpoint(dv.args[i], a.value)) {
              add(Code::UnpinnedBoundary, where + ": '" + e.name + "' pins '" +
                  dv.args[i] + "' to a non-endpoint value");
            }
            pins[e.name].insert(dv.args[i]);
          } else {
            add(Code::BadApplication, where + ": argument " + std::to_string(i + 1) +
                " of '" + e.name + "' must be a variable or constant");
          }
        }
        break;
      }
      case ExprKind::Derivative: {
        if (e.deriv_order < 1 || e.deriv_order > 2)
          add(Code::BadDerivative, where + ": derivative order must be 1 or 2");
        if (sys_.ivar_index(e.deriv_var) < 0)
          add(Code::BadDerivative, where + ": derivative with respect to undeclared "
              "variable '" + e.deriv_var + "'");
        const Expr& op = *e.args[0];
        if (op.kind != ExprKind::DependentVarApp) {
          add(Code::BadDerivative, where + ": derivative operand must be a "
              "dependent-variable application");
        } else {
          int di = sys_.dvar_index(op.name);
          if (di >= 0) {
            const auto& sig = sys_.dependent_vars[static_cast<size_t>(di)].args;
            bool found = false;
            for (const auto& a : sig)
              if (a == e.deriv_var) found = true;
            if (!found)
              add(Code::BadDerivative, where + ": '" + op.name + "' does not depend "
                  "on '" + e.deriv_var + "'");
          }
        }
        walk(op, where, is_bc, pins, free_ivars);
        break;
      }
      case ExprKind::Binary:
      case ExprKind::Unary:
        for (const auto& a : e.args) walk(*a, where, is_bc, pins, free_ivars);
        break;
      case ExprKind::NormOfGradient: {
        const Expr& op = *e.args[0];
        if (op.kind != ExprKind::DependentVarApp) {
          add(Code::BadDerivative, where + ": grad operand must be a "
              "dependent-variable application");
        } else {
          int di = sys_.dvar_index(op.name);
          if (di >= 0) {
            const auto& sig = sys_.dependent_vars[static_cast<size_t>(di)].args;
            for (const auto& g : e.grad_vars) {
              bool found = false;
              for (const auto& a : sig)
                if (a == g) found = true;
              if (!found)
                add(Code::BadDerivative, where + ": gradient axis '" + g +
                    "' is not an argument of '" + op.name + "'");
            }
          }
        }
        walk(op, where, is_bc, pins, free_ivars);
        break;
      }
      case ExprKind::Piecewise: {
        std::function<bool(const Expr&)> has_dvar = [&](const Expr& x) {
          if (x.kind == ExprKind::DependentVarApp || x.kind == ExprKind::Derivative ||
              x.kind == ExprKind::NormOfGradient)
            return true;
          for (const auto& a : x.args)
            if (has_dvar(*a)) return true;
          return false;
        };
        if (has_dvar(*e.selector()))
          add(Code::BadPiecewise, where + ": piecewise selector must not reference "
              "dependent variables");
        for (const auto& a : e.args) walk(*a, where, is_bc, pins, free_ivars);
        break;
      }
    }
  }

  void check_equation(const Equation& eq, const std::string& where, bool is_bc) {
    std::map<std::string, std::set<std::string>> pins;
    std::set<std::string> free_ivars;
    walk(*eq.lhs, where, is_bc, pins, free_ivars);
    walk(*eq.rhs, where, is_bc, pins, free_ivars);
    if (is_bc) {
      // Every dependent variable a BC mentions must have at least one
      // coordinate pinned; a coordinate also used free elsewhere does not pin.
      std::function<void(const Expr&)> collect = [&](const Expr& e) {
        if (e.kind == ExprKind::DependentVarApp) {
          bool any_pin = false;
          for (size_t i = 0; i < e.args.size(); ++i)
            if (e.args[i]->kind == ExprKind::Constant) any_pin = true;
          if (!any_pin)
            add(Code::UnpinnedBoundary, where + ": '" + e.name +
                "' has no coordinate pinned to a domain endpoint");
        }
        for (const auto& a : e.args) collect(*a);
      };
      collect(*eq.lhs);
      collect(*eq.rhs);
    }
  }

  const PdeSystem& sys_;
  const std::map<std::string, MlpSpec>& nets_;
  ValidationReport report_;
};

}  // namespace

ValidationReport validate_system(const PdeSystem& system,
                                 const std::map<std::string, MlpSpec>& net_specs) {
  return Validator(system, net_specs).run();
}

}  // namespace pinn
