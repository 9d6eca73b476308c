#include "pinn/lowering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

namespace pinn {

namespace {

int slot_of(const DependentVar& dv, const std::string& ivar) {
  for (size_t i = 0; i < dv.args.size(); ++i)
    if (dv.args[i] == ivar) return static_cast<int>(i);
  return -1;
}

bool same_app(const ResolvedApp& a, int dvar, const std::vector<ResolvedApp::Arg>& args) {
  if (a.dvar != dvar || a.args.size() != args.size()) return false;
  for (size_t i = 0; i < args.size(); ++i) {
    if (a.args[i].is_const != args[i].is_const) return false;
    if (args[i].is_const) {
      if (a.args[i].value != args[i].value) return false;
    } else if (a.args[i].axis != args[i].axis) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Closed-form jets (trial wrappers g and h).

Jet<double> eval_closed_jet(
    const Expr& e, const JetShape& sh,
    const std::function<const Jet<double>*(const std::string&)>& ivar_jet) {
  switch (e.kind) {
    case ExprKind::Constant:
      return jet_const(sh, e.value, 0.0);
    case ExprKind::IndependentVar: {
      const Jet<double>* j = ivar_jet(e.name);
      if (!j)
        throw LoweringError("wrapper expression uses unknown variable '" + e.name + "'");
      return *j;
    }
    case ExprKind::Binary: {
      Jet<double> a = eval_closed_jet(*e.args[0], sh, ivar_jet);
      if (e.bop == BinaryOp::Pow && e.args[1]->kind == ExprKind::Constant)
        return pow(a, e.args[1]->value);
      Jet<double> b = eval_closed_jet(*e.args[1], sh, ivar_jet);
      switch (e.bop) {
        case BinaryOp::Add: return a + b;
        case BinaryOp::Sub: return a - b;
        case BinaryOp::Mul: return a * b;
        case BinaryOp::Div: return a / b;
        case BinaryOp::Pow: return exp(b * log(a));
      }
      break;
    }
    case ExprKind::Unary: {
      Jet<double> a = eval_closed_jet(*e.args[0], sh, ivar_jet);
      switch (e.ufn) {
        case UnaryFn::Neg: return -a;
        case UnaryFn::Sin: return sin(a);
        case UnaryFn::Cos: return cos(a);
        case UnaryFn::Exp: return exp(a);
        case UnaryFn::Log: return log(a);
        case UnaryFn::Sqrt: return sqrt(a);
        case UnaryFn::Sinh: return sinh(a);
        case UnaryFn::Cosh: return cosh(a);
        case UnaryFn::Tanh: return tanh(a);
        case UnaryFn::Abs: return abs(a);
      }
      break;
    }
    default:
      break;
  }
  throw LoweringError("wrapper expressions must be closed form in the independent "
                      "variables: offending node '" + pretty_print(e) + "'");
}

// psi = g*N + h with g, h independent of the parameters.
template <class S>
Jet<S> affine_wrap(const Jet<double>& g, const Jet<double>& h, const Jet<S>& net,
                   const std::function<S(double)>& lift) {
  const JetShape& sh = *net.sh;
  Jet<S> r;
  r.sh = &sh;
  r.v = g.v * net.v + lift(h.v);
  for (int k = 0; k < sh.n1; ++k) {
    size_t ks = static_cast<size_t>(k);
    r.d1[ks] = g.d1[ks] * net.v + g.v * net.d1[ks] + lift(h.d1[ks]);
  }
  for (int j = 0; j < sh.n2; ++j) {
    size_t js = static_cast<size_t>(j);
    size_t ks = static_cast<size_t>(sh.map2[js]);
    r.d2[js] = g.d2[js] * net.v + 2.0 * (g.d1[ks] * net.d1[ks]) + g.v * net.d2[js] +
               lift(h.d2[js]);
  }
  return r;
}

// Double-valued jets of the app's input coordinates. Wrappers use these even
// in tape mode, since g and h carry no parameter dependence.
std::vector<Jet<double>> app_coord_jets(const ResolvedApp& app,
                                        std::span<const double> coords) {
  std::vector<Jet<double>> in(app.args.size());
  for (size_t s = 0; s < app.args.size(); ++s) {
    Jet<double>& j = in[s];
    j.sh = &app.shape;
    j.v = app.args[s].is_const ? app.args[s].value
                               : coords[static_cast<size_t>(app.args[s].axis)];
    for (int k = 0; k < app.shape.n1; ++k)
      j.d1[static_cast<size_t>(k)] =
          app.slots1[static_cast<size_t>(k)] == static_cast<int>(s) ? 1.0 : 0.0;
    for (int k = 0; k < app.shape.n2; ++k) j.d2[static_cast<size_t>(k)] = 0.0;
  }
  return in;
}

Jet<double> wrapper_component(const LossProgram& prog, const ResolvedApp& app,
                              std::span<const double> coords, const Expr& component) {
  const DependentVar& dv = prog.system.dependent_vars[static_cast<size_t>(app.dvar)];
  std::vector<Jet<double>> cj = app_coord_jets(app, coords);
  auto ivar_jet = [&](const std::string& name) -> const Jet<double>* {
    int s = slot_of(dv, name);
    return s < 0 ? nullptr : &cj[static_cast<size_t>(s)];
  };
  return eval_closed_jet(component, app.shape, ivar_jet);
}

// ---------------------------------------------------------------------------
// Generic term evaluation.

template <class S>
struct EvalPolicy {
  std::function<S(double)> lift;
  std::function<Jet<S>(const ResolvedApp&, std::span<const double> coords)> app_eval;
  std::function<S(int)> param;
};

double plain_eval(const Expr& e, std::span<const double> coords, const PdeSystem& sys) {
  switch (e.kind) {
    case ExprKind::Constant:
      return e.value;
    case ExprKind::IndependentVar: {
      int ax = sys.ivar_index(e.name);
      return coords[static_cast<size_t>(ax)];
    }
    case ExprKind::Binary: {
      double a = plain_eval(*e.args[0], coords, sys);
      double b = plain_eval(*e.args[1], coords, sys);
      switch (e.bop) {
        case BinaryOp::Add: return a + b;
        case BinaryOp::Sub: return a - b;
        case BinaryOp::Mul: return a * b;
        case BinaryOp::Div: return a / b;
        case BinaryOp::Pow: return std::pow(a, b);
      }
      return 0.0;
    }
    case ExprKind::Unary: {
      double a = plain_eval(*e.args[0], coords, sys);
      switch (e.ufn) {
        case UnaryFn::Neg: return -a;
        case UnaryFn::Sin: return std::sin(a);
        case UnaryFn::Cos: return std::cos(a);
        case UnaryFn::Exp: return std::exp(a);
        case UnaryFn::Log: return std::log(a);
        case UnaryFn::Sqrt: return std::sqrt(a);
        case UnaryFn::Sinh: return std::sinh(a);
        case UnaryFn::Cosh: return std::cosh(a);
        case UnaryFn::Tanh: return std::tanh(a);
        case UnaryFn::Abs: return std::fabs(a);
      }
      return 0.0;
    }
    default:
      throw EvalError("piecewise selector must be closed form: '" + pretty_print(e) +
                      "'");
  }
}

template <class S>
class TermEvaluator {
 public:
  TermEvaluator(const LossProgram& prog, const LossTerm& term,
                std::span<const double> point, const EvalPolicy<S>& pol)
      : prog_(prog), term_(term), pol_(pol) {
    coords_.assign(prog.system.independent_vars.size(),
                   std::numeric_limits<double>::quiet_NaN());
    for (size_t i = 0; i < term.free_axes.size(); ++i)
      coords_[static_cast<size_t>(term.free_axes[i])] = point[i];
    for (const auto& [axis, value] : term.pins)
      coords_[static_cast<size_t>(axis)] = value;
    app_out_.reserve(term.apps.size());
    for (const auto& app : term.apps) app_out_.push_back(pol.app_eval(app, coords_));
  }

  S residual() { return walk(*term_.eq.lhs) - walk(*term_.eq.rhs); }

 private:
  S walk(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Constant:
        return pol_.lift(e.value);
      case ExprKind::IndependentVar: {
        int ax = prog_.system.ivar_index(e.name);
        double v = coords_[static_cast<size_t>(ax)];
        if (std::isnan(v))
          throw EvalError("variable '" + e.name + "' has no coordinate in this term "
                          "(pinned to several endpoints?)");
        return pol_.lift(v);
      }
      case ExprKind::PhysicalParam:
        return pol_.param(prog_.system.param_index(e.name));
      case ExprKind::DependentVarApp: {
        const NodeRef& r = term_.refs.at(&e);
        return app_out_[static_cast<size_t>(r.app)].v;
      }
      case ExprKind::Derivative: {
        const NodeRef& r = term_.refs.at(&e);
        const Jet<S>& j = app_out_[static_cast<size_t>(r.app)];
        return r.kind == NodeRef::Kind::AppD1 ? j.d1[static_cast<size_t>(r.pos)]
                                              : j.d2[static_cast<size_t>(r.pos)];
      }
      case ExprKind::NormOfGradient: {
        const NodeRef& r = term_.refs.at(&e);
        const Jet<S>& j = app_out_[static_cast<size_t>(r.app)];
        S c0 = j.d1[static_cast<size_t>(r.norm_pos[0])];
        S acc = c0 * c0;
        for (size_t i = 1; i < r.norm_pos.size(); ++i) {
          S c = j.d1[static_cast<size_t>(r.norm_pos[i])];
          acc = acc + c * c;
        }
        using std::sqrt;
        return sqrt(acc);
      }
      case ExprKind::Binary: {
        S a = walk(*e.args[0]);
        if (e.bop == BinaryOp::Pow && e.args[1]->kind == ExprKind::Constant) {
          using std::pow;
          return check(pow(a, e.args[1]->value), e);
        }
        S b = walk(*e.args[1]);
        switch (e.bop) {
          case BinaryOp::Add: return a + b;
          case BinaryOp::Sub: return a - b;
          case BinaryOp::Mul: return a * b;
          case BinaryOp::Div: return check(a / b, e);
          case BinaryOp::Pow: {
            using std::exp;
            using std::log;
            return check(exp(b * log(a)), e);
          }
        }
        return a;
      }
      case ExprKind::Unary: {
        S a = walk(*e.args[0]);
        using std::cos;
        using std::cosh;
        using std::exp;
        using std::fabs;
        using std::log;
        using std::sin;
        using std::sinh;
        using std::sqrt;
        using std::tanh;
        switch (e.ufn) {
          case UnaryFn::Neg: return -a;
          case UnaryFn::Sin: return sin(a);
          case UnaryFn::Cos: return cos(a);
          case UnaryFn::Exp: return check(exp(a), e);
          case UnaryFn::Log: return check(log(a), e);
          case UnaryFn::Sqrt: return check(sqrt(a), e);
          case UnaryFn::Sinh: return sinh(a);
          case UnaryFn::Cosh: return cosh(a);
          case UnaryFn::Tanh: return tanh(a);
          case UnaryFn::Abs: return fabs(a);
        }
        return a;
      }
      case ExprKind::Piecewise: {
        double sel = plain_eval(*e.selector(), coords_, prog_.system);
        size_t branch = e.breakpoints.size();  // else
        for (size_t i = 0; i < e.breakpoints.size(); ++i)
          if (sel < e.breakpoints[i]) {
            branch = i;
            break;
          }
        return walk(*e.args[branch + 1]);
      }
    }
    throw EvalError("unreachable expression kind");
  }

  S check(S v, const Expr& at) {
    if constexpr (std::is_same_v<S, double>) {
      if (!std::isfinite(v))
        throw EvalError("non-finite value at node '" + pretty_print(at) + "'");
    } else {
      (void)at;
    }
    return v;
  }

  const LossProgram& prog_;
  const LossTerm& term_;
  const EvalPolicy<S>& pol_;
  std::vector<double> coords_;
  std::vector<Jet<S>> app_out_;
};

EvalPolicy<double> value_policy(const LossProgram& prog, std::span<const double> params,
                                std::vector<double> physical) {
  EvalPolicy<double> pol;
  pol.lift = [](double v) { return v; };
  pol.param = [phys = std::move(physical)](int i) {
    return phys[static_cast<size_t>(i)];
  };
  pol.app_eval = [&prog, params](const ResolvedApp& app,
                                 std::span<const double> coords) {
    std::vector<Jet<double>> in = app_coord_jets(app, coords);
    size_t off = prog.net_offsets[static_cast<size_t>(app.dvar)];
    auto out = mlp_forward_jet<double>(
        prog.nets[static_cast<size_t>(app.dvar)],
        [params, off](size_t i) { return params[off + i]; },
        std::span<const Jet<double>>(in), 0.0);
    Jet<double> net = out[0];
    int w = prog.wrapper_of_dvar[static_cast<size_t>(app.dvar)];
    if (w >= 0) {
      const TrialWrapper& tw = prog.wrappers[static_cast<size_t>(w)];
      Jet<double> g = wrapper_component(prog, app, coords, *tw.scale);
      Jet<double> h = wrapper_component(prog, app, coords, *tw.offset);
      std::function<double(double)> lift = [](double v) { return v; };
      net = affine_wrap(g, h, net, lift);
    }
    return net;
  };
  return pol;
}

// ---------------------------------------------------------------------------
// Term compilation.

struct AppRequirements {
  std::set<int> d1_slots;
  std::set<int> d2_slots;
};

class TermCompiler {
 public:
  TermCompiler(const PdeSystem& sys, const Equation& eq, LossTerm::Kind kind,
               std::string label)
      : sys_(sys) {
    term_.kind = kind;
    term_.label = std::move(label);
    term_.eq = eq;
  }

  LossTerm compile() {
    collect(*term_.eq.lhs);
    collect(*term_.eq.rhs);

    for (size_t a = 0; a < term_.apps.size(); ++a) {
      ResolvedApp& app = term_.apps[a];
      const AppRequirements& req = reqs_[a];
      std::set<int> all = req.d1_slots;
      all.insert(req.d2_slots.begin(), req.d2_slots.end());
      app.slots1.assign(all.begin(), all.end());
      app.shape.n1 = static_cast<int>(app.slots1.size());
      app.shape.n2 = 0;
      for (int slot : req.d2_slots)
        app.shape.map2[static_cast<size_t>(app.shape.n2++)] = d1_pos(app, slot);
    }

    annotate(*term_.eq.lhs);
    annotate(*term_.eq.rhs);
    finish_axes();
    return std::move(term_);
  }

 private:
  int find_or_add_app(const Expr& app_node) {
    int dvar = sys_.dvar_index(app_node.name);
    std::vector<ResolvedApp::Arg> args;
    for (const auto& a : app_node.args) {
      if (a->kind == ExprKind::Constant)
        args.push_back({true, -1, a->value});
      else
        args.push_back({false, sys_.ivar_index(a->name), 0.0});
    }
    for (size_t i = 0; i < term_.apps.size(); ++i)
      if (same_app(term_.apps[i], dvar, args)) return static_cast<int>(i);
    ResolvedApp app;
    app.dvar = dvar;
    app.args = std::move(args);
    term_.apps.push_back(std::move(app));
    reqs_.emplace_back();
    return static_cast<int>(term_.apps.size() - 1);
  }

  void collect(const Expr& e) {
    switch (e.kind) {
      case ExprKind::DependentVarApp: {
        find_or_add_app(e);
        const auto& dv =
            sys_.dependent_vars[static_cast<size_t>(sys_.dvar_index(e.name))];
        for (size_t s = 0; s < e.args.size(); ++s) {
          int axis = sys_.ivar_index(dv.args[s]);
          if (e.args[s]->kind == ExprKind::Constant)
            pin_values_[axis].insert(e.args[s]->value);
          else
            used_as_var_.insert(axis);
        }
        return;
      }
      case ExprKind::Derivative: {
        const Expr& op = *e.args[0];
        int a = find_or_add_app(op);
        const auto& dv = sys_.dependent_vars[static_cast<size_t>(
            term_.apps[static_cast<size_t>(a)].dvar)];
        int slot = slot_of(dv, e.deriv_var);
        if (slot < 0)
          throw LoweringError(term_.label + ": derivative direction '" + e.deriv_var +
                              "' is not an argument of '" + op.name + "'");
        reqs_[static_cast<size_t>(a)].d1_slots.insert(slot);
        if (e.deriv_order == 2) reqs_[static_cast<size_t>(a)].d2_slots.insert(slot);
        collect(op);
        return;
      }
      case ExprKind::NormOfGradient: {
        const Expr& op = *e.args[0];
        int a = find_or_add_app(op);
        const auto& dv = sys_.dependent_vars[static_cast<size_t>(
            term_.apps[static_cast<size_t>(a)].dvar)];
        for (const auto& gv : e.grad_vars) {
          int slot = slot_of(dv, gv);
          if (slot < 0)
            throw LoweringError(term_.label + ": gradient axis '" + gv +
                                "' is not an argument of '" + op.name + "'");
          reqs_[static_cast<size_t>(a)].d1_slots.insert(slot);
        }
        collect(op);
        return;
      }
      case ExprKind::IndependentVar:
        used_as_var_.insert(sys_.ivar_index(e.name));
        return;
      default:
        for (const auto& a : e.args) collect(*a);
        return;
    }
  }

  int d1_pos(const ResolvedApp& app, int slot) const {
    for (size_t k = 0; k < app.slots1.size(); ++k)
      if (app.slots1[k] == slot) return static_cast<int>(k);
    return -1;
  }

  int d2_pos(const ResolvedApp& app, int slot) const {
    int k = d1_pos(app, slot);
    for (int j = 0; j < app.shape.n2; ++j)
      if (app.shape.map2[static_cast<size_t>(j)] == k) return j;
    return -1;
  }

  void annotate(const Expr& e) {
    switch (e.kind) {
      case ExprKind::DependentVarApp: {
        NodeRef r;
        r.kind = NodeRef::Kind::AppValue;
        r.app = find_or_add_app(e);
        term_.refs[&e] = std::move(r);
        return;
      }
      case ExprKind::Derivative: {
        const Expr& op = *e.args[0];
        int a = find_or_add_app(op);
        const ResolvedApp& app = term_.apps[static_cast<size_t>(a)];
        const auto& dv = sys_.dependent_vars[static_cast<size_t>(app.dvar)];
        int slot = slot_of(dv, e.deriv_var);
        NodeRef r;
        r.app = a;
        if (e.deriv_order == 1) {
          r.kind = NodeRef::Kind::AppD1;
          r.pos = d1_pos(app, slot);
        } else {
          r.kind = NodeRef::Kind::AppD2;
          r.pos = d2_pos(app, slot);
        }
        annotate(op);
        term_.refs[&e] = std::move(r);
        return;
      }
      case ExprKind::NormOfGradient: {
        const Expr& op = *e.args[0];
        int a = find_or_add_app(op);
        const ResolvedApp& app = term_.apps[static_cast<size_t>(a)];
        const auto& dv = sys_.dependent_vars[static_cast<size_t>(app.dvar)];
        NodeRef r;
        r.kind = NodeRef::Kind::Norm;
        r.app = a;
        for (const auto& gv : e.grad_vars)
          r.norm_pos.push_back(d1_pos(app, slot_of(dv, gv)));
        annotate(op);
        term_.refs[&e] = std::move(r);
        return;
      }
      default:
        for (const auto& a : e.args) annotate(*a);
        return;
    }
  }

  void finish_axes() {
    for (size_t ax = 0; ax < sys_.independent_vars.size(); ++ax) {
      int axis = static_cast<int>(ax);
      auto it = pin_values_.find(axis);
      bool pinned = it != pin_values_.end() && !used_as_var_.count(axis);
      if (pinned) {
        if (it->second.size() == 1) term_.pins[axis] = *it->second.begin();
        continue;
      }
      term_.free_axes.push_back(axis);
      const IntervalDomain* d = sys_.domain_of(sys_.independent_vars[ax]);
      if (!d) throw LoweringError("no domain for '" + sys_.independent_vars[ax] + "'");
      term_.free_bounds.push_back(*d);
    }
  }

  const PdeSystem& sys_;
  LossTerm term_;
  std::vector<AppRequirements> reqs_;
  std::set<int> used_as_var_;
  std::map<int, std::set<double>> pin_values_;
};

void check_closed_form(const Expr& e, const std::string& what) {
  switch (e.kind) {
    case ExprKind::DependentVarApp:
    case ExprKind::Derivative:
    case ExprKind::NormOfGradient:
    case ExprKind::PhysicalParam:
    case ExprKind::Piecewise:
      throw LoweringError(what + " must be closed form in the independent variables");
    default:
      for (const auto& a : e.args) check_closed_form(*a, what);
  }
}

}  // namespace

std::vector<double> LossProgram::physical_values(std::span<const double> params) const {
  std::vector<double> out;
  out.reserve(system.physical_params.size());
  if (param_estim && !params.empty()) {
    for (size_t i = 0; i < system.physical_params.size(); ++i)
      out.push_back(params[net_param_total + i]);
  } else {
    for (const auto& p : system.physical_params) out.push_back(p.default_value);
  }
  return out;
}

FlatParams LossProgram::initial_params(uint64_t seed) const {
  FlatParams p;
  p.reserve(param_count());
  for (size_t i = 0; i < nets.size(); ++i) {
    FlatParams q = init_params(nets[i], seed + i);
    p.insert(p.end(), q.begin(), q.end());
  }
  if (param_estim)
    for (const auto& pp : system.physical_params) p.push_back(pp.default_value);
  return p;
}

LossProgram lower_system(const PdeSystem& system,
                         const std::map<std::string, MlpSpec>& nets,
                         const std::vector<TrialWrapper>& wrappers, bool param_estim) {
  ValidationReport rep = validate_system(system, nets);
  if (!rep.ok()) throw LoweringError("system does not validate:\n" + rep.to_string());
  if (system.independent_vars.size() > static_cast<size_t>(kMaxJetAxes))
    throw LoweringError("too many independent variables");
  if (param_estim && system.physical_params.empty())
    throw LoweringError("param_estim requested but the system declares no physical "
                        "parameters");

  LossProgram prog;
  prog.system = system;
  prog.param_estim = param_estim;
  prog.wrappers = wrappers;
  prog.wrapper_of_dvar.assign(system.dependent_vars.size(), -1);
  for (size_t w = 0; w < wrappers.size(); ++w) {
    int dvar = system.dvar_index(wrappers[w].dvar);
    if (dvar < 0)
      throw LoweringError("wrapper names unknown dependent variable '" +
                          wrappers[w].dvar + "'");
    check_closed_form(*wrappers[w].scale, "wrapper scale");
    check_closed_form(*wrappers[w].offset, "wrapper offset");
    prog.wrapper_of_dvar[static_cast<size_t>(dvar)] = static_cast<int>(w);
  }

  for (const auto& dv : system.dependent_vars) {
    prog.net_offsets.push_back(prog.net_param_total);
    const MlpSpec& spec = nets.at(dv.name);
    prog.nets.push_back(spec);
    prog.net_param_total += spec.param_count();
  }

  for (size_t i = 0; i < system.equations.size(); ++i)
    prog.terms.push_back(TermCompiler(prog.system, system.equations[i],
                                      LossTerm::Kind::Interior,
                                      "eq[" + std::to_string(i) + "]")
                             .compile());
  prog.interior_count = prog.terms.size();
  for (size_t i = 0; i < system.boundary_conditions.size(); ++i)
    prog.terms.push_back(TermCompiler(prog.system, system.boundary_conditions[i],
                                      LossTerm::Kind::Boundary,
                                      "bc[" + std::to_string(i) + "]")
                             .compile());

  // Wrapper/BC consistency: 16 probe points, two parameter draws, tol 1e-10.
  std::set<size_t> drop;
  for (const auto& w : wrappers) {
    for (int bc_index : w.absorbs) {
      if (bc_index < 0 ||
          static_cast<size_t>(bc_index) >= system.boundary_conditions.size())
        throw LoweringError("wrapper absorbs nonexistent boundary condition " +
                            std::to_string(bc_index));
      size_t term_index = prog.interior_count + static_cast<size_t>(bc_index);
      const LossTerm& term = prog.terms[term_index];
      std::mt19937_64 rng(0xABCDEFu + static_cast<uint64_t>(bc_index));
      auto unit = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
      for (uint64_t draw = 0; draw < 2; ++draw) {
        FlatParams params = prog.initial_params(17 + draw * 1000);
        for (int p = 0; p < 8; ++p) {
          std::vector<double> pt(static_cast<size_t>(term.dim()));
          for (int d = 0; d < term.dim(); ++d) {
            const auto& b = term.free_bounds[static_cast<size_t>(d)];
            pt[static_cast<size_t>(d)] = b.lower + (b.upper - b.lower) * unit();
          }
          double r = eval_residual_value(prog, term, pt, params);
          if (std::fabs(r) > 1e-10)
            throw LoweringError("wrapper for '" + w.dvar + "' claims bc[" +
                                std::to_string(bc_index) + "] but leaves residual " +
                                std::to_string(r));
        }
      }
      drop.insert(term_index);
    }
  }
  if (!drop.empty()) {
    std::vector<LossTerm> kept;
    for (size_t i = 0; i < prog.terms.size(); ++i)
      if (!drop.count(i)) kept.push_back(std::move(prog.terms[i]));
    prog.terms = std::move(kept);
  }
  return prog;
}

LossProgram attach_additional_loss(LossProgram program,
                                   const std::vector<DataSample>& data, double weight) {
  if (data.empty()) throw LoweringError("attach_additional_loss: empty data set");
  for (const auto& s : data) {
    if (s.dvar < 0 || static_cast<size_t>(s.dvar) >= program.nets.size())
      throw LoweringError("attach_additional_loss: unknown dependent variable index");
    const auto& dv = program.system.dependent_vars[static_cast<size_t>(s.dvar)];
    if (s.coords.size() != dv.args.size())
      throw LoweringError("attach_additional_loss: coordinate arity mismatch for '" +
                          dv.name + "'");
    for (size_t i = 0; i < s.coords.size(); ++i) {
      const IntervalDomain* d = program.system.domain_of(dv.args[i]);
      if (s.coords[i] < d->lower - 1e-12 || s.coords[i] > d->upper + 1e-12)
        throw LoweringError("attach_additional_loss: data point outside the domain");
    }
  }
  program.additional.present = true;
  program.additional.weight = weight;
  program.additional.samples = data;
  return program;
}

double eval_residual_value(const LossProgram& program, const LossTerm& term,
                           std::span<const double> point, const FlatParams& params) {
  if (params.size() != program.param_count())
    throw EvalError("parameter vector length mismatch");
  if (point.size() != static_cast<size_t>(term.dim()))
    throw EvalError("point dimension mismatch for " + term.label);
  for (size_t i = 0; i < point.size(); ++i) {
    const auto& b = term.free_bounds[i];
    if (point[i] < b.lower - 1e-9 || point[i] > b.upper + 1e-9)
      throw EvalError("point outside the bounds of '" + b.var + "' in " + term.label);
  }
  EvalPolicy<double> pol = value_policy(program, params, program.physical_values(params));
  TermEvaluator<double> ev(program, term, point, pol);
  double r = ev.residual();
  if (!std::isfinite(r)) throw EvalError("non-finite residual for " + term.label);
  return r;
}

std::vector<double> eval_residual(const LossProgram& program, const LossTerm& term,
                                  std::span<const double> point,
                                  const FlatParams& params) {
  return {eval_residual_value(program, term, point, params)};
}

TScalar eval_residual_tape(const LossProgram& program, const LossTerm& term,
                           std::span<const double> point, Tape& tape,
                           std::span<const TScalar> leaves) {
  EvalPolicy<TScalar> pol;
  pol.lift = [&tape](double v) { return TScalar{&tape, tape.constant(v)}; };
  if (program.param_estim) {
    pol.param = [&program, leaves](int i) {
      return leaves[program.net_param_total + static_cast<size_t>(i)];
    };
  } else {
    pol.param = [&program, &tape](int i) {
      return TScalar{
          &tape,
          tape.constant(
              program.system.physical_params[static_cast<size_t>(i)].default_value)};
    };
  }
  pol.app_eval = [&program, &tape, leaves, &pol](const ResolvedApp& app,
                                                 std::span<const double> coords) {
    TScalar zero{&tape, tape.constant(0.0)};
    std::vector<Jet<TScalar>> in(app.args.size());
    for (size_t s = 0; s < app.args.size(); ++s) {
      Jet<TScalar>& j = in[s];
      j.sh = &app.shape;
      double cv = app.args[s].is_const ? app.args[s].value
                                       : coords[static_cast<size_t>(app.args[s].axis)];
      j.v = TScalar{&tape, tape.constant(cv)};
      for (int k = 0; k < app.shape.n1; ++k)
        j.d1[static_cast<size_t>(k)] =
            app.slots1[static_cast<size_t>(k)] == static_cast<int>(s)
                ? TScalar{&tape, tape.constant(1.0)}
                : zero;
      for (int k = 0; k < app.shape.n2; ++k) j.d2[static_cast<size_t>(k)] = zero;
    }
    size_t off = program.net_offsets[static_cast<size_t>(app.dvar)];
    auto out = mlp_forward_jet<TScalar>(
        program.nets[static_cast<size_t>(app.dvar)],
        [leaves, off](size_t i) { return leaves[off + i]; },
        std::span<const Jet<TScalar>>(in), zero);
    Jet<TScalar> net = out[0];
    int w = program.wrapper_of_dvar[static_cast<size_t>(app.dvar)];
    if (w >= 0) {
      const TrialWrapper& tw = program.wrappers[static_cast<size_t>(w)];
      Jet<double> g = wrapper_component(program, app, coords, *tw.scale);
      Jet<double> h = wrapper_component(program, app, coords, *tw.offset);
      net = affine_wrap(g, h, net, pol.lift);
    }
    return net;
  };
  TermEvaluator<TScalar> ev(program, term, point, pol);
  return ev.residual();
}

double eval_residual_oracle(const LossProgram& program, const LossTerm& term,
                            std::span<const double> point,
                            const std::vector<OracleJetFn>& oracles) {
  EvalPolicy<double> pol;
  pol.lift = [](double v) { return v; };
  std::vector<double> physical = program.physical_values({});
  pol.param = [physical](int i) { return physical[static_cast<size_t>(i)]; };
  pol.app_eval = [&oracles](const ResolvedApp& app, std::span<const double> coords) {
    std::vector<Jet<double>> in = app_coord_jets(app, coords);
    return oracles[static_cast<size_t>(app.dvar)](in);
  };
  TermEvaluator<double> ev(program, term, point, pol);
  return ev.residual();
}

double network_value(const LossProgram& program, int dvar,
                     std::span<const double> coords, const FlatParams& params) {
  const MlpSpec& spec = program.nets[static_cast<size_t>(dvar)];
  size_t off = program.net_offsets[static_cast<size_t>(dvar)];
  double v = mlp_forward(spec, std::span<const double>(params).subspan(off), coords)[0];
  int w = program.wrapper_of_dvar[static_cast<size_t>(dvar)];
  if (w >= 0) {
    const TrialWrapper& tw = program.wrappers[static_cast<size_t>(w)];
    ResolvedApp app;  // value-only pseudo application at fixed coordinates
    app.dvar = dvar;
    for (double c : coords) app.args.push_back({true, -1, c});
    Jet<double> g = wrapper_component(program, app, {}, *tw.scale);
    Jet<double> h = wrapper_component(program, app, {}, *tw.offset);
    v = g.v * v + h.v;
  }
  return v;
}

double additional_loss_value(const LossProgram& program, const FlatParams& params) {
  if (!program.additional.present) return 0.0;
  std::vector<double> sum(program.nets.size(), 0.0);
  std::vector<size_t> count(program.nets.size(), 0);
  for (const auto& s : program.additional.samples) {
    double v = network_value(program, s.dvar, s.coords, params);
    double d = v - s.value;
    sum[static_cast<size_t>(s.dvar)] += d * d;
    count[static_cast<size_t>(s.dvar)] += 1;
  }
  double total = 0.0;
  for (size_t i = 0; i < sum.size(); ++i)
    if (count[i]) total += sum[i] / static_cast<double>(count[i]);
  return program.additional.weight * total;
}

TScalar additional_loss_tape(const LossProgram& program, Tape& tape,
                             std::span<const TScalar> leaves) {
  TScalar total{&tape, tape.constant(0.0)};
  if (!program.additional.present) return total;
  JetShape sh = JetShape::firsts(0);
  std::vector<TScalar> per_dvar(program.nets.size(), TScalar{&tape, tape.constant(0.0)});
  std::vector<size_t> count(program.nets.size(), 0);
  std::function<TScalar(double)> lift = [&tape](double v) {
    return TScalar{&tape, tape.constant(v)};
  };
  for (const auto& s : program.additional.samples) {
    std::vector<Jet<TScalar>> in(s.coords.size());
    for (size_t i = 0; i < s.coords.size(); ++i) {
      in[i].sh = &sh;
      in[i].v = lift(s.coords[i]);
    }
    size_t off = program.net_offsets[static_cast<size_t>(s.dvar)];
    auto out = mlp_forward_jet<TScalar>(
        program.nets[static_cast<size_t>(s.dvar)],
        [leaves, off](size_t i) { return leaves[off + i]; },
        std::span<const Jet<TScalar>>(in), lift(0.0));
    Jet<TScalar> net = out[0];
    int w = program.wrapper_of_dvar[static_cast<size_t>(s.dvar)];
    if (w >= 0) {
      const TrialWrapper& tw = program.wrappers[static_cast<size_t>(w)];
      ResolvedApp app;  // value-only pseudo application at fixed coordinates
      app.dvar = s.dvar;
      for (double c : s.coords) app.args.push_back({true, -1, c});
      app.shape = sh;
      Jet<double> g = wrapper_component(program, app, {}, *tw.scale);
      Jet<double> h = wrapper_component(program, app, {}, *tw.offset);
      net = affine_wrap(g, h, net, lift);
    }
    TScalar d = net.v - s.value;
    per_dvar[static_cast<size_t>(s.dvar)] += d * d;
    count[static_cast<size_t>(s.dvar)] += 1;
  }
  for (size_t i = 0; i < per_dvar.size(); ++i)
    if (count[i]) total += per_dvar[i] * (1.0 / static_cast<double>(count[i]));
  return total * program.additional.weight;
}

}  // namespace pinn
