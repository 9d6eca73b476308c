#pragma once

#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "pinn/ast.hpp"
#include "pinn/jet.hpp"
#include "pinn/mlp.hpp"
#include "pinn/tape.hpp"
#include "pinn/validate.hpp"

namespace pinn {

class LoweringError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluation failure at a point (domain violation, non-finite intermediate).
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structural constraint: the trial function g(x)*N(x) + h(x) replaces the
/// bare network for one dependent variable. Boundary conditions listed in
/// `absorbs` are checked numerically at lowering time and then dropped.
struct TrialWrapper {
  std::string dvar;
  ExprPtr scale;   // g, closed form in the independent variables
  ExprPtr offset;  // h, closed form in the independent variables
  std::vector<int> absorbs;  // indices into boundary_conditions
};

/// One network application with fixed argument pattern, plus the jet shape
/// the surrounding term demands of it.
struct ResolvedApp {
  int dvar = -1;
  struct Arg {
    bool is_const = false;
    int axis = -1;      // global independent-variable index when !is_const
    double value = 0.0; // pinned coordinate when is_const
  };
  std::vector<Arg> args;
  JetShape shape;
  std::vector<int> slots1;  // first-derivative position -> input slot
};

struct NodeRef {
  enum class Kind { AppValue, AppD1, AppD2, Norm };
  Kind kind = Kind::AppValue;
  int app = -1;
  int pos = -1;
  std::vector<int> norm_pos;
};

struct LossTerm {
  enum class Kind { Interior, Boundary };
  Kind kind = Kind::Interior;
  std::string label;
  Equation eq;  // residual is lhs - rhs
  std::vector<ResolvedApp> apps;
  std::unordered_map<const Expr*, NodeRef> refs;
  std::vector<int> free_axes;              // global independent-variable indices
  std::vector<IntervalDomain> free_bounds;
  std::map<int, double> pins;              // axis -> unique pinned value
  int dim() const { return static_cast<int>(free_axes.size()); }
};

struct DataSample {
  int dvar = 0;
  std::vector<double> coords;  // in the dependent variable's own argument order
  double value = 0.0;
};

struct AdditionalLoss {
  bool present = false;
  double weight = 1.0;
  std::vector<DataSample> samples;
};

struct LossProgram {
  PdeSystem system;
  std::vector<MlpSpec> nets;        // by dependent-variable order
  std::vector<size_t> net_offsets;  // slice starts in the flat vector
  size_t net_param_total = 0;
  bool param_estim = false;
  std::vector<TrialWrapper> wrappers;
  std::vector<int> wrapper_of_dvar;  // -1 when unwrapped
  std::vector<LossTerm> terms;       // interior terms first
  size_t interior_count = 0;
  AdditionalLoss additional;

  /// Network parameters plus the trailing physical-parameter slice when
  /// parameter estimation is on.
  size_t param_count() const {
    return net_param_total + (param_estim ? system.physical_params.size() : 0);
  }

  /// Physical parameter values: the trailing slice under param_estim,
  /// otherwise the declared defaults.
  std::vector<double> physical_values(std::span<const double> params) const;

  /// Initial flat vector: per-network Glorot draws (seed, seed+1, ...)
  /// followed by parameter defaults when param_estim is on.
  FlatParams initial_params(uint64_t seed) const;
};

LossProgram lower_system(const PdeSystem& system,
                         const std::map<std::string, MlpSpec>& nets,
                         const std::vector<TrialWrapper>& wrappers = {},
                         bool param_estim = false);

/// Adds weight * sum over dependent vars of the mean squared data misfit.
LossProgram attach_additional_loss(LossProgram program,
                                   const std::vector<DataSample>& data, double weight);

std::vector<double> eval_residual(const LossProgram& program, const LossTerm& term,
                                  std::span<const double> point, const FlatParams& params);

double eval_residual_value(const LossProgram& program, const LossTerm& term,
                           std::span<const double> point, const FlatParams& params);

TScalar eval_residual_tape(const LossProgram& program, const LossTerm& term,
                           std::span<const double> point, Tape& tape,
                           std::span<const TScalar> leaves);

/// Closed-form stand-in for one dependent variable: coordinates arrive as
/// seeded jets, so derivatives fall out of jet arithmetic.
using OracleJetFn = std::function<Jet<double>(std::span<const Jet<double>>)>;

double eval_residual_oracle(const LossProgram& program, const LossTerm& term,
                            std::span<const double> point,
                            const std::vector<OracleJetFn>& oracles);

double additional_loss_value(const LossProgram& program, const FlatParams& params);
TScalar additional_loss_tape(const LossProgram& program, Tape& tape,
                             std::span<const TScalar> leaves);

/// Forward value of dependent variable `dvar` at coordinates in its own
/// argument order, honoring any trial wrapper.
double network_value(const LossProgram& program, int dvar,
                     std::span<const double> coords, const FlatParams& params);

}  // namespace pinn
