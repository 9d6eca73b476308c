#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pinn/lowering.hpp"
#include "pinn/refsolve.hpp"
#include "pinn/trainer.hpp"

namespace pinn {

/// A fully configured benchmark: system text, networks, the reference answer
/// (closed form where one exists, a finite-difference table otherwise), and a
/// default run configuration.
struct BenchmarkProblem {
  std::string id;
  std::string spec_text;
  PdeSystem system;
  std::map<std::string, MlpSpec> nets;
  std::vector<TrialWrapper> wrappers;
  bool param_estim = false;
  std::vector<DataSample> data;  // inverse problems
  double data_weight = 1.0;

  /// Complete closed-form solution (one entry per dependent variable) when
  /// the problem has one; empty otherwise.
  std::vector<OracleJetFn> oracle_jets;
  EvalOracle eval_oracle;
  std::shared_ptr<ReferenceTable> reference;  // table-backed problems

  RunConfig default_config;
};

std::vector<std::string> builtin_ids();
BenchmarkProblem builtin_problem(const std::string& id);

/// Lowers a benchmark (wrappers, param_estim and data applied).
LossProgram lower_benchmark(const BenchmarkProblem& problem);

}  // namespace pinn
