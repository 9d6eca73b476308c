#pragma once

#include <map>
#include <string>
#include <vector>

#include "pinn/ast.hpp"
#include "pinn/mlp.hpp"

namespace pinn {

struct ValidationIssue {
  enum class Code {
    MissingDomain,
    DuplicateDomain,
    BadDomain,
    UnhousedName,
    BadApplication,
    BadDerivative,
    DimensionMismatch,
    UnpinnedBoundary,
    InteriorPin,
    BadPiecewise,
  };
  Code code;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string to_string() const;
  bool has(ValidationIssue::Code c) const;
};

/// Checks a system against one network spec per dependent variable:
/// domains cover the independent variables, every name resolves, derivative
/// orders stay within {1,2}, network input dims match application arity, and
/// every boundary condition pins coordinates to exact domain endpoints.
ValidationReport validate_system(const PdeSystem& system,
                                 const std::map<std::string, MlpSpec>& net_specs);

}  // namespace pinn
