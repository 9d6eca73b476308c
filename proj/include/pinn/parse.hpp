#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "pinn/ast.hpp"

namespace pinn {

/// Parse failure, carrying the byte offset into the parsed text.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string msg, size_t offset)
      : std::runtime_error(msg + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  size_t offset() const { return offset_; }

 private:
  size_t offset_;
};

/// Name sets an expression is parsed against.
struct Declarations {
  std::vector<std::string> independent_vars;
  std::map<std::string, std::vector<std::string>> dependent_vars;  // name -> arg names
  std::set<std::string> physical_params;

  bool is_ivar(const std::string& n) const;
};

ExprPtr parse_expression(const std::string& text, const Declarations& decl);

/// Parses "lhs = rhs".
Equation parse_equation(const std::string& text, const Declarations& decl);

/// Parses a PDE spec file: one statement per line, `#` comments.
/// Statements: params, ivars, dvars, domain, eq, bc, default.
PdeSystem parse_system(const std::string& text);

}  // namespace pinn
