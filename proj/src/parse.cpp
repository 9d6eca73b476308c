#include "pinn/parse.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace pinn {

bool Declarations::is_ivar(const std::string& n) const {
  for (const auto& v : independent_vars)
    if (v == n) return true;
  return false;
}

namespace {

enum class Tok {
  End, Ident, Number,
  LParen, RParen, LBracket, RBracket,
  Comma, Semicolon, Colon, Equals,
  Plus, Minus, Star, Slash, Caret,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  size_t offset = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_ws();
      Token t;
      t.offset = pos_;
      if (pos_ >= text_.size() || text_[pos_] == '#') {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      char c = text_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '.' && pos_ + 1 < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
        const char* start = text_.c_str() + pos_;
        char* end = nullptr;
        t.kind = Tok::Number;
        t.number = std::strtod(start, &end);
        if (end == start) throw ParseError("malformed number", pos_);
        t.text.assign(start, static_cast<const char*>(end));
        pos_ += static_cast<size_t>(end - start);
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t b = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
          ++pos_;
        t.kind = Tok::Ident;
        t.text = text_.substr(b, pos_ - b);
      } else {
        ++pos_;
        switch (c) {
          case '(': t.kind = Tok::LParen; break;
          case ')': t.kind = Tok::RParen; break;
          case '[': t.kind = Tok::LBracket; break;
          case ']': t.kind = Tok::RBracket; break;
          case ',': t.kind = Tok::Comma; break;
          case ';': t.kind = Tok::Semicolon; break;
          case ':': t.kind = Tok::Colon; break;
          case '=': t.kind = Tok::Equals; break;
          case '+': t.kind = Tok::Plus; break;
          case '-': t.kind = Tok::Minus; break;
          case '*': t.kind = Tok::Star; break;
          case '/': t.kind = Tok::Slash; break;
          case '^': t.kind = Tok::Caret; break;
          default:
            throw ParseError(std::string("unexpected character '") + c + "'", pos_ - 1);
        }
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  const std::string& text_;
  size_t pos_ = 0;
};

bool is_unary_fn(const std::string& n, UnaryFn* out) {
  struct { const char* name; UnaryFn fn; } table[] = {
      {"sin", UnaryFn::Sin},   {"cos", UnaryFn::Cos},   {"exp", UnaryFn::Exp},
      {"log", UnaryFn::Log},   {"sqrt", UnaryFn::Sqrt}, {"sinh", UnaryFn::Sinh},
      {"cosh", UnaryFn::Cosh}, {"tanh", UnaryFn::Tanh}, {"abs", UnaryFn::Abs},
  };
  for (const auto& row : table)
    if (n == row.name) {
      *out = row.fn;
      return true;
    }
  return false;
}

class ExprParser {
 public:
  ExprParser(std::vector<Token> toks, const Declarations& decl)
      : toks_(std::move(toks)), decl_(decl) {}

  ExprPtr parse_full() {
    ExprPtr e = parse_add();
    expect(Tok::End, "trailing input after expression");
    return e;
  }

  Equation parse_equation_full() {
    ExprPtr lhs = parse_add();
    if (peek().kind != Tok::Equals)
      throw ParseError("expected '=' between equation sides", peek().offset);
    advance();
    ExprPtr rhs = parse_add();
    expect(Tok::End, "trailing input after equation");
    return Equation{std::move(lhs), std::move(rhs)};
  }

 private:
  const Token& peek(int ahead = 0) const {
    size_t i = pos_ + static_cast<size_t>(ahead);
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  const Token& advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  void expect(Tok k, const char* msg) {
    if (peek().kind != k) throw ParseError(msg, peek().offset);
    advance();
  }

  ExprPtr parse_add() {
    ExprPtr e = parse_mul();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      BinaryOp op = peek().kind == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub;
      advance();
      e = Expr::binary(op, std::move(e), parse_mul());
    }
    return e;
  }

  ExprPtr parse_mul() {
    ExprPtr e = parse_unary();
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      BinaryOp op = peek().kind == Tok::Star ? BinaryOp::Mul : BinaryOp::Div;
      advance();
      e = Expr::binary(op, std::move(e), parse_unary());
    }
    return e;
  }

  ExprPtr parse_unary() {
    if (peek().kind == Tok::Minus) {
      advance();
      ExprPtr inner = parse_unary();
      if (inner->kind == ExprKind::Constant) return Expr::constant(-inner->value);
      return Expr::unary(UnaryFn::Neg, std::move(inner));
    }
    return parse_power();
  }

  // '^' binds tighter than unary minus and associates left; a leading '-' is
  // allowed in the exponent slot.
  ExprPtr parse_power() {
    ExprPtr e = parse_primary();
    while (peek().kind == Tok::Caret) {
      advance();
      bool negate = false;
      while (peek().kind == Tok::Minus) {
        advance();
        negate = !negate;
      }
      ExprPtr rhs = parse_primary();
      if (negate) {
        if (rhs->kind == ExprKind::Constant)
          rhs = Expr::constant(-rhs->value);
        else
          rhs = Expr::unary(UnaryFn::Neg, std::move(rhs));
      }
      e = Expr::binary(BinaryOp::Pow, std::move(e), std::move(rhs));
    }
    return e;
  }

  ExprPtr parse_primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number: {
        advance();
        return Expr::constant(t.number);
      }
      case Tok::LParen: {
        advance();
        ExprPtr e = parse_add();
        expect(Tok::RParen, "expected ')'");
        return e;
      }
      case Tok::Ident:
        return parse_ident();
      default:
        throw ParseError("expected expression", t.offset);
    }
  }

  ExprPtr parse_ident() {
    Token t = peek();
    advance();
    const std::string& n = t.text;

    if (n == "pi") return Expr::constant(M_PI);

    if (n == "piecewise") return parse_piecewise(t.offset);
    if (n == "norm") return parse_norm(t.offset);

    UnaryFn fn;
    if (is_unary_fn(n, &fn)) {
      expect(Tok::LParen, "expected '(' after function name");
      ExprPtr arg = parse_add();
      expect(Tok::RParen, "expected ')'");
      return Expr::unary(fn, std::move(arg));
    }

    if (decl_.is_ivar(n)) return Expr::ivar(n);
    if (decl_.physical_params.count(n)) return Expr::param(n);

    auto dv = decl_.dependent_vars.find(n);
    if (dv != decl_.dependent_vars.end()) return parse_dvar_app(n, t.offset, dv->second);

    if (n.size() > 1 && n[0] == 'D') return parse_derivative(n, t.offset);

    throw ParseError("undeclared name '" + n + "'", t.offset);
  }

  // Application argument: the i-th declared argument variable, or any
  // constant-foldable expression (a pinned coordinate).
  ExprPtr parse_dvar_app(const std::string& name, size_t offset,
                         const std::vector<std::string>& sig) {
    expect(Tok::LParen, "expected '(' after dependent variable");
    std::vector<ExprPtr> args;
    if (peek().kind != Tok::RParen) {
      while (true) {
        size_t arg_off = peek().offset;
        ExprPtr a = parse_add();
        if (a->kind != ExprKind::IndependentVar) {
          auto c = try_eval_const(*a);
          if (!c)
            throw ParseError("application argument must be an independent variable "
                             "or a constant", arg_off);
          a = Expr::constant(*c);
        }
        args.push_back(std::move(a));
        if (peek().kind != Tok::Comma) break;
        advance();
      }
    }
    expect(Tok::RParen, "expected ')'");
    if (args.size() != sig.size())
      throw ParseError("'" + name + "' expects " + std::to_string(sig.size()) +
                           " argument(s), got " + std::to_string(args.size()),
                       offset);
    for (size_t i = 0; i < args.size(); ++i)
      if (args[i]->kind == ExprKind::IndependentVar && args[i]->name != sig[i])
        throw ParseError("argument " + std::to_string(i + 1) + " of '" + name +
                             "' must be '" + sig[i] + "' or a constant",
                         offset);
    return Expr::dvar_app(name, std::move(args));
  }

  // D<var>(...) is a first derivative, D<var><var>(...) a pure second
  // derivative. The operand must be a dependent-variable application.
  ExprPtr parse_derivative(const std::string& head, size_t offset) {
    std::string rest = head.substr(1);
    std::string var;
    int order = 0;
    if (decl_.is_ivar(rest)) {
      var = rest;
      order = 1;
    } else if (rest.size() % 2 == 0) {
      std::string a = rest.substr(0, rest.size() / 2);
      std::string b = rest.substr(rest.size() / 2);
      if (a == b && decl_.is_ivar(a)) {
        var = a;
        order = 2;
      }
    }
    if (order == 0) {
      // Distinct-variable splits are mixed partials; anything else is unknown.
      for (size_t cut = 1; cut < rest.size(); ++cut) {
        if (decl_.is_ivar(rest.substr(0, cut)) && decl_.is_ivar(rest.substr(cut)))
          throw ParseError("mixed partial derivative 'D" + rest + "' is unsupported",
                           offset);
      }
      throw ParseError("undeclared name '" + head + "'", offset);
    }
    expect(Tok::LParen, "expected '(' after derivative operator");
    size_t op_off = peek().offset;
    ExprPtr operand = parse_primary();
    expect(Tok::RParen, "expected ')'");
    if (operand->kind == ExprKind::Derivative)
      throw ParseError("nested derivatives are unsupported (order > 2 or mixed partial)",
                       op_off);
    if (operand->kind != ExprKind::DependentVarApp)
      throw ParseError("derivative operand must be a dependent-variable application",
                       op_off);
    return Expr::derivative(std::move(operand), var, order);
  }

  // norm(grad(u(...); axes...)) — axes default to the variable arguments.
  ExprPtr parse_norm(size_t offset) {
    expect(Tok::LParen, "expected '(' after norm");
    if (peek().kind != Tok::Ident || peek().text != "grad")
      throw ParseError("norm(...) only supports norm(grad(...))", peek().offset);
    advance();
    expect(Tok::LParen, "expected '(' after grad");
    size_t op_off = peek().offset;
    ExprPtr operand = parse_primary();
    if (operand->kind != ExprKind::DependentVarApp)
      throw ParseError("grad operand must be a dependent-variable application", op_off);
    std::vector<std::string> axes;
    if (peek().kind == Tok::Semicolon) {
      advance();
      while (true) {
        if (peek().kind != Tok::Ident)
          throw ParseError("expected axis name in grad axis list", peek().offset);
        axes.push_back(peek().text);
        advance();
        if (peek().kind != Tok::Comma) break;
        advance();
      }
    } else {
      for (const auto& a : operand->args)
        if (a->kind == ExprKind::IndependentVar) axes.push_back(a->name);
    }
    expect(Tok::RParen, "expected ')' closing grad");
    expect(Tok::RParen, "expected ')' closing norm");
    if (axes.empty())
      throw ParseError("norm(grad(...)) needs at least one axis", offset);
    return Expr::norm_of_gradient(std::move(operand), std::move(axes));
  }

  // piecewise(selector; b1: v1, b2: v2, ..., else: vn)
  ExprPtr parse_piecewise(size_t offset) {
    expect(Tok::LParen, "expected '(' after piecewise");
    ExprPtr selector = parse_add();
    expect(Tok::Semicolon, "expected ';' after piecewise selector");
    std::vector<double> breaks;
    std::vector<ExprPtr> values;
    bool saw_else = false;
    while (true) {
      if (peek().kind == Tok::Ident && peek().text == "else") {
        advance();
        expect(Tok::Colon, "expected ':' after else");
        values.push_back(parse_add());
        saw_else = true;
        break;
      }
      size_t b_off = peek().offset;
      ExprPtr b = parse_add();
      auto c = try_eval_const(*b);
      if (!c) throw ParseError("piecewise breakpoint must be a constant", b_off);
      if (!breaks.empty() && *c <= breaks.back())
        throw ParseError("piecewise breakpoints must be ascending", b_off);
      breaks.push_back(*c);
      expect(Tok::Colon, "expected ':' after breakpoint");
      values.push_back(parse_add());
      if (peek().kind != Tok::Comma)
        throw ParseError("expected ',' or else branch in piecewise", peek().offset);
      advance();
    }
    expect(Tok::RParen, "expected ')' closing piecewise");
    if (!saw_else || breaks.empty())
      throw ParseError("piecewise needs at least one breakpoint and an else branch",
                       offset);
    return Expr::piecewise(std::move(selector), std::move(breaks), std::move(values));
  }

  std::vector<Token> toks_;
  const Declarations& decl_;
  size_t pos_ = 0;
};

std::vector<Token> lex(const std::string& text) { return Lexer(text).run(); }

}  // namespace

ExprPtr parse_expression(const std::string& text, const Declarations& decl) {
  return ExprParser(lex(text), decl).parse_full();
}

Equation parse_equation(const std::string& text, const Declarations& decl) {
  return ExprParser(lex(text), decl).parse_equation_full();
}

namespace {

struct Line {
  std::string text;
  size_t offset;  // byte offset of line start in the whole file
};

std::vector<Line> split_lines(const std::string& text) {
  std::vector<Line> lines;
  size_t start = 0;
  for (size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '\n') {
      lines.push_back({text.substr(start, i - start), start});
      start = i + 1;
    }
  }
  return lines;
}

// Rethrows a ParseError with the offset shifted to file coordinates.
template <class Fn>
auto at_line(size_t line_offset, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    throw ParseError(e.what(), line_offset + e.offset());
  }
}

void check_name(const std::string& n, const Declarations& decl, size_t off) {
  if (n == "pi") throw ParseError("'pi' is a reserved constant", off);
  UnaryFn fn;
  if (is_unary_fn(n, &fn) || n == "norm" || n == "grad" || n == "piecewise" ||
      n == "else")
    throw ParseError("'" + n + "' is a reserved word", off);
  if (decl.is_ivar(n) || decl.dependent_vars.count(n) || decl.physical_params.count(n))
    throw ParseError("'" + n + "' is declared twice", off);
}

}  // namespace

PdeSystem parse_system(const std::string& text) {
  PdeSystem sys;
  Declarations decl;
  struct PendingEq {
    std::string text;
    size_t offset;
    bool is_bc;
  };
  std::vector<PendingEq> pending;
  std::vector<std::pair<std::string, double>> defaults;

  for (const Line& line : split_lines(text)) {
    std::vector<Token> toks = at_line(line.offset, [&] { return lex(line.text); });
    if (toks.front().kind == Tok::End) continue;
    if (toks.front().kind != Tok::Ident)
      throw ParseError("expected statement keyword", line.offset + toks.front().offset);
    const std::string& kw = toks.front().text;

    auto file_off = [&](const Token& t) { return line.offset + t.offset; };

    if (kw == "params" || kw == "ivars") {
      for (size_t i = 1; i < toks.size() - 1; ++i) {
        if (toks[i].kind != Tok::Ident)
          throw ParseError("expected name", file_off(toks[i]));
        check_name(toks[i].text, decl, file_off(toks[i]));
        if (kw == "params") {
          decl.physical_params.insert(toks[i].text);
          sys.physical_params.push_back({toks[i].text, 1.0});
        } else {
          decl.independent_vars.push_back(toks[i].text);
          sys.independent_vars.push_back(toks[i].text);
        }
      }
    } else if (kw == "dvars") {
      size_t i = 1;
      while (i < toks.size() - 1) {
        if (toks[i].kind != Tok::Ident)
          throw ParseError("expected dependent-variable declaration", file_off(toks[i]));
        std::string name = toks[i].text;
        check_name(name, decl, file_off(toks[i]));
        ++i;
        if (toks[i].kind != Tok::LParen)
          throw ParseError("expected '(' in dependent-variable declaration",
                           file_off(toks[i]));
        ++i;
        std::vector<std::string> args;
        while (toks[i].kind == Tok::Ident) {
          if (!decl.is_ivar(toks[i].text))
            throw ParseError("'" + toks[i].text + "' is not a declared independent "
                             "variable", file_off(toks[i]));
          args.push_back(toks[i].text);
          ++i;
          if (toks[i].kind == Tok::Comma) ++i;
        }
        if (toks[i].kind != Tok::RParen)
          throw ParseError("expected ')'", file_off(toks[i]));
        ++i;
        if (args.empty())
          throw ParseError("dependent variable '" + name + "' needs arguments",
                           line.offset);
        decl.dependent_vars[name] = args;
        sys.dependent_vars.push_back({name, args});
      }
    } else if (kw == "domain") {
      // domain <ivar> in [a, b]
      if (toks.size() < 8 || toks[1].kind != Tok::Ident || toks[2].kind != Tok::Ident ||
          toks[2].text != "in" || toks[3].kind != Tok::LBracket)
        throw ParseError("expected 'domain <var> in [a, b]'", line.offset);
      std::string var = toks[1].text;
      if (!decl.is_ivar(var))
        throw ParseError("'" + var + "' is not a declared independent variable",
                         file_off(toks[1]));
      // Bounds may be constant expressions, e.g. 2*pi.
      size_t comma = 4;
      int depth = 0;
      while (comma < toks.size() &&
             !(depth == 0 && toks[comma].kind == Tok::Comma)) {
        if (toks[comma].kind == Tok::LParen) ++depth;
        if (toks[comma].kind == Tok::RParen) --depth;
        ++comma;
      }
      size_t close = comma + 1;
      depth = 0;
      while (close < toks.size() &&
             !(depth == 0 && toks[close].kind == Tok::RBracket)) {
        if (toks[close].kind == Tok::LParen) ++depth;
        if (toks[close].kind == Tok::RParen) --depth;
        ++close;
      }
      if (comma >= toks.size() || close >= toks.size())
        throw ParseError("expected 'domain <var> in [a, b]'", line.offset);
      auto parse_bound = [&](size_t from, size_t to) {
        std::vector<Token> sub(toks.begin() + from, toks.begin() + to);
        Token end;
        end.kind = Tok::End;
        end.offset = toks[to].offset;
        sub.push_back(end);
        ExprPtr e = at_line(line.offset,
                            [&] { return ExprParser(sub, decl).parse_full(); });
        auto c = try_eval_const(*e);
        if (!c) throw ParseError("domain bound must be constant", file_off(toks[from]));
        return *c;
      };
      double lo = parse_bound(4, comma);
      double hi = parse_bound(comma + 1, close);
      if (!(lo < hi))
        throw ParseError("domain lower bound must be below upper bound", line.offset);
      for (const auto& d : sys.domains)
        if (d.var == var)
          throw ParseError("duplicate domain for '" + var + "'", line.offset);
      sys.domains.push_back({var, lo, hi});
    } else if (kw == "eq" || kw == "bc") {
      size_t body = line.text.find(kw) + kw.size();
      pending.push_back({line.text.substr(body), line.offset + body, kw == "bc"});
    } else if (kw == "default") {
      // default <param> = <real>
      if (toks.size() < 5 || toks[1].kind != Tok::Ident || toks[2].kind != Tok::Equals)
        throw ParseError("expected 'default <param> = <value>'", line.offset);
      if (!decl.physical_params.count(toks[1].text))
        throw ParseError("'" + toks[1].text + "' is not a declared parameter",
                         file_off(toks[1]));
      std::vector<Token> sub(toks.begin() + 3, toks.end());
      ExprPtr e = at_line(line.offset, [&] { return ExprParser(sub, decl).parse_full(); });
      auto c = try_eval_const(*e);
      if (!c) throw ParseError("default value must be constant", file_off(toks[3]));
      defaults.emplace_back(toks[1].text, *c);
    } else {
      throw ParseError("unknown statement '" + kw + "'", file_off(toks.front()));
    }
  }

  // Equations parse once all declarations are known, so statement order in the
  // file does not matter.
  for (const auto& p : pending) {
    Equation eq = at_line(p.offset, [&] { return parse_equation(p.text, decl); });
    (p.is_bc ? sys.boundary_conditions : sys.equations).push_back(std::move(eq));
  }
  for (const auto& [name, value] : defaults) {
    sys.physical_params[static_cast<size_t>(sys.param_index(name))].default_value = value;
  }
  return sys;
}

}  // namespace pinn
