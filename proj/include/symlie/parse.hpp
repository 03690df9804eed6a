#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "symlie/expression.hpp"
#include "symlie/jet.hpp"

namespace symlie {

/// How bare identifiers resolve: independent variable, dependent (jet)
/// symbol, declared function, or otherwise a parameter. Parsing `f(x, y)`
/// registers the signature of `f` for later bare or `D(f, ...)` uses.
struct SymbolContext {
  std::set<std::string> independents;
  std::set<std::string> dependents;
  std::map<std::string, std::vector<std::string>> functions;
  /// Argument list given to one-variable functions first seen without one.
  std::string default_argument = "x";

  /// x, z, t independent; y, w, r, a0..a9 dependent; f, g, h, F, J, P, mu,
  /// f1, f2, g1, g2 one-variable functions of x.
  static SymbolContext standard();

  void declare_function(const std::string& name, std::vector<std::string> args);
  void declare_dependent(const std::string& name);
  void declare_independent(const std::string& name);
};

/// Grammar:
///   expr    := term (("+"|"-") term)*
///   term    := unary (("*"|"/") unary)*
///   unary   := "-" unary | factor
///   factor  := base ("^" ["-"] integer)?
///   base    := integer | atomref | "(" expr ")"
///   atomref := ident | ident "#" integer | ident "'"{1,3} ["(" args ")"]
///            | "D(" ident ("," integer)+ ")" ["(" args ")"] | ident "(" args ")"
/// Throws ParseError with line and column.
Expression parse_expression(std::string_view text, SymbolContext& context);
Expression parse_expression(std::string_view text);

/// "coord: expr; coord: expr ..." (newlines also separate entries; lines
/// starting with // are comments; "@functions f, g" declares names). The
/// first coordinate is the independent variable.
VectorField parse_vector_field(std::string_view text, SymbolContext context,
                               int max_order = 10);
VectorField parse_vector_field(std::string_view text);

/// Whole file as text; throws std::runtime_error when it cannot be read.
std::string read_text_file(const std::string& path);

std::string to_string(const Atom& atom);
std::string to_string(const Rational& value);
std::string to_string(const Polynomial& p);
std::string to_string(const Expression& e);
/// Entries in declared coordinate order.
std::string to_string(const VectorField& field);

}  // namespace symlie
