#include "symlie/parse.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>

#include "symlie/error.hpp"

namespace symlie {

SymbolContext SymbolContext::standard() {
  SymbolContext c;
  c.independents = {"x", "z", "t"};
  c.dependents = {"y", "w", "r"};
  for (int i = 0; i <= 9; ++i) c.dependents.insert("a" + std::to_string(i));
  for (const char* f : {"f", "g", "h", "F", "J", "P", "mu", "f1", "f2", "g1", "g2"})
    c.functions[f] = {"x"};
  return c;
}

void SymbolContext::declare_function(const std::string& name, std::vector<std::string> args) {
  dependents.erase(name);
  independents.erase(name);
  functions[name] = std::move(args);
}

void SymbolContext::declare_dependent(const std::string& name) {
  functions.erase(name);
  independents.erase(name);
  dependents.insert(name);
}

void SymbolContext::declare_independent(const std::string& name) {
  functions.erase(name);
  dependents.erase(name);
  independents.insert(name);
}

namespace {

enum class TokenKind { Ident, Integer, Symbol, Newline, End };

struct Token {
  TokenKind kind;
  std::string text;
  int line;
  int column;
};

class Lexer {
 public:
  Lexer(std::string_view text, bool newline_tokens) : text_(text), newline_tokens_(newline_tokens) {}

  std::vector<Token> tokenize() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      if (pos_ >= text_.size()) {
        out.push_back(Token{TokenKind::End, "", line_, column_});
        return out;
      }
      const char c = text_[pos_];
      const int line = line_;
      const int column = column_;
      if (c == '\n') {
        advance();
        if (newline_tokens_) out.push_back(Token{TokenKind::Newline, "\n", line, column});
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string s;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
          s.push_back(advance());
        out.push_back(Token{TokenKind::Ident, std::move(s), line, column});
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        std::string s;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
          s.push_back(advance());
        out.push_back(Token{TokenKind::Integer, std::move(s), line, column});
      } else if (std::string_view("+-*/^()#',:;@=").find(c) != std::string_view::npos) {
        out.push_back(Token{TokenKind::Symbol, std::string(1, advance()), line, column});
      } else {
        throw ParseError(std::string("unexpected character '") + c + "'", line, column);
      }
    }
  }

 private:
  char advance() {
    const char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || (c == '\n' && !newline_tokens_)) {
        advance();
      } else {
        return;
      }
    }
  }

  std::string_view text_;
  bool newline_tokens_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, SymbolContext& context)
      : tokens_(std::move(tokens)), ctx_(context) {}

  Expression parse_expression_only() {
    Expression e = expr();
    if (peek().kind != TokenKind::End) unexpected(peek());
    return e;
  }

  Expression expr() {
    Expression e = term();
    while (is_symbol("+") || is_symbol("-")) {
      const bool plus = next().text == "+";
      Expression rhs = term();
      e = plus ? e + rhs : e - rhs;
    }
    return e;
  }

  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  const Token& next() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }
  bool is_symbol(const char* s, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::Symbol && t.text == s;
  }
  void expect_symbol(const char* s) {
    if (!is_symbol(s)) fail(std::string("expected '") + s + "'", peek());
    ++pos_;
  }
  std::string expect_ident() {
    if (peek().kind != TokenKind::Ident) fail("expected identifier", peek());
    return next().text;
  }
  [[noreturn]] void fail(const std::string& message, const Token& at) const {
    throw ParseError(message, at.line, at.column);
  }
  [[noreturn]] void unexpected(const Token& t) const {
    if (t.kind == TokenKind::Ident || t.kind == TokenKind::Integer || (t.kind == TokenKind::Symbol && t.text == "("))
      fail("implicit multiplication is not allowed (write '*')", t);
    if (t.kind == TokenKind::End) fail("unexpected end of input", t);
    if (t.kind == TokenKind::Newline) fail("unexpected end of line", t);
    fail("unexpected '" + t.text + "'", t);
  }

  std::size_t position() const { return pos_; }

 private:
  Expression term() {
    Expression e = unary();
    while (is_symbol("*") || is_symbol("/")) {
      const Token& op = next();
      Expression rhs = unary();
      if (op.text == "*") {
        e = e * rhs;
      } else {
        if (rhs.is_zero()) fail("division by an expression that normalizes to zero", op);
        e = e / rhs;
      }
    }
    return e;
  }

  Expression unary() {
    if (is_symbol("-")) {
      ++pos_;
      return -unary();
    }
    return factor();
  }

  Expression factor() {
    Expression b = base();
    if (is_symbol("^")) {
      const Token& caret = next();
      bool negative = false;
      bool parenthesized = false;
      if (is_symbol("(") && is_symbol("-", 1)) {
        pos_ += 2;
        negative = parenthesized = true;
      } else if (is_symbol("-")) {
        ++pos_;
        negative = true;
      }
      if (peek().kind != TokenKind::Integer) fail("exponent must be an integer literal", peek());
      const Token& n = next();
      if (parenthesized) expect_symbol(")");
      if (n.text.size() > 6) fail("exponent too large", n);
      const int k = std::stoi(n.text);
      if (negative && b.is_zero()) fail("zero raised to a negative power", caret);
      b = b.pow(negative ? -k : k);
    }
    return b;
  }

  Expression base() {
    const Token& t = peek();
    if (t.kind == TokenKind::Integer) {
      ++pos_;
      return Expression(Rational(mpz_class(t.text)));
    }
    if (is_symbol("(")) {
      ++pos_;
      Expression e = expr();
      expect_symbol(")");
      return e;
    }
    if (t.kind == TokenKind::Ident) return Expression(atomref());
    unexpected(t);
  }

  std::vector<std::string> arg_list() {
    expect_symbol("(");
    std::vector<std::string> args{expect_ident()};
    while (is_symbol(",")) {
      ++pos_;
      args.push_back(expect_ident());
    }
    expect_symbol(")");
    return args;
  }

  std::vector<std::string> signature_of(const std::string& name, std::size_t arity) {
    if (auto it = ctx_.functions.find(name); it != ctx_.functions.end()) return it->second;
    if (arity == 1) {
      ctx_.functions[name] = {ctx_.default_argument};
      return {ctx_.default_argument};
    }
    return {};
  }

  Atom atomref() {
    const Token& id = next();
    const std::string& name = id.text;

    if (name == "D" && is_symbol("(")) {
      ++pos_;
      const std::string target = expect_ident();
      std::vector<int> index;
      while (is_symbol(",")) {
        ++pos_;
        if (peek().kind != TokenKind::Integer) fail("derivative index must be an integer", peek());
        const Token& n = next();
        if (n.text.size() > 6) fail("derivative index too large", n);
        index.push_back(std::stoi(n.text));
      }
      expect_symbol(")");
      if (index.empty()) fail("unknown derivative notation: D needs at least one index", id);
      if (ctx_.dependents.count(target) && !is_symbol("(")) {
        if (index.size() != 1) fail("unknown derivative notation for jet symbol " + target, id);
        return Atom::jet(target, index[0]);
      }
      std::vector<std::string> args;
      if (is_symbol("(")) {
        args = arg_list();
        ctx_.declare_function(target, args);
      } else {
        args = signature_of(target, index.size());
      }
      if (args.size() != index.size())
        fail("unknown derivative notation: " + std::to_string(index.size()) +
                 " indices for function " + target + " of " + std::to_string(args.size()) +
                 " arguments",
             id);
      return Atom::function(target, std::move(args), std::move(index));
    }

    if (is_symbol("#")) {
      ++pos_;
      if (peek().kind != TokenKind::Integer) fail("jet order must be an integer", peek());
      const Token& n = next();
      if (n.text.size() > 6) fail("jet order too large", n);
      if (ctx_.functions.count(name)) fail("'#' applies to dependent symbols, not function " + name, id);
      ctx_.declare_dependent(name);
      return Atom::jet(name, std::stoi(n.text));
    }

    int primes = 0;
    while (is_symbol("'")) {
      ++pos_;
      ++primes;
    }
    if (primes > 3) fail("unknown derivative notation: more than three primes (use D(f, k))", id);

    if (is_symbol("(")) {
      std::vector<std::string> args = arg_list();
      if (ctx_.dependents.count(name) || ctx_.independents.count(name))
        fail("symbol " + name + " cannot take arguments", id);
      ctx_.declare_function(name, args);
      if (primes > 0 && args.size() != 1)
        fail("unknown derivative notation: primes on a function of several variables", id);
      std::vector<int> index(args.size(), 0);
      if (primes > 0) index[0] = primes;
      return Atom::function(name, std::move(args), std::move(index));
    }

    if (ctx_.independents.count(name)) {
      if (primes > 0) fail("cannot differentiate the independent variable " + name, id);
      return Atom::independent(name);
    }
    if (ctx_.dependents.count(name)) return Atom::jet(name, primes);
    if (auto it = ctx_.functions.find(name); it != ctx_.functions.end()) {
      if (primes > 0 && it->second.size() != 1)
        fail("unknown derivative notation: primes on a function of several variables", id);
      std::vector<int> index(it->second.size(), 0);
      if (primes > 0) index[0] = primes;
      return Atom::function(name, it->second, std::move(index));
    }
    if (primes > 0) {
      auto args = signature_of(name, 1);
      return Atom::function(name, args, {primes});
    }
    return Atom::parameter(name);
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  SymbolContext& ctx_;

};

}  // namespace

Expression parse_expression(std::string_view text, SymbolContext& context) {
  Parser p(Lexer(text, false).tokenize(), context);
  return p.parse_expression_only();
}

Expression parse_expression(std::string_view text) {
  SymbolContext ctx = SymbolContext::standard();
  return parse_expression(text, ctx);
}

namespace {

bool is_separator(const Token& t) {
  return t.kind == TokenKind::Newline || (t.kind == TokenKind::Symbol && t.text == ";");
}

VectorField parse_vf_impl(std::string_view text, SymbolContext context, int max_order) {
  const std::vector<Token> tokens = Lexer(text, true).tokenize();

  // Coordinates are declared before coefficients are parsed, so that a
  // coefficient may mention any coordinate as a jet symbol.
  std::vector<std::string> coords;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    const bool at_start = i == 0 || is_separator(tokens[i - 1]);
    if (at_start && tokens[i].kind == TokenKind::Ident && tokens[i + 1].kind == TokenKind::Symbol &&
        tokens[i + 1].text == ":") {
      if (std::find(coords.begin(), coords.end(), tokens[i].text) != coords.end())
        throw ParseError("duplicate coordinate " + tokens[i].text, tokens[i].line, tokens[i].column);
      coords.push_back(tokens[i].text);
    }
  }
  if (coords.empty()) {
    const Token& t = tokens.front();
    throw ParseError("vector field needs at least one 'coordinate: expression' entry", t.line,
                     t.column);
  }
  context.declare_independent(coords.front());
  context.default_argument = coords.front();
  for (std::size_t i = 1; i < coords.size(); ++i) context.declare_dependent(coords[i]);

  Parser p(tokens, context);
  std::map<std::string, Expression> values;
  while (p.peek().kind != TokenKind::End) {
    if (is_separator(p.peek())) {
      p.next();
      continue;
    }
    if (p.is_symbol("@")) {
      p.next();
      const Token& kw = p.peek();
      const std::string keyword = p.expect_ident();
      do {
        if (p.is_symbol(",")) p.next();
        const std::string name = p.expect_ident();
        if (keyword == "functions") {
          std::vector<std::string> args{context.default_argument};
          if (p.is_symbol("(")) {
            p.next();
            args = {p.expect_ident()};
            while (p.is_symbol(",")) {
              p.next();
              args.push_back(p.expect_ident());
            }
            p.expect_symbol(")");
          }
          context.declare_function(name, args);
        } else if (keyword == "parameters") {
          context.functions.erase(name);
          context.dependents.erase(name);
          context.independents.erase(name);
        } else {
          p.fail("unknown declaration @" + keyword, kw);
        }
      } while (p.is_symbol(","));
      continue;
    }
    const std::string coord = p.expect_ident();
    p.expect_symbol(":");
    Expression value = p.expr();
    if (!is_separator(p.peek()) && p.peek().kind != TokenKind::End) p.unexpected(p.peek());
    values[coord] = std::move(value);
  }

  JetSystem sys(coords.front(), std::vector<std::string>(coords.begin() + 1, coords.end()),
                max_order);
  std::vector<Expression> etas;
  for (std::size_t i = 1; i < coords.size(); ++i) etas.push_back(values[coords[i]]);
  return VectorField(std::move(sys), values[coords.front()], std::move(etas));
}

}  // namespace

VectorField parse_vector_field(std::string_view text, SymbolContext context, int max_order) {
  return parse_vf_impl(text, std::move(context), max_order);
}

VectorField parse_vector_field(std::string_view text) {
  return parse_vf_impl(text, SymbolContext::standard(), 10);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// ----------------------------------------------------------------- printer

namespace {

const SymbolContext& printer_context() {
  static const SymbolContext ctx = SymbolContext::standard();
  return ctx;
}

std::string join_args(const std::vector<std::string>& args) {
  std::string s = "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) s += ",";
    s += args[i];
  }
  return s + ")";
}

std::string monomial_string(const Monomial& m) {
  auto factors = m.factors();
  std::sort(factors.begin(), factors.end(),
            [](const auto& a, const auto& b) { return a.first.canonical_less(b.first); });
  std::string s;
  for (const auto& [a, e] : factors) {
    if (!s.empty()) s += "*";
    s += to_string(a);
    if (e != 1) s += "^" + std::to_string(e);
  }
  return s;
}

}  // namespace

std::string to_string(const Atom& atom) {
  switch (atom.kind()) {
    case AtomKind::Independent:
    case AtomKind::Parameter:
      return atom.name();
    case AtomKind::Jet:
      if (atom.order() == 0 && printer_context().dependents.count(atom.name())) return atom.name();
      return atom.name() + "#" + std::to_string(atom.order());
    case AtomKind::Function: {
      const auto& mi = atom.multi_index();
      if (mi.size() == 1) {
        if (mi[0] <= 3) return atom.name() + std::string(static_cast<std::size_t>(mi[0]), '\'') + join_args(atom.args());
        return "D(" + atom.name() + "," + std::to_string(mi[0]) + ")" + join_args(atom.args());
      }
      if (std::all_of(mi.begin(), mi.end(), [](int k) { return k == 0; }))
        return atom.name() + join_args(atom.args());
      std::string s = "D(" + atom.name();
      for (int k : mi) s += "," + std::to_string(k);
      return s + ")" + join_args(atom.args());
    }
  }
  return atom.name();
}

std::string to_string(const Rational& value) { return value.get_str(); }

std::string to_string(const Polynomial& p) {
  if (p.is_zero()) return "0";
  std::vector<const Term*> terms;
  for (const auto& t : p.terms()) terms.push_back(&t);
  std::sort(terms.begin(), terms.end(), [](const Term* a, const Term* b) {
    return Monomial::canonical_compare(a->monomial, b->monomial) > 0;
  });
  std::string s;
  bool first = true;
  for (const Term* t : terms) {
    const bool negative = t->coefficient < 0;
    const Rational magnitude = abs(t->coefficient);
    if (first)
      s += negative ? "-" : "";
    else
      s += negative ? " - " : " + ";
    first = false;
    if (t->monomial.is_one()) {
      s += to_string(magnitude);
    } else {
      if (magnitude != 1) s += to_string(magnitude) + "*";
      s += monomial_string(t->monomial);
    }
  }
  return s;
}

std::string to_string(const Expression& e) {
  const std::string num = to_string(e.numerator());
  if (e.is_polynomial()) return num;
  std::vector<std::string> factors;
  for (const auto& f : e.denominator_factors()) {
    std::string b = to_string(f.base);
    if (f.base.size() > 1 || f.base.leading().coefficient != 1) b = "(" + b + ")";
    if (f.exponent != 1) b += "^" + std::to_string(f.exponent);
    factors.push_back(std::move(b));
  }
  std::sort(factors.begin(), factors.end());
  std::string den;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (i) den += "*";
    den += factors[i];
  }
  const bool wrap_num = e.numerator().size() > 1;
  return (wrap_num ? "(" + num + ")" : num) + "/" + (factors.size() > 1 ? "(" + den + ")" : den);
}

std::string to_string(const VectorField& field) {
  std::string s;
  const auto coords = field.coordinates();
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (i) s += "; ";
    s += coords[i] + ": " + to_string(field.coefficient(coords[i]));
  }
  return s;
}

}  // namespace symlie
