#include "symlie/family.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>
#include <stdexcept>

#include "symlie/error.hpp"

namespace symlie {

// ------------------------------------------------------------- ODEFamily

void ODEFamily::validate() const {
  if (order < 3) throw std::invalid_argument("family order must be at least 3");
  std::set<std::string> seen{independent, dependent};
  for (const auto& c : coefficients) {
    if (!seen.insert(c.symbol).second)
      throw std::invalid_argument("repeated family symbol " + c.symbol);
    if (c.multiplies < 0 || c.multiplies >= order)
      throw std::invalid_argument("coefficient " + c.symbol + " multiplies y#" +
                                  std::to_string(c.multiplies) + " outside [0, order)");
  }
  if (nonhomogeneous && !seen.insert(*nonhomogeneous).second)
    throw std::invalid_argument("repeated family symbol " + *nonhomogeneous);
}

Expression ODEFamily::residual() const {
  Expression delta(Atom::jet(dependent, order));
  for (const auto& c : coefficients)
    delta += Expression(Atom::jet(c.symbol, 0)) * Expression(Atom::jet(dependent, c.multiplies));
  if (nonhomogeneous) delta += Expression(Atom::jet(*nonhomogeneous, 0));
  return delta;
}

std::vector<std::string> ODEFamily::coefficient_symbols() const {
  std::vector<std::string> out;
  for (const auto& c : coefficients) out.push_back(c.symbol);
  if (nonhomogeneous) out.push_back(*nonhomogeneous);
  return out;
}

JetSystem ODEFamily::system() const {
  std::vector<std::string> deps{dependent};
  for (const auto& s : coefficient_symbols()) deps.push_back(s);
  return JetSystem(independent, std::move(deps), order + 4);
}

Expression ODEFamily::solved_top() const {
  return Expression(Atom::jet(dependent, order)) - residual();
}

ODEFamily ODEFamily::builtin(std::string_view name) {
  ODEFamily fam;
  if (name == "e3nor" || name == "e3nh") {
    fam.order = 3;
    fam.coefficients = {{"a1", 1}, {"a0", 0}};
    if (name == "e3nh") fam.nonhomogeneous = "r";
    return fam;
  }
  auto numbered = [&](std::string_view prefix) -> std::optional<int> {
    if (name.substr(0, prefix.size()) != prefix) return std::nullopt;
    std::string_view digits = name.substr(prefix.size());
    int n = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || digits.empty())
      throw std::invalid_argument("bad family order in " + std::string(name));
    return n;
  };
  if (auto n = numbered("glinode:")) {
    fam.order = *n;
    for (int j = *n - 1; j >= 0; --j) fam.coefficients.push_back({"a" + std::to_string(j), j});
  } else if (auto m = numbered("normal:")) {
    fam.order = *m;
    for (int j = *m - 2; j >= 0; --j) fam.coefficients.push_back({"a" + std::to_string(j), j});
  } else {
    throw std::invalid_argument("unknown family " + std::string(name));
  }
  fam.validate();
  return fam;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

int parse_int(const std::string& text, int line, int column) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw ParseError("expected an integer, found '" + text + "'", line, column);
  return value;
}

bool is_identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

// Splits "key: value" or "key = value"; returns false for blank/comment lines.
bool split_line(const std::string& raw, char sep, std::string& key, std::string& value,
                int line) {
  const std::string text = trim(raw);
  if (text.empty() || text.rfind("//", 0) == 0) return false;
  const auto pos = text.find(sep);
  if (pos == std::string::npos)
    throw ParseError(std::string("expected '") + sep + "'", line,
                     static_cast<int>(raw.find_first_not_of(" \t")) + 1);
  key = trim(std::string_view(text).substr(0, pos));
  value = trim(std::string_view(text).substr(pos + 1));
  return true;
}

}  // namespace

ODEFamily ODEFamily::parse(std::string_view text) {
  ODEFamily fam;
  fam.coefficients.clear();
  bool have_order = false;
  std::istringstream in{std::string(text)};
  std::string raw, key, value;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (!split_line(raw, ':', key, value, line)) continue;
    const int col = static_cast<int>(raw.find(':')) + 2;
    if (key == "order") {
      fam.order = parse_int(value, line, col);
      have_order = true;
    } else if (key == "coeff") {
      const auto at = value.find('@');
      if (at == std::string::npos) throw ParseError("expected 'symbol @ order'", line, col);
      const std::string sym = trim(std::string_view(value).substr(0, at));
      if (!is_identifier(sym)) throw ParseError("bad coefficient symbol '" + sym + "'", line, col);
      fam.coefficients.push_back({sym, parse_int(trim(std::string_view(value).substr(at + 1)),
                                                 line, col)});
    } else if (key == "nonhomogeneous") {
      if (!is_identifier(value)) throw ParseError("bad symbol '" + value + "'", line, col);
      fam.nonhomogeneous = value;
    } else {
      throw ParseError("unknown family key '" + key + "'", line, 1);
    }
  }
  if (!have_order) throw ParseError("family file has no 'order:' line", line + 1, 1);
  try {
    fam.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), line, 1);
  }
  return fam;
}

std::string ODEFamily::to_text() const {
  std::string out = "order: " + std::to_string(order) + "\n";
  for (const auto& c : coefficients)
    out += "coeff: " + c.symbol + " @ " + std::to_string(c.multiplies) + "\n";
  if (nonhomogeneous) out += "nonhomogeneous: " + *nonhomogeneous + "\n";
  return out;
}

SymbolContext family_context(const ODEFamily& family) {
  SymbolContext ctx = SymbolContext::standard();
  ctx.declare_independent(family.independent);
  ctx.default_argument = family.independent;
  ctx.declare_dependent(family.dependent);
  for (const auto& s : family.coefficient_symbols()) ctx.declare_dependent(s);
  return ctx;
}

// -------------------------------------------------------- PointTransform

namespace {

JetSystem transform_system(const PointTransform& t, int max_order) {
  return JetSystem(t.new_independent, {t.new_dependent}, max_order);
}

}  // namespace

std::pair<Expression, Expression> PointTransform::linear_parts() const {
  const Atom w = Atom::jet(new_dependent, 0);
  for (const auto& a : x_of.atoms())
    if (a.is_jet()) throw std::invalid_argument("x may depend only on " + new_independent);
  for (const auto& a : y_of.atoms())
    if (a.is_jet() && a != w)
      throw std::invalid_argument("y may not depend on derivatives of " + new_dependent);
  Expression h = y_of.differentiate(w);
  if (h.contains(w)) throw std::invalid_argument("y is not affine in " + new_dependent);
  Expression g = y_of - h * Expression(w);
  if (h.is_zero()) throw SingularTransform("y does not depend on " + new_dependent);
  if (total_derivative(x_of, transform_system(*this, 12)).is_zero())
    throw SingularTransform("x does not depend on " + new_independent);
  return {h, g};
}

PointTransform PointTransform::parse(std::string_view text) {
  PointTransform t;
  SymbolContext ctx = SymbolContext::standard();
  for (auto& [name, args] : ctx.functions)
    if (args == std::vector<std::string>{"x"}) args = {t.new_independent};
  ctx.default_argument = t.new_independent;
  ctx.declare_independent(t.new_independent);
  ctx.declare_dependent(t.new_dependent);

  std::istringstream in{std::string(text)};
  std::string raw, key, value;
  std::optional<std::pair<std::string, int>> x_text, y_text;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string stripped = trim(raw);
    if (stripped.rfind("param:", 0) == 0) {
      std::string name, val;
      const std::string rest = stripped.substr(6);
      if (!split_line(rest, '=', name, val, line) || !is_identifier(name))
        throw ParseError("expected 'param: name = value'", line, 1);
      Expression v = parse_expression(val, ctx);
      if (!v.is_constant()) throw ParseError("parameter value must be a rational", line, 1);
      t.parameters[name] = v.constant_value();
      continue;
    }
    if (!split_line(raw, '=', key, value, line)) continue;
    if (key == "x")
      x_text = {value, line};
    else if (key == "y")
      y_text = {value, line};
    else
      throw ParseError("unknown transform key '" + key + "'", line, 1);
  }
  if (!x_text || !y_text) throw ParseError("transform needs both 'x =' and 'y =' lines", line + 1, 1);
  auto parse_at = [&](const std::pair<std::string, int>& src) {
    try {
      return parse_expression(src.first, ctx);
    } catch (const ParseError& e) {
      throw ParseError(std::string("in transform: ") + e.what(), src.second, e.column());
    }
  };
  t.x_of = parse_at(*x_text);
  t.y_of = parse_at(*y_text);
  Bindings params;
  for (const auto& [name, value] : t.parameters) params.emplace(Atom::parameter(name), value);
  t.x_of = t.x_of.substitute(params);
  t.y_of = t.y_of.substitute(params);
  try {
    (void)t.linear_parts();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), y_text->second, 1);
  }
  return t;
}

std::string PointTransform::to_text() const {
  std::string out = "x = " + to_string(x_of) + "\ny = " + to_string(y_of) + "\n";
  for (const auto& [name, value] : parameters)
    out += "param: " + name + " = " + to_string(value) + "\n";
  return out;
}

// --------------------------------------------------------------- pullback

namespace {

Expression pullback(const ODEFamily& family, const PointTransform& transform) {
  family.validate();
  (void)transform.linear_parts();
  const JetSystem zsys = transform_system(transform, family.order + 4);
  const Expression dxdz = total_derivative(transform.x_of, zsys);
  const Expression inverse = Expression(1) / dxdz;
  // y^(k) in w-jets: apply (1/X') D_z repeatedly.
  std::vector<Expression> ders{transform.y_of};
  for (int k = 1; k <= family.order; ++k)
    ders.push_back(inverse * total_derivative(ders.back(), zsys));
  Expression pulled = ders[family.order];
  for (const auto& c : family.coefficients)
    pulled += Expression(Atom::jet(c.symbol, 0)) * ders[c.multiplies];
  if (family.nonhomogeneous) pulled += Expression(Atom::jet(*family.nonhomogeneous, 0));
  return pulled;
}

}  // namespace

Expression TransformResult::for_symbol(const ODEFamily& family, const std::string& symbol) const {
  if (family.nonhomogeneous && *family.nonhomogeneous == symbol) return inhomogeneous;
  for (const auto& c : family.coefficients)
    if (c.symbol == symbol) {
      auto it = by_order.find(c.multiplies);
      return it == by_order.end() ? Expression() : it->second;
    }
  throw CoordinateMismatch("family has no coefficient " + symbol);
}

TransformResult transform_equation(const ODEFamily& family, const PointTransform& transform) {
  const Expression pulled = pullback(family, transform);
  TransformResult result;
  Bindings w_to_zero;
  for (int k = 0; k <= family.order; ++k)
    w_to_zero.emplace(Atom::jet(transform.new_dependent, k), Expression());
  result.certificate = pulled.differentiate(Atom::jet(transform.new_dependent, family.order));
  if (result.certificate.is_zero())
    throw SingularTransform("leading coefficient of the transformed equation vanishes");
  std::set<int> allowed;
  for (const auto& c : family.coefficients) allowed.insert(c.multiplies);
  for (int k = 0; k < family.order; ++k) {
    Expression b = pulled.differentiate(Atom::jet(transform.new_dependent, k)) / result.certificate;
    if (!b.is_zero() && !allowed.count(k)) result.obstructions.push_back(k);
    result.by_order.emplace(k, std::move(b));
  }
  result.inhomogeneous = pulled.substitute(w_to_zero) / result.certificate;
  result.inhomogeneous_obstruction = !family.nonhomogeneous && !result.inhomogeneous.is_zero();
  return result;
}

std::map<std::string, Expression> induced_coefficient_action(const ODEFamily& family,
                                                             const PointTransform& transform) {
  const TransformResult r = transform_equation(family, transform);
  std::map<std::string, Expression> out;
  for (const auto& s : family.coefficient_symbols()) out.emplace(s, r.for_symbol(family, s));
  return out;
}

LiftResult lift_to_symmetry(const ODEFamily& family, const PointTransform& transform) {
  LiftResult lift;
  lift.transform = transform;
  const TransformResult r = transform_equation(family, transform);
  for (int k : r.obstructions)
    lift.obstructions.push_back("B" + std::to_string(k) + " = " + to_string(r.by_order.at(k)));
  if (r.inhomogeneous_obstruction)
    lift.obstructions.push_back("inhomogeneous term = " + to_string(r.inhomogeneous));
  if (!lift.obstructions.empty()) return lift;

  for (const auto& s : family.coefficient_symbols()) lift.gamma.emplace(s, r.for_symbol(family, s));
  // The residual in (z, w) with coefficients gamma must divide the
  // pulled-back residual with a w-free quotient.
  Expression transformed(Atom::jet(transform.new_dependent, family.order));
  for (const auto& c : family.coefficients)
    transformed += lift.gamma.at(c.symbol) * Expression(Atom::jet(transform.new_dependent, c.multiplies));
  if (family.nonhomogeneous) transformed += lift.gamma.at(*family.nonhomogeneous);
  lift.multiplier = pullback(family, transform) / transformed;
  bool w_free = true;
  for (const auto& a : lift.multiplier.atoms())
    if (a.is_jet() && a.name() == transform.new_dependent) w_free = false;
  lift.ok = w_free && !lift.multiplier.is_zero();
  if (!lift.ok) lift.obstructions.push_back("pulled-back residual is not a multiple");
  return lift;
}

// --------------------------------------------------------------- symmetry

namespace {

void require_family_coordinates(const VectorField& field, const ODEFamily& family) {
  const JetSystem sys = family.system();
  std::vector<std::string> want{sys.independent};
  want.insert(want.end(), sys.dependents.begin(), sys.dependents.end());
  std::vector<std::string> have = field.coordinates();
  if (have.front() != want.front() ||
      std::set<std::string>(have.begin(), have.end()) != std::set<std::string>(want.begin(), want.end()) ||
      have.size() != want.size()) {
    std::string msg = "vector field coordinates (";
    for (std::size_t i = 0; i < have.size(); ++i) msg += (i ? ", " : "") + have[i];
    msg += ") do not match the family's (";
    for (std::size_t i = 0; i < want.size(); ++i) msg += (i ? ", " : "") + want[i];
    throw CoordinateMismatch(msg + ")");
  }
}

Expression on_shell_action(const VectorField& field, const ODEFamily& family) {
  const Expression applied = field.apply_prolonged(family.residual());
  return applied.substitute(Atom::jet(family.dependent, family.order), family.solved_top());
}

}  // namespace

SymmetryCheck check_symmetry(const VectorField& field, const ODEFamily& family) {
  family.validate();
  require_family_coordinates(field, family);
  SymmetryCheck out;
  out.residue = on_shell_action(field, family);
  out.holds = out.residue.is_zero();
  return out;
}

// ----------------------------------------------------- determining system

namespace {

std::string unknown_name(const std::string& symbol) { return "phi_" + symbol; }

Atom unknown(const std::string& name, const std::vector<std::string>& args) {
  return Atom::function(name, args, std::vector<int>(args.size(), 0));
}

}  // namespace

DeterminingSystem determining_system(const ODEFamily& family) {
  family.validate();
  const JetSystem sys = family.system();
  const std::vector<std::string> xy{family.independent, family.dependent};
  std::vector<std::string> all{family.independent, family.dependent};
  for (const auto& s : family.coefficient_symbols()) all.push_back(s);

  std::vector<Expression> etas{Expression(unknown("eta", xy))};
  for (const auto& s : family.coefficient_symbols())
    etas.emplace_back(unknown(unknown_name(s), all));
  VectorField ansatz(sys, Expression(unknown("xi", xy)), std::move(etas));

  const Expression residue = on_shell_action(ansatz, family);
  const std::set<std::string> coeffs = [&] {
    auto v = family.coefficient_symbols();
    return std::set<std::string>(v.begin(), v.end());
  }();
  auto is_split = [&](const Atom& a) {
    if (!a.is_jet()) return false;
    if (a.name() == family.dependent) return a.order() >= 1 && a.order() < family.order;
    return coeffs.count(a.name()) && a.order() >= 1;
  };
  for (const auto& d : residue.denominator_factors())
    for (const auto& t : d.base.terms())
      for (const auto& [a, e] : t.monomial.factors())
        if (is_split(a)) throw std::logic_error("denominator depends on a splitting variable");

  DeterminingSystem out{family, ansatz, {}};
  const Expression inverse_den = Expression(1) / Expression(residue.expanded_denominator());
  for (auto& [monomial, cofactor] : split_numerator(residue, is_split)) {
    (void)monomial;
    Polynomial primitive = cofactor.scaled(1 / cofactor.content());
    if (primitive.canonical_leading().coefficient < 0) primitive = -primitive;
    out.equations.push_back(Expression(std::move(primitive)) * inverse_den);
  }
  return out;
}

GeneratorVerdict verify_generator(const VectorField& field, const DeterminingSystem& system) {
  require_family_coordinates(field, system.family);
  const JetSystem sys = system.family.system();
  std::set<Atom, AtomIdLess> atoms;
  for (const auto& eq : system.equations) {
    auto a = eq.atoms();
    atoms.insert(a.begin(), a.end());
  }
  Bindings bindings = bind_partials(atoms, "xi", field.xi(), sys);
  auto add = [&](const std::string& name, const Expression& value) {
    Bindings b = bind_partials(atoms, name, value, sys);
    bindings.insert(b.begin(), b.end());
  };
  add("eta", field.coefficient(system.family.dependent));
  for (const auto& s : system.family.coefficient_symbols())
    add(unknown_name(s), field.coefficient(s));

  GeneratorVerdict verdict;
  for (std::size_t i = 0; i < system.equations.size(); ++i)
    if (!system.equations[i].substitute(bindings).is_zero()) verdict.failing.push_back(i);
  verdict.holds = verdict.failing.empty();
  return verdict;
}

// ------------------------------------------------------------------ split

GeneratorSplit split_generator(const VectorField& field,
                               const std::vector<std::string>& zero_functions) {
  std::set<Atom, AtomIdLess> atoms;
  for (const auto& c : field.coordinates()) {
    auto a = field.coefficient(c).atoms();
    atoms.insert(a.begin(), a.end());
  }
  GeneratorSplit out{field, VectorField(field.system()), {}};
  Bindings zero;
  for (const auto& name : zero_functions) {
    bool found = false;
    for (const auto& a : atoms)
      if (a.is_function() && a.name() == name) {
        zero.emplace(a, Expression());
        found = true;
      }
    if (!found) out.warnings.push_back("function " + name + " does not occur in the generator");
  }
  out.x1 = field.substitute(zero);
  out.x2 = field - out.x1;
  return out;
}

// ------------------------------------------------------------- generators

namespace {

JetSystem augmented_system() { return JetSystem("x", {"y", "a1", "a0"}, 10); }

Expression jet(const char* s, int k = 0) { return Expression(Atom::jet(s, k)); }

// F, F', ..., F'''' under the total derivative of `sys`.
std::vector<Expression> derivatives(const Expression& f, const JetSystem& sys, int count) {
  std::vector<Expression> out{f};
  for (int k = 1; k <= count; ++k) out.push_back(total_derivative(out.back(), sys));
  return out;
}

}  // namespace

VectorField x1_generator(const Expression& f, const Expression& k) {
  const JetSystem sys = augmented_system();
  const auto F = derivatives(f, sys, 4);
  const Expression a1 = jet("a1"), a0 = jet("a0"), y = jet("y");
  return VectorField(sys, F[0],
                     {(k + F[1]) * y, -2 * (a1 * F[1] + F[3]),
                      -(3 * a0 * F[1] + a1 * F[2] + F[4])});
}

VectorField x2_generator(const Expression& g) {
  const JetSystem sys = augmented_system();
  const auto G = derivatives(g, sys, 3);
  const Expression a1 = jet("a1"), a0 = jet("a0"), y = jet("y");
  return VectorField(sys, Expression(), {G[0], Expression(), -(a0 * G[0] + a1 * G[1] + G[3]) / y});
}

VectorField e3nor_generator() {
  return x1_generator(Expression(Atom::function("f", "x")), Expression(Atom::parameter("k1"))) +
         x2_generator(Expression(Atom::function("g", "x")));
}

VectorField x0_generator(const Expression& f) {
  const JetSystem sys("x", {"a1", "a0"}, 10);
  const auto F = derivatives(f, sys, 4);
  const Expression a1 = jet("a1"), a0 = jet("a0");
  return VectorField(sys, F[0], {-2 * (a1 * F[1] + F[3]), -(3 * a0 * F[1] + a1 * F[2] + F[4])});
}

VectorField e3nh_generator() {
  const JetSystem sys("x", {"y", "a1", "a0", "r"}, 10);
  const auto J = derivatives(Expression(Atom::function("J", "x")), sys, 4);
  const auto P = derivatives(Expression(Atom::function("P", "x")), sys, 3);
  const Expression k1(Atom::parameter("k1"));
  const Expression a1 = jet("a1"), a0 = jet("a0"), y = jet("y"), r = jet("r");
  const Expression phi4(unknown("phi4", {"x", "y", "a1", "a0", "r"}));
  const Expression c3 =
      -(a0 * P[0] + phi4 + 2 * r * J[1] - r * k1 + a1 * P[1] + P[3]) / y -
      (3 * a0 * J[1] + a1 * J[2] + J[4]);
  return VectorField(sys, J[0],
                     {(k1 + J[1]) * y + P[0], -2 * (a1 * J[1] + J[3]), c3, phi4});
}

}  // namespace symlie
