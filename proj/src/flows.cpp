#include "symlie/flows.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "symlie/error.hpp"
#include "symlie/parse.hpp"

namespace symlie {

namespace {

constexpr double kEscape = 1e12;
constexpr int kMaxSteps = 1 << 20;

std::vector<std::pair<std::string, int>> state_jets(const FlowSpec& spec) {
  if (!spec.jets.empty()) return spec.jets;
  std::vector<std::pair<std::string, int>> out;
  for (const auto& s : spec.field.system().dependents) out.emplace_back(s, 0);
  return out;
}

struct CompiledField {
  std::vector<NumericForm> components;

  void operator()(const std::vector<double>& state, std::vector<double>& out) const {
    for (std::size_t i = 0; i < components.size(); ++i) out[i] = components[i](state);
  }
};

CompiledField compile(const FlowSpec& spec, const std::vector<Atom>& coords) {
  std::unordered_map<Atom, int, AtomHash> slots;
  for (std::size_t i = 0; i < coords.size(); ++i) slots.emplace(coords[i], static_cast<int>(i));
  auto slot_of = [&](const Atom& a) {
    auto it = slots.find(a);
    return it == slots.end() ? -1 : it->second;
  };
  CompiledField f;
  f.components.emplace_back(spec.field.xi(), slot_of);
  for (const auto& [symbol, order] : state_jets(spec))
    for (int k = 0; k <= order; ++k)
      f.components.emplace_back(spec.field.prolonged(symbol, k), slot_of);
  return f;
}

void check_escape(const std::vector<double>& state, double t) {
  for (double v : state)
    if (!std::isfinite(v) || std::abs(v) > kEscape) {
      char buf[80];
      std::snprintf(buf, sizeof buf, "flow escapes before t = %.6g", t);
      throw FiniteTimeEscape(buf);
    }
}

Trajectory rk4(const CompiledField& f, std::vector<double> state, double t_end, int steps) {
  const std::size_t n = state.size();
  const double h = t_end / steps;
  Trajectory out;
  out.steps = steps;
  out.times.push_back(0);
  out.states.push_back(state);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  for (int i = 0; i < steps; ++i) {
    const double t = h * i;
    f(state, k1);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = state[j] + 0.5 * h * k1[j];
    check_escape(tmp, t + h);
    f(tmp, k2);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = state[j] + 0.5 * h * k2[j];
    check_escape(tmp, t + h);
    f(tmp, k3);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = state[j] + h * k3[j];
    check_escape(tmp, t + h);
    f(tmp, k4);
    for (std::size_t j = 0; j < n; ++j) state[j] += h / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
    check_escape(state, t + h);
    out.times.push_back(h * (i + 1));
    out.states.push_back(state);
  }
  return out;
}

double max_error(const std::vector<double>& a, const std::vector<double>& b) {
  double e = 0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, mixed_relative_error(a[i], b[i]));
  return e;
}

Expression x_expr() { return Expression(Atom::independent("x")); }

std::vector<double> derivative_values(const Expression& e, int order, double x) {
  const JetSystem xsys("x", {});
  std::vector<double> out;
  Expression d = e;
  for (int k = 0; k <= order; ++k) {
    out.push_back(d.eval(NumericPoint{{Atom::independent("x"), x}}));
    d = total_derivative(d, xsys);
  }
  return out;
}

}  // namespace

double mixed_relative_error(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::abs(b));
}

std::vector<Atom> flow_coordinates(const FlowSpec& spec) {
  std::vector<Atom> coords{spec.field.system().independent_atom()};
  for (const auto& [symbol, order] : state_jets(spec))
    for (int k = 0; k <= order; ++k) coords.push_back(Atom::jet(symbol, k));
  return coords;
}

std::string Trajectory::to_csv() const {
  std::ostringstream os;
  os << "t";
  for (const auto& c : coordinates) os << "," << c;
  os << "\n";
  char buf[32];
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", times[i]);
    os << buf;
    for (double v : states[i]) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << "," << buf;
    }
    os << "\n";
  }
  return os.str();
}

Trajectory integrate_flow(const FlowSpec& spec) {
  const std::vector<Atom> coords = flow_coordinates(spec);
  if (spec.initial.size() != coords.size())
    throw std::invalid_argument("initial point has " + std::to_string(spec.initial.size()) +
                                " entries, the state has " + std::to_string(coords.size()));
  if (spec.steps != 0 && spec.steps < 100) throw std::invalid_argument("step count must be >= 100");
  if (!(spec.tolerance > 0)) throw std::invalid_argument("tolerance must be positive");
  const CompiledField f = compile(spec, coords);

  int steps = spec.steps ? spec.steps
                         : std::max(100, static_cast<int>(std::ceil(1000 * std::abs(spec.t_end))));
  Trajectory coarse = rk4(f, spec.initial, spec.t_end, steps);
  Trajectory fine = rk4(f, spec.initial, spec.t_end, 2 * steps);
  double err = max_error(coarse.endpoint(), fine.endpoint());
  while (err > spec.tolerance) {
    if (2 * steps >= kMaxSteps) throw Error("step halving did not reach the tolerance");
    steps *= 2;
    coarse = std::move(fine);
    fine = rk4(f, spec.initial, spec.t_end, 2 * steps);
    err = max_error(coarse.endpoint(), fine.endpoint());
  }
  for (const auto& c : coords) fine.coordinates.push_back(to_string(c));
  fine.error_estimate = err;
  return fine;
}

// ---------------------------------------------------------------- fixtures

std::vector<std::string> flow_fixture_names() { return {"translation", "scaling", "projective"}; }

FlowFixture flow_fixture(const std::string& name) {
  if (name == "translation")
    return {name, Expression(1), [](double t, const std::string& v) {
              return Expression(Atom::independent(v)) + Expression(Rational(t));
            }};
  if (name == "scaling")
    return {name, x_expr(), [](double t, const std::string& v) {
              return Expression(Rational(std::exp(t))) * Expression(Atom::independent(v));
            }};
  if (name == "projective")
    return {name, x_expr().pow(2), [](double t, const std::string& v) {
              const Expression x(Atom::independent(v));
              return x / (1 - Expression(Rational(t)) * x);
            }};
  throw std::invalid_argument("unknown flow fixture '" + name +
                              "' (translation, scaling, projective)");
}

// ------------------------------------------------------------------ checks

std::string FlowReport::line() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", max_error);
  return name + " " + (passed ? "pass" : "fail") + " " + buf;
}

std::string LemmaReport::line() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", max_error);
  return std::string("lemma ") + (passed ? "pass" : "fail") + " " + buf;
}

FlowReport verify_flow_formula(const FlowFixture& fixture, double k1, double t,
                               const std::vector<std::pair<double, double>>& grid, double tol) {
  FlowReport rep;
  rep.name = fixture.name;
  const Expression F = fixture.finite(t, "x");
  const Expression dF = total_derivative(F, JetSystem("x", {}));
  FlowSpec spec;
  spec.field = x1_generator(fixture.f, Expression(Rational(k1)));
  spec.jets = {{"y", 0}};
  spec.t_end = t;
  std::size_t evaluated = 0;
  bool within = true;
  for (const auto& [x, y] : grid) {
    FlowPointCheck p;
    p.x = x;
    p.y = y;
    try {
      spec.initial = {x, y};
      p.numeric = integrate_flow(spec).endpoint();
      const NumericPoint at{{Atom::independent("x"), x}};
      p.expected = {F.eval(at), std::exp(k1 * t) * dF.eval(at) * y};
      p.error = max_error(p.numeric, p.expected);
      rep.max_error = std::max(rep.max_error, p.error);
      within = within && p.error <= tol;
      ++evaluated;
    } catch (const FiniteTimeEscape& e) {
      p.skipped = true;
      p.reason = e.what();
    }
    rep.points.push_back(std::move(p));
  }
  rep.passed = within && evaluated > 0;
  return rep;
}

FlowSpec augmented_flow_spec(const FlowFixture& fixture, double k1, const Expression& a1,
                             const Expression& a0, double x0, double y0, double t, int order) {
  FlowSpec spec;
  spec.field = x1_generator(fixture.f, Expression(Rational(k1)));
  spec.jets = {{"y", 0}, {"a1", order}, {"a0", order}};
  spec.initial = {x0, y0};
  for (double v : derivative_values(a1, order, x0)) spec.initial.push_back(v);
  for (double v : derivative_values(a0, order, x0)) spec.initial.push_back(v);
  spec.t_end = t;
  return spec;
}

LemmaReport lemma_consistency_check(const FlowFixture& fixture, double k1, double t,
                                    const Expression& a1, const Expression& a0,
                                    const std::vector<double>& samples, double tol) {
  const ODEFamily family = ODEFamily::builtin("e3nor");
  PointTransform inverse;
  inverse.x_of = fixture.finite(-t, inverse.new_independent);
  const Expression dX = total_derivative(inverse.x_of, JetSystem(inverse.new_independent, {}));
  inverse.y_of = Expression(Rational(std::exp(-k1 * t))) * dX *
                 Expression(Atom::jet(inverse.new_dependent, 0));
  const TransformResult tr = transform_equation(family, inverse);
  const Bindings at_x{{Atom::independent("x"), inverse.x_of}};
  const Bindings coefficients{{Atom::jet("a1", 0), a1.substitute(at_x)},
                              {Atom::jet("a0", 0), a0.substitute(at_x)}};
  const Expression b1 = tr.for_symbol(family, "a1").substitute(coefficients);
  const Expression b0 = tr.for_symbol(family, "a0").substitute(coefficients);
  const Atom z = Atom::independent(inverse.new_independent);

  LemmaReport rep;
  std::size_t evaluated = 0;
  bool within = true;
  for (double x0 : samples) {
    LemmaSample s;
    s.x0 = x0;
    try {
      FlowSpec spec;
      spec.field = x1_generator(fixture.f, Expression(Rational(k1)));
      spec.jets = {{"y", 0}, {"a1", 0}, {"a0", 0}};
      spec.initial = {x0, 1.0, derivative_values(a1, 0, x0)[0], derivative_values(a0, 0, x0)[0]};
      spec.t_end = t;
      const auto end = integrate_flow(spec).endpoint();
      s.x_t = end[0];
      s.a1_flow = end[2];
      s.a0_flow = end[3];
      const NumericPoint at{{z, s.x_t}};
      s.a1_action = b1.eval(at);
      s.a0_action = b0.eval(at);
      s.error = std::max(mixed_relative_error(s.a1_flow, s.a1_action),
                         mixed_relative_error(s.a0_flow, s.a0_action));
      rep.max_error = std::max(rep.max_error, s.error);
      within = within && s.error <= tol;
      ++evaluated;
    } catch (const FiniteTimeEscape& e) {
      s.skipped = true;
      s.reason = e.what();
    }
    rep.samples.push_back(s);
  }
  rep.passed = within && evaluated > 0;
  return rep;
}

double group_property_error(const FlowSpec& spec, double t1, double t2) {
  FlowSpec first = spec;
  first.t_end = t1;
  FlowSpec second = spec;
  second.initial = integrate_flow(first).endpoint();
  second.t_end = t2;
  FlowSpec whole = spec;
  whole.t_end = t1 + t2;
  return max_error(integrate_flow(second).endpoint(), integrate_flow(whole).endpoint());
}

double initial_derivative_error(const FlowSpec& spec, double h) {
  // Fourth-order central stencil at step h; the plain central difference
  // carries an h^2 term that the a-jet components make visible.
  auto endpoint_at = [&](double t) {
    FlowSpec s = spec;
    s.t_end = t;
    s.steps = 100;
    return integrate_flow(s).endpoint();
  };
  const auto p1 = endpoint_at(h), m1 = endpoint_at(-h);
  const auto p2 = endpoint_at(2 * h), m2 = endpoint_at(-2 * h);
  const std::vector<Atom> coords = flow_coordinates(spec);
  const CompiledField f = compile(spec, coords);
  std::vector<double> field(coords.size());
  f(spec.initial, field);
  std::vector<double> difference(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i)
    difference[i] = (8 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12 * h);
  return max_error(difference, field);
}

std::vector<double> invariant_along_flow(const InvariantCandidate& inv, const FlowSpec& spec,
                                         int samples) {
  if (samples < 2) throw std::invalid_argument("at least two samples");
  const Trajectory tr = integrate_flow(spec);
  const std::vector<Atom> coords = flow_coordinates(spec);
  std::vector<double> out;
  const std::size_t last = tr.states.size() - 1;
  for (int i = 0; i < samples; ++i) {
    const std::size_t idx = last * static_cast<std::size_t>(i) / static_cast<std::size_t>(samples - 1);
    NumericPoint p;
    for (std::size_t j = 0; j < coords.size(); ++j) p.emplace(coords[j], tr.states[idx][j]);
    out.push_back(inv.expression.eval(p));
  }
  return out;
}

}  // namespace symlie
