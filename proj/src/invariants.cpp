#include "symlie/invariants.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <memory>
#include <random>
#include <stdexcept>

#include "symlie/error.hpp"
#include "symlie/parse.hpp"

namespace symlie {

namespace {

const JetSystem& coefficient_system() {
  static const JetSystem sys("x", {"a1", "a0"}, 10);
  return sys;
}

// m, m1, m2, ... stand for mu and its derivatives in the displayed formulas.
Expression with_mu(const std::string& text) {
  Bindings b;
  Expression m = mu_expression();
  for (int k = 0; k <= 4; ++k) {
    b.emplace(Atom::parameter(k == 0 ? "m" : "m" + std::to_string(k)), m);
    m = total_derivative(m, coefficient_system());
  }
  return parse_expression(text).substitute(b);
}

}  // namespace

Expression mu_expression() {
  return -2 * Expression(Atom::jet("a0", 0)) + Expression(Atom::jet("a1", 1));
}

std::vector<InvariantCandidate> psi_catalog() {
  InvariantCandidate psi{"psi", with_mu("-4*(9*a1*m^2 + 7*m1^2 - 6*m*m2)^3 / m^8"), 3, ""};
  const std::string first =
      "216*a0^4 - 324*a0^3*a1#1 + 18*a0^2*(9*a1#1^2 + 2*a1*m1) + 9*m^2*m3";
  const std::string second =
      "m1*(28*m1^2 + 9*a1#1*(a1*a1#1 - 4*m2)) - 9*a0*(3*a1#1^3 + 4*a1*a1#1*m1 - 8*m1*m2)";
  InvariantCandidate psi2{"psi2",
                          with_mu("-1/(18*m^4)*(" + first + ") - 1/(18*m^4)*(" + second + ")"), 4,
                          "doubled '+ +' read as '+'; both groups carry -1/(18 mu^4)"};
  return {psi, psi2};
}

InvariantCandidate mu_candidate() { return {"mu", mu_expression(), 1, "relative covariant"}; }

InvariantCandidate invariant_by_name(const std::string& name) {
  if (name == "mu") return mu_candidate();
  for (auto& c : psi_catalog())
    if (c.name == name) return c;
  throw std::invalid_argument("unknown invariant '" + name + "' (psi, psi2, mu)");
}

int coefficient_jet_order(const Expression& e) {
  int order = -1;
  for (const auto& a : e.atoms())
    if (a.is_jet() && (a.name() == "a1" || a.name() == "a0")) order = std::max(order, a.order());
  return order;
}

std::string to_string(GroupTag tag) { return tag == GroupTag::Gc ? "Gc" : "GS"; }

GroupTag parse_group(const std::string& text) {
  std::string lower;
  for (char c : text) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "gc") return GroupTag::Gc;
  if (lower == "gs") return GroupTag::GS;
  throw std::invalid_argument("unknown group '" + text + "' (Gc, GS)");
}

// ------------------------------------------------------------ annihilation

AnnihilationResult annihilation_check(const InvariantCandidate& inv, GroupTag group,
                                      bool include_k1) {
  const int found = coefficient_jet_order(inv.expression);
  if (found >= 0 && found != inv.order)
    throw std::invalid_argument(inv.name + ": declared order " + std::to_string(inv.order) +
                                " but the expression has order " + std::to_string(found));
  const Expression f(Atom::function("f", "x"));
  const Expression k1 = include_k1 ? Expression(Atom::parameter("k1")) : Expression();
  VectorField field = x1_generator(f, k1);
  if (group == GroupTag::GS) field = field + x2_generator(Expression(Atom::function("g", "x")));
  AnnihilationResult out;
  out.residue = field.apply_prolonged(inv.expression);
  out.holds = out.residue.is_zero();
  return out;
}

// ------------------------------------------------------------------ rank

RankReport invariant_count(GroupTag group, int order, int trials, std::uint64_t seed) {
  if (order < 0 || order > 4) throw std::invalid_argument("invariant_count: order must be 0..4");
  if (trials < 3) throw std::invalid_argument("invariant_count: at least 3 trials");
  RankReport rep;
  rep.group = group;
  rep.order = order;

  std::vector<Atom> coords{Atom::independent("x")};
  std::vector<std::string> symbols;
  if (group == GroupTag::GS) symbols.push_back("y");
  symbols.push_back("a1");
  symbols.push_back("a0");
  for (const auto& s : symbols)
    for (int k = 0; k <= order; ++k) coords.push_back(Atom::jet(s, k));
  for (const auto& c : coords) rep.coordinates.push_back(to_string(c));
  rep.dimension = coords.size();

  // f and g range over polynomials of degree <= order + 4. Each trial uses
  // the Taylor basis (x - x0)^i / i! at its own sample x0: same span as the
  // monomials, far better conditioned.
  const Expression x(Atom::independent("x"));
  auto rows_at = [&](const Rational& x0) {
    std::vector<VectorField> fields;
    Expression basis(1);
    for (int i = 0; i <= order + 4; ++i) {
      fields.push_back(x1_generator(basis, Expression()));
      if (group == GroupTag::GS) fields.push_back(x2_generator(basis));
      basis = basis * (x - Expression(x0)) * Expression(Rational(1, i + 1));
    }
    fields.push_back(x1_generator(Expression(), Expression(1)));
    std::vector<std::vector<Expression>> rows;
    for (const auto& field : fields) {
      std::vector<Expression> row{field.xi()};
      for (const auto& s : symbols)
        for (int k = 0; k <= order; ++k) row.push_back(field.prolonged(s, k));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  rep.generators = static_cast<std::size_t>((group == GroupTag::GS ? 2 : 1) * (order + 5) + 1);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> den(1, 4);
  auto draw = [&] {
    const int q = den(rng);
    std::uniform_int_distribution<int> num(-3 * q, 3 * q);
    return Rational(num(rng), q);
  };

  for (int trial = 0; trial < trials; ++trial) {
    for (int attempt = 0;; ++attempt) {
      if (attempt == 100) throw UnstableRank("no admissible sample point after 100 draws");
      std::vector<Rational> point;
      Bindings b;
      for (const auto& c : coords) {
        point.push_back(draw());
        b.emplace(c, Expression(point.back()));
      }
      const auto rows = rows_at(point.front());
      Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(coords.size()));
      bool ok = true;
      try {
        for (std::size_t i = 0; i < rows.size() && ok; ++i)
          for (std::size_t j = 0; j < coords.size(); ++j) {
            const Expression v = rows[i][j].substitute(b);
            if (!v.is_constant()) {
              ok = false;
              break;
            }
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                v.constant_value().get_d();
          }
      } catch (const Error&) {
        ok = false;  // denominator vanished at this point
      }
      if (!ok) continue;
      const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
      std::size_t r = 0;
      if (sv.size() > 0 && sv(0) > 0)
        for (Eigen::Index i = 0; i < sv.size(); ++i)
          if (sv(i) > 1e-8 * sv(0)) ++r;
      rep.trial_ranks.push_back(r);
      rep.samples.push_back(std::move(point));
      break;
    }
  }
  std::vector<std::size_t> sorted = rep.trial_ranks;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end())
    throw UnstableRank("rank differs in every trial");
  rep.rank = sorted.back();
  rep.count = rep.dimension - rep.rank;
  return rep;
}

// -------------------------------------------------------- numeric checks

NumericFunction NumericFunction::exponential() {
  return {"exp", [](int, double z) { return std::exp(z); }};
}

NumericFunction NumericFunction::from_expression(const Expression& e, const std::string& variable) {
  auto derivatives = std::make_shared<std::vector<Expression>>(1, e);
  const JetSystem sys(variable, {});
  const Atom var = Atom::independent(variable);
  return {to_string(e), [derivatives, sys, var](int k, double z) {
            while (static_cast<int>(derivatives->size()) <= k)
              derivatives->push_back(total_derivative(derivatives->back(), sys));
            return (*derivatives)[static_cast<std::size_t>(k)].eval(NumericPoint{{var, z}});
          }};
}

std::string InvarianceReport::line() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", max_deviation);
  return name + " " + (passed ? "pass" : "fail") + " " + buf;
}

namespace {

std::vector<Expression> derivative_chain(const Expression& e, const JetSystem& sys, int order) {
  std::vector<Expression> out{e};
  for (int k = 1; k <= order; ++k) out.push_back(total_derivative(out.back(), sys));
  return out;
}

double relative_deviation(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale == 0) return 0;
  return std::abs(a - b) / scale;
}

constexpr double kMuFloor = 1e-8;

// inv with the a1/a0 jets replaced by derivatives of concrete expressions in x.
Expression compose_concrete(const InvariantCandidate& inv, const Expression& a1,
                            const Expression& a0) {
  const JetSystem xsys("x", {});
  const int order = std::max(inv.order, 1);
  const auto d1 = derivative_chain(a1, xsys, order), d0 = derivative_chain(a0, xsys, order);
  Bindings b;
  for (int k = 0; k <= order; ++k) {
    b.emplace(Atom::jet("a1", k), d1[static_cast<std::size_t>(k)]);
    b.emplace(Atom::jet("a0", k), d0[static_cast<std::size_t>(k)]);
  }
  return inv.expression.substitute(b);
}

}  // namespace

double evaluate_invariant(const InvariantCandidate& inv, const Expression& a1, const Expression& a0,
                          double x) {
  return compose_concrete(inv, a1, a0).eval(NumericPoint{{Atom::independent("x"), x}});
}

InvarianceReport numeric_invariance_check(const InvariantCandidate& inv,
                                          const PointTransform& transform, const Expression& a1,
                                          const Expression& a0,
                                          const std::map<std::string, NumericFunction>& functions,
                                          const std::vector<double>& z_points, double tol) {
  if (!(tol > 0)) throw std::invalid_argument("tolerance must be positive");
  const ODEFamily family = ODEFamily::builtin("e3nor");
  const TransformResult tr = transform_equation(family, transform);
  if (!tr.is_equivalence())
    throw std::invalid_argument("transform does not preserve the normal form");

  const Atom x_atom = Atom::independent("x");
  const Bindings to_z{{x_atom, transform.x_of}};
  const Bindings coefficients{{Atom::jet("a1", 0), a1.substitute(to_z)},
                              {Atom::jet("a0", 0), a0.substitute(to_z)}};
  const JetSystem zsys(transform.new_independent, {});
  const int order = std::max(inv.order, 1);
  const auto b1 = derivative_chain(tr.for_symbol(family, "a1").substitute(coefficients), zsys, order);
  const auto b0 = derivative_chain(tr.for_symbol(family, "a0").substitute(coefficients), zsys, order);
  // Compose before evaluating: the jets of B1, B0 cancel heavily in floating point.
  Bindings jets;
  for (int k = 0; k <= order; ++k) {
    jets.emplace(Atom::jet("a1", k), b1[static_cast<std::size_t>(k)]);
    jets.emplace(Atom::jet("a0", k), b0[static_cast<std::size_t>(k)]);
  }
  const Expression transformed = inv.expression.substitute(jets);
  const Expression mu_transformed = mu_expression().substitute(jets);
  const Expression original = compose_concrete(inv, a1, a0);
  const Expression mu_original = compose_concrete(mu_candidate(), a1, a0);

  InvarianceReport rep;
  rep.name = inv.name;
  const Atom z_atom = Atom::independent(transform.new_independent);
  std::size_t evaluated = 0;
  bool within = true;
  for (double z : z_points) {
    InvarianceSample s;
    s.z = z;
    try {
      NumericPoint p{{z_atom, z}};
      auto bind_functions = [&](const Expression& e) {
        for (const auto& a : e.atoms()) {
          if (!a.is_function() || p.count(a)) continue;
          auto it = functions.find(a.name());
          if (it == functions.end())
            throw MissingBinding("no numeric values for function " + a.name());
          p.emplace(a, it->second.value(a.derivative_count(), z));
        }
      };
      bind_functions(transform.x_of);
      bind_functions(transformed);
      bind_functions(mu_transformed);
      const double x = transform.x_of.eval(p);
      // Psi and Psi2 are singular where mu vanishes on either side.
      const double mu_new = mu_transformed.eval(p);
      const NumericPoint px{{x_atom, x}};
      const double mu_old = mu_original.eval(px);
      if (std::abs(mu_new) < kMuFloor || std::abs(mu_old) < kMuFloor) {
        s.skipped = true;
        s.reason = "mu = 0";
      } else {
        s.transformed = transformed.eval(p);
        s.original = original.eval(px);
        s.deviation = relative_deviation(s.original, s.transformed);
        rep.max_deviation = std::max(rep.max_deviation, s.deviation);
        within = within && s.deviation <= tol;
        ++evaluated;
      }
    } catch (const NearSingularEvaluation& e) {
      s.skipped = true;
      s.reason = e.what();
    }
    rep.samples.push_back(s);
  }
  rep.passed = within && evaluated > 0;
  return rep;
}

}  // namespace symlie
