#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "symlie/error.hpp"
#include "symlie/invariants.hpp"
#include "symlie/linalg.hpp"

using namespace symlie;
using testing::fixture_transform;

namespace {

Expression P(const std::string& text) { return parse_expression(text); }

// a1, a0 jets bound to concrete expressions in x.
Bindings coefficients(const std::string& a1, const std::string& a0, int order) {
  Bindings b = bind_jet("a1", P(a1), order);
  b.merge(bind_jet("a0", P(a0), order));
  return b;
}

Expression psi2_reading(int sign_third_term, int sign_second_group) {
  // The two-line display with m, m1, ... for mu and its derivatives.
  const JetSystem sys("x", {"a1", "a0"}, 10);
  Bindings mu;
  Expression m = mu_expression();
  for (int k = 0; k <= 3; ++k) {
    mu.emplace(Atom::parameter(k ? "m" + std::to_string(k) : "m"), m);
    m = total_derivative(m, sys);
  }
  const std::string first = "216*a0^4 - 324*a0^3*a1#1 + 18*a0^2*(9*a1#1^2 + 2*a1*m1) + (" +
                            std::to_string(sign_third_term) + ")*9*m^2*m3";
  const std::string second =
      "m1*(28*m1^2 + 9*a1#1*(a1*a1#1 - 4*m2)) - 9*a0*(3*a1#1^3 + 4*a1*a1#1*m1 - 8*m1*m2)";
  return P("-1/(18*m^4)*(" + first + ") + (" + std::to_string(sign_second_group) +
           ")*(-1/(18*m^4))*(" + second + ")")
      .substitute(mu);
}

}  // namespace

TEST_CASE("catalog") {
  const auto cat = psi_catalog();
  REQUIRE(cat.size() == 2);
  CHECK(cat[0].name == "psi");
  CHECK(cat[0].order == 3);
  CHECK(cat[1].name == "psi2");
  CHECK(cat[1].order == 4);
  for (const auto& c : cat) CHECK(coefficient_jet_order(c.expression) == c.order);
  CHECK(mu_expression() == P("-2*a0 + a1#1"));
  CHECK_THROWS_AS(invariant_by_name("psi3"), std::invalid_argument);
}

TEST_CASE("psi on simple data") {
  const Expression psi = invariant_by_name("psi").expression;
  // a1 = x, a0 = 0 gives mu = 1 and psi = -4 (9x)^3.
  CHECK(psi.substitute(coefficients("x", "0", 3)) == P("-2916*x^3"));
  // a1 = x^2, a0 = 0: mu = 2x, mu' = 2, mu'' = 0.
  CHECK(psi.substitute(coefficients("x^2", "0", 3)) ==
        P("-4*(9*x^2*4*x^2 + 7*4)^3 / (2*x)^8"));
  CHECK_THROWS(psi.substitute(coefficients("0", "0", 3)));
  CHECK_THROWS(evaluate_invariant(invariant_by_name("psi"), P("0"), P("0"), 1.0));
}

TEST_CASE("annihilation by the prolonged generator") {
  for (const auto& c : psi_catalog())
    for (bool k1 : {true, false}) {
      const auto r = annihilation_check(c, GroupTag::Gc, k1);
      INFO(c.name << " k1=" << k1 << ": " << to_string(r.residue));
      CHECK(r.holds);
    }
  CHECK(annihilation_check({"one", Expression(1), 0, ""}, GroupTag::Gc).holds);
  CHECK(annihilation_check({"one", Expression(1), 0, ""}, GroupTag::GS).holds);
  // pr X0 (mu) = -3 f' mu by hand.
  const auto r = annihilation_check(mu_candidate(), GroupTag::Gc);
  CHECK_FALSE(r.holds);
  CHECK(r.residue == P("-3*f'*(-2*a0 + a1#1)"));
  // The symmetry pseudo-group moves a0 through g; psi is not invariant there.
  CHECK_FALSE(annihilation_check(invariant_by_name("psi"), GroupTag::GS).holds);
  CHECK_THROWS_AS(annihilation_check({"bad", P("a1#2"), 3, ""}, GroupTag::Gc),
                  std::invalid_argument);
}

TEST_CASE("psi2 sign readings") {
  const InvariantCandidate shipped = invariant_by_name("psi2");
  CHECK(shipped.expression == psi2_reading(1, 1));
  for (int s1 : {1, -1})
    for (int s2 : {1, -1}) {
      const InvariantCandidate reading{"reading", psi2_reading(s1, s2), 4, ""};
      INFO(s1 << " " << s2);
      CHECK(annihilation_check(reading, GroupTag::Gc).holds == (s1 == 1 && s2 == 1));
    }
}

TEST_CASE("invariant counts") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const RankReport c3 = invariant_count(GroupTag::Gc, 3, 5, seed);
    CHECK(c3.dimension == 9);
    CHECK(c3.count == 1);
    const RankReport c4 = invariant_count(GroupTag::Gc, 4, 5, seed);
    CHECK(c4.dimension == 11);
    CHECK(c4.count == 2);
    const RankReport s4 = invariant_count(GroupTag::GS, 4, 5, seed);
    CHECK(s4.dimension == 16);
    CHECK(s4.count == 0);
    for (const auto* rep : {&c3, &c4, &s4}) {
      CHECK(rep->rank <= rep->dimension);
      CHECK(rep->trial_ranks.size() == 5);
      CHECK(rep->samples.size() == 5);
    }
  }
  CHECK(invariant_count(GroupTag::Gc, 2, 3).count == 0);
  CHECK_THROWS_AS(invariant_count(GroupTag::Gc, 5), std::invalid_argument);
  CHECK_THROWS_AS(invariant_count(GroupTag::Gc, 3, 2), std::invalid_argument);
  const RankReport a = invariant_count(GroupTag::Gc, 4, 3, 9), b = invariant_count(GroupTag::Gc, 4, 3, 9);
  CHECK(a.samples == b.samples);
}

TEST_CASE("Taylor and monomial bases give the same exact rank") {
  // Exact rational rank of the prolonged action at one point, both bases.
  const std::vector<Atom> coords{Atom::independent("x"), Atom::jet("a1", 0), Atom::jet("a1", 1),
                                 Atom::jet("a1", 2), Atom::jet("a1", 3), Atom::jet("a0", 0),
                                 Atom::jet("a0", 1), Atom::jet("a0", 2), Atom::jet("a0", 3)};
  const std::vector<Rational> values{Rational(1, 2), 2, -1, Rational(3, 4), 1, -2, Rational(1, 3), 3, -1};
  Bindings at;
  for (std::size_t i = 0; i < coords.size(); ++i) at.emplace(coords[i], Expression(values[i]));
  auto exact_rank = [&](const std::vector<Expression>& fs) {
    RationalMatrix m;
    for (const auto& f : fs) {
      const VectorField v = x1_generator(f, Expression());
      RationalVector row{v.xi().substitute(at).constant_value()};
      for (const char* s : {"a1", "a0"})
        for (int k = 0; k <= 3; ++k) row.push_back(v.prolonged(s, k).substitute(at).constant_value());
      m.push_back(row);
    }
    return rank(m, coords.size());
  };
  std::vector<Expression> monomials, taylor;
  Expression t(1);
  for (int i = 0; i <= 7; ++i) {
    monomials.push_back(P("x").pow(i));
    taylor.push_back(t);
    t = t * (P("x") - Expression(values[0])) * Expression(Rational(1, i + 1));
  }
  CHECK(exact_rank(monomials) == 8);
  CHECK(exact_rank(taylor) == 8);
}

TEST_CASE("numeric invariance under the exponential transform") {
  const PointTransform exp_tr = fixture_transform("transforms/exp.tr");
  const std::map<std::string, NumericFunction> fns{{"f", NumericFunction::exponential()}};
  const std::vector<double> zs{0.0, 0.25, 0.5, 0.75, 1.0};
  const auto psi = numeric_invariance_check(invariant_by_name("psi"), exp_tr, P("x"), P("0"), fns, zs, 1e-9);
  CHECK(psi.passed);
  CHECK(psi.samples.size() == 5);
  CHECK(psi.line().rfind("psi pass ", 0) == 0);
  // psi = -2916 x^3 at x = e^z.
  CHECK(psi.samples[2].original == doctest::Approx(-2916 * std::exp(1.5)).epsilon(1e-12));
  const auto mu = numeric_invariance_check(mu_candidate(), exp_tr, P("x"), P("0"), fns, zs, 1e-9);
  CHECK_FALSE(mu.passed);
  CHECK(mu.line().rfind("mu fail ", 0) == 0);
}

TEST_CASE("numeric invariance on every concrete transform fixture") {
  const std::vector<double> zs{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  const std::map<std::string, NumericFunction> fns{{"f", NumericFunction::exponential()}};
  for (const char* name : {"identity", "translate", "scale", "exp", "mobius"}) {
    const PointTransform tr = fixture_transform(std::string("transforms/") + name + ".tr");
    for (const auto& inv : psi_catalog()) {
      const auto rep = numeric_invariance_check(inv, tr, P("x + x^3/10"), P("x^2/20 - 1/3"), fns, zs, 1e-9);
      INFO(std::string(name) << " " << rep.line());
      CHECK(rep.passed);
      if (std::string(name) == "identity") CHECK(rep.max_deviation == 0);
      // Exact invariance implies the sign of psi is preserved pointwise.
      for (const auto& s : rep.samples)
        if (!s.skipped) CHECK((s.original > 0) == (s.transformed > 0));
    }
  }
}

TEST_CASE("numeric invariance reports degenerate points and bad input") {
  const PointTransform id = fixture_transform("transforms/identity.tr");
  // mu = 1 - 2x vanishes at x = 1/2.
  const auto rep = numeric_invariance_check(invariant_by_name("psi"), id, P("x"), P("x"), {},
                                            {0.0, 0.5, 1.0}, 1e-9);
  CHECK(rep.passed);
  CHECK(rep.samples[1].skipped);
  CHECK_THROWS_AS(numeric_invariance_check(invariant_by_name("psi"), id, P("x"), P("0"), {}, {0.0}, 0),
                  std::invalid_argument);
  const PointTransform generic = fixture_transform("transforms/generic.tr");
  CHECK_THROWS_AS(numeric_invariance_check(invariant_by_name("psi"), generic, P("x"), P("0"), {},
                                           {0.0}, 1e-9),
                  std::invalid_argument);
}

TEST_CASE("numeric functions") {
  const NumericFunction e = NumericFunction::exponential();
  CHECK(e.value(3, 1.0) == doctest::Approx(std::exp(1.0)));
  Expression z(Atom::independent("z"));
  const NumericFunction m = NumericFunction::from_expression((2 * z + 1) / (z + 3));
  CHECK(m.value(0, 1.0) == doctest::Approx(0.75));
  CHECK(m.value(1, 1.0) == doctest::Approx(5.0 / 16));
  CHECK(m.value(2, 1.0) == doctest::Approx(-10.0 / 64));
}

TEST_CASE("group tags") {
  CHECK(parse_group("gc") == GroupTag::Gc);
  CHECK(parse_group("GS") == GroupTag::GS);
  CHECK(to_string(GroupTag::GS) == "GS");
  CHECK_THROWS_AS(parse_group("G"), std::invalid_argument);
}
