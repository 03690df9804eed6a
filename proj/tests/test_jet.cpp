#include <random>

#include "doctest.h"
#include "random_trees.hpp"
#include "symlie/error.hpp"
#include "symlie/jet.hpp"
#include "symlie/parse.hpp"

using namespace symlie;

namespace {

JetSystem augmented() { return JetSystem("x", {"y", "a1", "a0"}, 10); }

Expression P(const std::string& text) { return parse_expression(text); }

}  // namespace

TEST_CASE("total derivative") {
  JetSystem sys("x", {"y"}, 10);
  CHECK(total_derivative(P("y"), sys) == P("y#1"));
  CHECK(total_derivative(P("f*y"), sys) == P("f'*y + f*y#1"));
  CHECK(total_derivative(P("x^2*k1"), sys) == P("2*x*k1"));
  CHECK(total_derivative(P("-2*a0 + a1#1"), augmented()) == P("-2*a0#1 + a1#2"));
  // a-jets are constants unless a1, a0 are tracked symbols
  CHECK(total_derivative(P("a1"), sys).is_zero());
}

TEST_CASE("order limit") {
  JetSystem sys("x", {"y"}, 3);
  CHECK_NOTHROW(total_derivative(P("y#2"), sys));
  CHECK_THROWS_AS(total_derivative(P("y#3"), sys), OrderLimit);
}

TEST_CASE("multivariate function atoms follow the chain rule") {
  SymbolContext ctx = SymbolContext::standard();
  Expression phi = parse_expression("phi(x, y, a1)", ctx);
  Expression d = total_derivative(phi, augmented());
  Expression expect = parse_expression(
      "D(phi,1,0,0)(x,y,a1) + D(phi,0,1,0)(x,y,a1)*y#1 + D(phi,0,0,1)(x,y,a1)*a1#1", ctx);
  CHECK(d == expect);
}

TEST_CASE("prolongation examples") {
  JetSystem sys("x", {"y"}, 10);
  VectorField translation(sys, Expression(1), {Expression(0)});
  for (int k = 1; k <= 5; ++k) CHECK(translation.prolonged("y", k).is_zero());

  VectorField v = parse_vector_field("x: f; y: (k1 + f')*y");
  CHECK(v.prolonged("y", 1) == P("k1*y#1 + f''*y"));
  // one more application of the recursion by hand
  CHECK(v.prolonged("y", 2) == P("k1*y#2 + f'''*y + f''*y#1 - f'*y#2"));
}

TEST_CASE("X0 prolonged on the coefficient symbols") {
  VectorField x0 = parse_vector_field(
      "x: f; a1: -2*(a1*f' + f'''); a0: -(3*a0*f' + a1*f'' + D(f,4))");
  VectorField p = prolong(x0, {{"a1", 3}, {"a0", 3}});
  // phi^(1) for a0 by hand: D(phi) - a0#1*f'
  Expression phi0 = P("-(3*a0*f' + a1*f'' + D(f,4))");
  Expression hand = total_derivative(phi0, x0.system()) - P("a0#1*f'");
  CHECK(p.prolonged("a0", 1) == hand);
  CHECK(p.prolonged("a1", 3).contains(Atom::function("f", "x", 6)));
}

TEST_CASE("prolongation is linear") {
  JetSystem sys("x", {"y"}, 10);
  testing::TreeGenerator gen(314u);
  for (int i = 0; i < 10; ++i) {
    VectorField a(sys, gen.tree(2)->build(), {gen.tree(2)->build()});
    VectorField b(sys, gen.tree(2)->build(), {gen.tree(2)->build()});
    const Expression ca = Expression::rational(3, 2), cb = Expression(-2);
    VectorField comb = a.scaled(ca) + b.scaled(cb);
    for (int k = 1; k <= 3; ++k) {
      Expression lhs = comb.prolonged("y", k);
      Expression rhs = ca * a.prolonged("y", k) + cb * b.prolonged("y", k);
      CHECK((lhs - rhs).is_zero());
    }
  }
}

TEST_CASE("bind_function") {
  Expression x(Atom::independent("x"));
  Bindings b = bind_function("f", x.pow(2), 3);
  CHECK(b.at(Atom::function("f", "x", 0)) == x.pow(2));
  CHECK(b.at(Atom::function("f", "x", 1)) == 2 * x);
  CHECK(b.at(Atom::function("f", "x", 2)) == Expression(2));
  CHECK(b.at(Atom::function("f", "x", 3)).is_zero());

  Bindings r = bind_function("f", 1 / (1 - x), 2);
  CHECK(r.at(Atom::function("f", "x", 1)) == 1 / (1 - x).pow(2));
  CHECK(r.at(Atom::function("f", "x", 2)) == 2 / (1 - x).pow(3));

  Bindings z = bind_function("g", Expression(0), 4);
  for (const auto& [atom, value] : z) CHECK(value.is_zero());

  CHECK_THROWS_AS(bind_function("f", P("y#1"), 2), InvalidBinding);
  CHECK_THROWS_AS(bind_function("f", P("g"), 2), InvalidBinding);
  CHECK_THROWS_AS(bind_function("f", P("z"), 2), InvalidBinding);
}

TEST_CASE("total derivative commutes with binding") {
  JetSystem sys("x", {"y"}, 10);
  testing::TreeGenerator gen(2718u);
  std::mt19937 rng(11u);
  std::uniform_int_distribution<int> coef(-3, 3);
  const Atom x = Atom::independent("x");
  const Expression X(x);
  int cases = 0;
  for (int i = 0; i < 30; ++i) {
    Expression e = gen.tree(3)->build();
    Expression fc = coef(rng) + coef(rng) * X + coef(rng) * X.pow(2) + X.pow(3) / (X.pow(2) + 1);
    Expression yc = coef(rng) * X.pow(3) + 1 / (X.pow(2) + 2);
    Bindings bind = bind_function("f", fc, 4);
    Bindings by = bind_jet("y", yc, 4);
    bind.insert(by.begin(), by.end());
    Expression lhs = total_derivative(e, sys).substitute(bind);
    Expression rhs = e.substitute(bind).differentiate(x);
    CHECK((lhs - rhs).is_zero());
    ++cases;
  }
  CHECK(cases >= 20);
}

TEST_CASE("projected generator with g applied to the residual") {
  // V = {f, (k1 + f')y + g} with zero coefficient components; on the solution
  // manifold the prolonged action leaves exactly the terms the a-components
  // must cancel.
  VectorField v = parse_vector_field("x: f; y: (k1 + f')*y + g; a1: 0; a0: 0");
  Expression delta = P("y#3 + a1*y#1 + a0*y");
  Expression applied = v.apply_prolonged(delta);
  Expression onshell = applied.substitute(Atom::jet("y", 3), P("-(a1*y#1 + a0*y)"));
  Expression expect =
      P("2*(a1*f' + f''')*y#1 + (3*a0*f' + a1*f'' + D(f,4))*y + a0*g + a1*g' + g'''");
  CHECK(onshell == expect);
}

TEST_CASE("vector field arithmetic and coordinates") {
  VectorField a = parse_vector_field("x: f; y: y");
  VectorField b = parse_vector_field("x: 1; y: 0");
  CHECK((a - a).is_zero());
  CHECK((a + b).xi() == P("f + 1"));
  VectorField other = parse_vector_field("x: 1; w: 0");
  CHECK_THROWS_AS(a + other, CoordinateMismatch);
  CHECK_THROWS_AS(a.coefficient("w"), CoordinateMismatch);
  // cache shared between copies, values stay equal
  VectorField c = a;
  CHECK(c.prolonged("y", 2) == a.prolonged("y", 2));
}
