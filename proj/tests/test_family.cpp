#include "doctest.h"
#include "fixtures.hpp"
#include "symlie/error.hpp"
#include "symlie/family.hpp"

using namespace symlie;
using testing::fixture_field;
using testing::fixture_text;
using testing::fixture_transform;

namespace {

Expression P(const std::string& text) { return parse_expression(text); }

// Expression in z-atoms, with one-variable functions of z.
Expression Z(const std::string& text) {
  SymbolContext ctx = SymbolContext::standard();
  for (auto& [name, args] : ctx.functions) args = {"z"};
  ctx.default_argument = "z";
  return parse_expression(text, ctx);
}

// Replaces every derivative of f(z) by the symbol E, i.e. f = exp(z).
Expression as_exponential(const Expression& e) {
  Bindings b;
  for (const auto& a : e.atoms())
    if (a.is_function() && a.name() == "f") b.emplace(a, Expression(Atom::parameter("E")));
  return e.substitute(b);
}

}  // namespace

TEST_CASE("residuals") {
  CHECK(ODEFamily::builtin("e3nor").residual() == P("y#3 + a1*y#1 + a0*y"));
  CHECK(ODEFamily::builtin("e3nh").residual() == P("y#3 + a1*y#1 + a0*y + r"));
  CHECK(ODEFamily::builtin("glinode:5").residual() ==
        P("y#5 + a4*y#4 + a3*y#3 + a2*y#2 + a1*y#1 + a0*y"));
  CHECK(ODEFamily::builtin("normal:4").residual() == P("y#4 + a2*y#2 + a1*y#1 + a0*y"));
  CHECK_THROWS(ODEFamily::builtin("glinode:2"));
  CHECK_THROWS(ODEFamily::builtin("cubic"));
}

TEST_CASE("family files") {
  ODEFamily fam = ODEFamily::parse(fixture_text("families/e3nh.fam"));
  CHECK(fam.residual() == ODEFamily::builtin("e3nh").residual());
  CHECK(ODEFamily::parse(fam.to_text()).to_text() == fam.to_text());
  CHECK_THROWS_AS(ODEFamily::parse("order: 3\ncoeff a1 @ 1\n"), ParseError);
  CHECK_THROWS_AS(ODEFamily::parse("coeff: a1 @ 1\n"), ParseError);
  CHECK_THROWS_AS(ODEFamily::parse("order: 3\ncoeff: a1 @ 1\ncoeff: a1 @ 0\n"), ParseError);
  CHECK_THROWS_AS(ODEFamily::parse("order: 3\ncoeff: a1 @ 3\n"), ParseError);
  try {
    (void)ODEFamily::parse("order: 3\n\ncolor: a1\n");
    FAIL("expected error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("generator templates match the fixtures") {
  CHECK(fixture_field("generators/x3ode.vf") == e3nor_generator());
  CHECK(fixture_field("generators/xe3nh.vf") == e3nh_generator());
  Expression f(Atom::function("f", "x")), k1(Atom::parameter("k1")), g(Atom::function("g", "x"));
  CHECK(fixture_field("generators/x1.vf") == x1_generator(f, k1));
  CHECK(fixture_field("generators/x2.vf") == x2_generator(g));
  CHECK(fixture_field("generators/x0.vf") == x0_generator(f));
}

TEST_CASE("symmetry of the normal-form generator") {
  ODEFamily fam = ODEFamily::builtin("e3nor");
  SymmetryCheck c = check_symmetry(e3nor_generator(), fam);
  CHECK(c.holds);
  CHECK(c.residue.is_zero());
  CHECK(check_symmetry(VectorField(fam.system()), fam).holds);

  SymmetryCheck flipped = check_symmetry(fixture_field("mutants/c4_sign.vf"), fam);
  CHECK_FALSE(flipped.holds);
  // Oracle: flipping the a0 component changes the residue by 2 y phi_a0.
  Expression c4 = e3nor_generator().coefficient("a0");
  CHECK(flipped.residue == -2 * P("y") * c4);

  CHECK_THROWS_AS(check_symmetry(parse_vector_field("x: 1; y: 0"), fam), CoordinateMismatch);
}

TEST_CASE("symmetry of the nonhomogeneous generator with formal phi4") {
  SymmetryCheck c = check_symmetry(e3nh_generator(), ODEFamily::builtin("e3nh"));
  CHECK(c.holds);
  // Without the phi4 share in the a0 component the residue is exactly phi4.
  VectorField x = e3nh_generator();
  SymbolContext ctx = SymbolContext::standard();
  Expression phi4 = parse_expression("phi4(x, y, a1, a0, r)", ctx);
  std::vector<Expression> etas = x.etas();
  etas[2] = etas[2] + phi4 / P("y");
  SymmetryCheck broken = check_symmetry(VectorField(x.system(), x.xi(), etas), ODEFamily::builtin("e3nh"));
  CHECK(broken.residue == phi4);
}

TEST_CASE("pullback: identity and translations leave coefficients alone") {
  ODEFamily fam = ODEFamily::builtin("e3nor");
  TransformResult id = transform_equation(fam, fixture_transform("transforms/identity.tr"));
  CHECK(id.by_order.at(2).is_zero());
  CHECK(id.by_order.at(1) == P("a1"));
  CHECK(id.by_order.at(0) == P("a0"));
  CHECK(id.certificate == Expression(1));
  CHECK(id.is_equivalence());

  auto shifted = induced_coefficient_action(fam, fixture_transform("transforms/translate.tr"));
  CHECK(shifted.at("a1") == P("a1"));
  CHECK(shifted.at("a0") == P("a0"));

  // x = 2z, y = 4w: y' = 2 w'/... by hand: y^(k) = 4 w^(k) / 2^k
  TransformResult s = transform_equation(fam, fixture_transform("transforms/scale.tr"));
  CHECK(s.certificate == Expression::rational(1, 2));
  CHECK(s.by_order.at(1) == 4 * P("a1"));
  CHECK(s.by_order.at(0) == 8 * P("a0"));
}

TEST_CASE("pullback: B2 obstruction and its vanishing") {
  ODEFamily fam = ODEFamily::builtin("e3nh");
  TransformResult generic = transform_equation(fam, fixture_transform("transforms/generic.tr"));
  CHECK(generic.by_order.at(2) == Z("3*(h'/h - f''/f')"));
  CHECK_FALSE(generic.is_equivalence());
  REQUIRE(generic.obstructions.size() == 1);
  CHECK(generic.obstructions[0] == 2);
  CHECK(generic.certificate == Z("h/f'^3"));

  TransformResult fixed = transform_equation(fam, fixture_transform("transforms/lambda_fprime.tr"));
  CHECK(fixed.by_order.at(2).is_zero());
  CHECK(fixed.is_equivalence());

  LiftResult lift = lift_to_symmetry(fam, fixture_transform("transforms/generic.tr"));
  CHECK_FALSE(lift.ok);
  REQUIRE(lift.obstructions.size() == 1);
  CHECK(lift.obstructions[0].rfind("B2 = ", 0) == 0);
}

TEST_CASE("pullback: exponential change of variables") {
  ODEFamily fam = ODEFamily::builtin("e3nor");
  auto b = induced_coefficient_action(fam, fixture_transform("transforms/exp.tr"));
  // By hand with x = e^z, y = e^z w: y''' = e^{-2z}(w''' - w').
  CHECK(as_exponential(b.at("a1")) == P("a1*E^2 - 1"));
  CHECK(as_exponential(b.at("a0")) == P("a1*E^2 + a0*E^3"));

  LiftResult lift = lift_to_symmetry(fam, fixture_transform("transforms/exp.tr"));
  CHECK(lift.ok);
  CHECK(as_exponential(lift.multiplier) == P("E^(-2)"));
  LiftResult id = lift_to_symmetry(fam, fixture_transform("transforms/identity.tr"));
  CHECK(id.ok);
  CHECK(id.gamma.at("a1") == P("a1"));
  CHECK(id.multiplier == Expression(1));

  // A g-term makes the homogeneous family inhomogeneous.
  PointTransform shifted = PointTransform::parse("x = z\ny = w + z^3\n");
  TransformResult r = transform_equation(fam, shifted);
  CHECK(r.inhomogeneous_obstruction);
}

TEST_CASE("pullback composes") {
  // General third-order family so that intermediate equations stay inside it.
  ODEFamily fam = ODEFamily::parse(fixture_text("families/glin3nh.fam"));
  // Stage 1: x -> z. Stage 2: z -> s, written with (s, v).
  auto in_s = [](const std::string& text) {
    PointTransform t = PointTransform::parse(text);
    Bindings rename{{Atom::independent("z"), Expression(Atom::independent("s"))},
                    {Atom::jet("w", 0), Expression(Atom::jet("v", 0))}};
    t.x_of = t.x_of.substitute(rename);
    t.y_of = t.y_of.substitute(rename);
    t.new_independent = "s";
    t.new_dependent = "v";
    return t;
  };
  PointTransform t1 = PointTransform::parse("x = z^2 + z\ny = (z + 1)*w + z\n");
  PointTransform t2 = in_s("x = 3*z - 1\ny = z^2*w + 1\n");
  PointTransform composite = in_s("x = (3*z - 1)^2 + 3*z - 1\ny = (3*z)*(z^2*w + 1) + 3*z - 1\n");

  // Original coefficients renamed to c* so stage-1 values can be bound to the
  // stage-2 symbols without a recursive binding.
  Bindings original;
  for (const auto& sym : fam.coefficient_symbols())
    original.emplace(Atom::jet(sym, 0), Expression(Atom::jet("c" + sym, 0)));
  auto first = induced_coefficient_action(fam, t1);
  auto second = induced_coefficient_action(fam, t2);
  auto direct = induced_coefficient_action(fam, composite);

  Bindings into;
  for (const auto& [sym, value] : first)
    into.emplace(Atom::jet(sym, 0), value.substitute(original).substitute(
                                     Atom::independent("z"), 3 * Expression(Atom::independent("s")) - 1));
  for (const auto& [sym, value] : second) {
    CAPTURE(sym);
    CHECK((value.substitute(into) - direct.at(sym).substitute(original)).is_zero());
  }
}

TEST_CASE("transform files") {
  PointTransform t = fixture_transform("transforms/exp.tr");
  CHECK(t.parameters.at("lambda") == 1);
  CHECK(t.y_of == Z("f'*w"));
  CHECK(PointTransform::parse(t.to_text()).y_of == t.y_of);
  CHECK_THROWS_AS(PointTransform::parse("x = z\n"), ParseError);
  CHECK_THROWS_AS(PointTransform::parse("x = z\ny = w^2\n"), ParseError);
  CHECK_THROWS_AS(PointTransform::parse("x = 1\ny = w\n"), SingularTransform);
  CHECK_THROWS_AS(PointTransform::parse("x = z\ny = z\n"), SingularTransform);
}

TEST_CASE("determining system of the normal form") {
  DeterminingSystem sys = determining_system(ODEFamily::builtin("e3nor"));
  CHECK(sys.equations.size() >= 3);
  CHECK(verify_generator(e3nor_generator(), sys).holds);
  CHECK(verify_generator(VectorField(sys.ansatz.system()), sys).holds);
  for (const char* mutant : {"mutants/c4_sign.vf", "mutants/free_h.vf", "mutants/a1_factor.vf",
                             "mutants/missing_f4.vf"}) {
    CAPTURE(mutant);
    GeneratorVerdict v = verify_generator(fixture_field(mutant), sys);
    CHECK_FALSE(v.holds);
    CHECK_FALSE(v.failing.empty());
  }
  // free h breaks the system, h = k1 + f' repairs it
  VectorField free_h = fixture_field("mutants/free_h.vf");
  Bindings fix;
  SymbolContext ctx = SymbolContext::standard();
  fix.emplace(Atom::function("h", "x"), parse_expression("k1 + f'", ctx));
  CHECK(verify_generator(free_h.substitute(fix), sys).holds);
}

TEST_CASE("determining system of the nonhomogeneous family") {
  DeterminingSystem sys = determining_system(ODEFamily::builtin("e3nh"));
  CHECK(verify_generator(e3nh_generator(), sys).holds);
}

TEST_CASE("splitting the generator") {
  GeneratorSplit s = split_generator(e3nor_generator());
  Expression f(Atom::function("f", "x")), k1(Atom::parameter("k1")), g(Atom::function("g", "x"));
  CHECK(s.x1 == x1_generator(f, k1));
  CHECK(s.x2 == x2_generator(g));
  CHECK(s.x1 + s.x2 == e3nor_generator());
  CHECK(s.warnings.empty());

  GeneratorSplit none = split_generator(e3nor_generator(), {});
  CHECK(none.x1 == e3nor_generator());
  CHECK(none.x2.is_zero());

  GeneratorSplit nh = split_generator(e3nh_generator(), {});
  CHECK(nh.x1 == e3nh_generator());
  GeneratorSplit absent = split_generator(e3nh_generator(), {"g"});
  CHECK(absent.warnings.size() == 1);
  CHECK(absent.x1 == e3nh_generator());
}
