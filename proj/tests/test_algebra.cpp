#include <random>

#include "doctest.h"
#include "symlie/algebra.hpp"
#include "symlie/error.hpp"
#include "symlie/family.hpp"
#include "symlie/parse.hpp"

using namespace symlie;

namespace {

Expression P(const std::string& text) { return parse_expression(text); }

// Small integer polynomials in x, coefficients low degree first. Used as an
// oracle independent of the expression engine.
using IntPoly = std::vector<long>;

IntPoly d(const IntPoly& p) {
  IntPoly out;
  for (std::size_t i = 1; i < p.size(); ++i) out.push_back(static_cast<long>(i) * p[i]);
  return out;
}

IntPoly mul(const IntPoly& a, const IntPoly& b) {
  if (a.empty() || b.empty()) return {};
  IntPoly out(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

IntPoly sub(IntPoly a, const IntPoly& b) {
  if (a.size() < b.size()) a.resize(b.size(), 0);
  for (std::size_t i = 0; i < b.size(); ++i) a[i] -= b[i];
  return a;
}

Expression to_expr(const IntPoly& p) {
  Expression e;
  const Expression x(Atom::independent("x"));
  for (std::size_t i = 0; i < p.size(); ++i) e += Expression(p[i]) * x.pow(static_cast<int>(i));
  return e;
}

RationalVector vec(std::initializer_list<long> v) {
  RationalVector out;
  for (long c : v) out.emplace_back(c);
  return out;
}

// Structure constants after the change of basis f_i = sum_j m[i][j] e_j.
StructureConstants rebase(const StructureConstants& sc, const RationalMatrix& m) {
  const std::size_t n = sc.dimension();
  StructureConstants out(std::vector<std::string>(n, "f"));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      out.set(i, j, *coordinates_in(m, sc.bracket(m[i], m[j])));
  return out;
}

RationalMatrix random_invertible(std::size_t n, std::mt19937& rng) {
  std::uniform_int_distribution<long> coef(-2, 2);
  for (;;) {
    RationalMatrix m(n, RationalVector(n));
    for (auto& row : m)
      for (auto& c : row) c = coef(rng);
    if (rank(m, n) == n) return m;
  }
}

}  // namespace

TEST_CASE("bracket of coordinate fields") {
  const JetSystem sys("x", {"y"});
  const VectorField dx(sys, Expression(1), {Expression()});
  const VectorField xdy(sys, Expression(), {P("x")});
  // [d/dx, x d/dy] = d/dy
  CHECK(bracket(dx, xdy) == VectorField(sys, Expression(), {Expression(1)}));
  CHECK(bracket(xdy, dx) == VectorField(sys, Expression(), {Expression(-1)}));
  const VectorField other(JetSystem("t", {"y"}), Expression(1), {Expression()});
  CHECK_THROWS_AS(bracket(dx, other), CoordinateMismatch);
}

TEST_CASE("bracket properties on random generator combinations") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<long> coef(-3, 3);
  auto random_poly = [&] {
    IntPoly p(4);
    for (auto& c : p) c = coef(rng);
    return p;
  };
  auto random_field = [&] {
    return x1_generator(to_expr(random_poly()), Expression(coef(rng))) +
           x2_generator(to_expr(random_poly()));
  };
  for (int trial = 0; trial < 10; ++trial) {
    const VectorField a = random_field(), b = random_field(), c = random_field();
    const Expression s(coef(rng));
    CHECK(bracket(a, b) == VectorField(a.system()) - bracket(b, a));
    CHECK(bracket(a + b.scaled(s), c) == bracket(a, c) + bracket(b, c).scaled(s));
    CHECK((bracket(bracket(a, b), c) + bracket(bracket(b, c), a) + bracket(bracket(c, a), b))
              .is_zero());
  }
}

TEST_CASE("commutation relations with formal functions") {
  for (const auto& id : relation_ids()) {
    const RelationCheck r = verify_relation(id);
    INFO(id << ": " << to_string(r.residue));
    CHECK(r.holds);
  }
  CHECK_THROWS_AS(verify_relation("x2-x1"), std::invalid_argument);
}

TEST_CASE("polynomial brackets match the integer oracle") {
  // [X1(f,0), X1(g,0)] = X1(f g' - g f', 0), [X1(f,0), X2(g)] = X2(f g' - g f'), X2 abelian.
  std::mt19937 rng(11);
  std::uniform_int_distribution<long> coef(-4, 4);
  for (int trial = 0; trial < 6; ++trial) {
    IntPoly f(3), g(3);
    for (auto& c : f) c = coef(rng);
    for (auto& c : g) c = coef(rng);
    const IntPoly w = sub(mul(f, d(g)), mul(g, d(f)));
    CHECK(bracket(x1_generator(to_expr(f), Expression()), x1_generator(to_expr(g), Expression())) ==
          x1_generator(to_expr(w), Expression()));
    CHECK(bracket(x1_generator(to_expr(f), Expression()), x2_generator(to_expr(g))) ==
          x2_generator(to_expr(w)));
    CHECK(bracket(x2_generator(to_expr(f)), x2_generator(to_expr(g))).is_zero());
  }
}

TEST_CASE("deg2 snapshot structure constants") {
  std::vector<std::string> labels;
  const StructureConstants sc = truncate(snapshot("deg2", labels), labels);
  REQUIRE(sc.dimension() == 6);
  CHECK(labels.front() == "X1(1,0)");
  // Oracle: f g' - g f' on monomials x^i, x^j is (j - i) x^(i+j-1); X2 parts are abelian.
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      RationalVector expected(6, 0);
      const long di = static_cast<long>(i % 3), dj = static_cast<long>(j % 3);
      const long deg = di + dj - 1;
      const bool both_x2 = i >= 3 && j >= 3;
      if (!both_x2 && deg >= 0 && deg <= 2)
        expected[(i < 3 && j < 3 ? 0 : 3) + static_cast<std::size_t>(deg)] = dj - di;
      INFO(labels[i] << " " << labels[j]);
      CHECK(sc.get(i, j) == expected);
    }
  CHECK(sc.get(0, 1) == vec({1, 0, 0, 0, 0, 0}));
  CHECK(sc.get(0, 2) == vec({0, 2, 0, 0, 0, 0}));
  CHECK(sc.get(1, 2) == vec({0, 0, 1, 0, 0, 0}));
  CHECK_NOTHROW(sc.check_jacobi());

  // ad X1(x,0) grades by degree - 1.
  const RationalMatrix ad = sc.ad(vec({0, 1, 0, 0, 0, 0}));
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j)
      CHECK(ad[i][j] == (i == j ? Rational(static_cast<long>(i % 3) - 1) : Rational(0)));
}

TEST_CASE("halves of the snapshot") {
  std::vector<std::string> labels;
  const StructureConstants x2 = truncate(snapshot("x2deg2", labels), labels);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(is_zero(x2.get(i, j)));
  const StructureConstants x1 = truncate(snapshot("x1deg2", labels), labels);
  CHECK(x1.get(0, 2) == vec({0, 2, 0}));
}

TEST_CASE("truncation failures") {
  std::vector<std::string> labels;
  CHECK_THROWS_AS(truncate(snapshot("deg3", labels), labels), ClosureViolation);
  CHECK_THROWS_AS(snapshot("deg4", labels), std::invalid_argument);
  CHECK_THROWS_AS(truncate({x1_generator(P("x"), Expression()), x1_generator(P("2*x"), Expression())}),
                  RankError);
  CHECK_THROWS_AS(truncate({x2_generator(P("x")), x2_generator(P("1")),
                            x2_generator(P("3 - 2*x"))}),
                  RankError);
}

TEST_CASE("express_in_span") {
  const std::vector<VectorField> basis{x2_generator(P("1")), x2_generator(P("x"))};
  CHECK(express_in_span(x2_generator(P("3 - x/2")), basis) ==
        std::optional<RationalVector>(RationalVector{Rational(3), Rational(-1, 2)}));
  CHECK_FALSE(express_in_span(x2_generator(P("x^2")), basis).has_value());
}

TEST_CASE("structure constant text round trip") {
  std::vector<std::string> labels;
  const StructureConstants sc = truncate(snapshot("deg2", labels), labels);
  const std::string text = sc.to_text();
  CHECK(text.rfind("labels: X1(1,0) X1(x,0)", 0) == 0);
  CHECK(text.find("[0,2] -> {1: 2}") != std::string::npos);
  CHECK(StructureConstants::parse(text) == sc);
  CHECK_THROWS_AS(StructureConstants::parse("[0,1] -> {0: 1}"), ParseError);
  CHECK_THROWS_AS(StructureConstants::parse("labels: a b\n[0,2] -> {0: 1}"), ParseError);
  CHECK_THROWS_AS(StructureConstants::parse("labels: a b\n[0,1] -> {0: x}"), ParseError);
}

TEST_CASE("Jacobi violation is reported") {
  // [a,b] = c, [b,c] = a, [c,a] = a breaks Jacobi.
  StructureConstants sc({"a", "b", "c"});
  sc.set(0, 1, vec({0, 0, 1}));
  sc.set(1, 2, vec({1, 0, 0}));
  sc.set(2, 0, vec({1, 0, 0}));
  CHECK_THROWS_AS(sc.check_jacobi(), JacobiViolation);
  CHECK_THROWS_AS(levi_report(sc), JacobiViolation);
}

TEST_CASE("Levi decomposition of deg2") {
  std::vector<std::string> labels;
  const LeviReport rep = levi_report(truncate(snapshot("deg2", labels), labels));
  CHECK(rep.dimension == 6);
  CHECK(rep.derived_series == std::vector<std::size_t>{6});
  CHECK(rep.radical_indices == std::vector<std::size_t>{3, 4, 5});
  CHECK(rep.radical_derived_series == std::vector<std::size_t>{3, 0});
  CHECK(rep.radical_is_ideal);
  CHECK(rep.complement.size() == 3);
  CHECK(rep.complement_is_subalgebra);
  CHECK(rep.complement_killing_rank == 3);
  CHECK(rep.complement_semisimple);
  CHECK(rep.complement_radical_in_radical);
  const std::string text = rep.to_text(labels);
  CHECK(text.find("radical basis: X2(1) X2(x) X2(x^2)") != std::string::npos);
  CHECK(text.find("complement semisimple: yes") != std::string::npos);
}

TEST_CASE("Levi decomposition of small algebras") {
  std::vector<std::string> labels;
  const LeviReport sl2 = levi_report(truncate(snapshot("x1deg2", labels), labels));
  CHECK(sl2.radical.empty());
  CHECK(sl2.complement_killing_rank == 3);
  const LeviReport abelian = levi_report(truncate(snapshot("x2deg2", labels), labels));
  CHECK(abelian.radical.size() == 3);
  CHECK(abelian.complement.empty());
  CHECK(abelian.derived_series == std::vector<std::size_t>{3, 0});
}

TEST_CASE("Levi complement survives a change of basis") {
  std::vector<std::string> labels;
  const StructureConstants sc = truncate(snapshot("deg2", labels), labels);
  std::mt19937 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const StructureConstants twisted = rebase(sc, random_invertible(6, rng));
    CHECK_NOTHROW(twisted.check_jacobi());
    const LeviReport rep = levi_report(twisted);
    CHECK(rep.radical.size() == 3);
    CHECK(rep.radical_derived_series == std::vector<std::size_t>{3, 0});
    CHECK(rep.complement.size() == 3);
    CHECK(rep.complement_is_subalgebra);
    CHECK(rep.complement_semisimple);
  }
}

TEST_CASE("Levi complement needs a correction through a non-abelian radical") {
  // sl2 = <e,h,f> acting on V = <v1,v2> plus a central z with [v1,v2] = z
  // (Heisenberg radical). Twisting the basis makes the naive complement fail.
  StructureConstants sc({"h", "e", "f", "v1", "v2", "z"});
  sc.set(0, 1, vec({0, 2, 0, 0, 0, 0}));
  sc.set(0, 2, vec({0, 0, -2, 0, 0, 0}));
  sc.set(1, 2, vec({1, 0, 0, 0, 0, 0}));
  sc.set(0, 3, vec({0, 0, 0, 1, 0, 0}));
  sc.set(0, 4, vec({0, 0, 0, 0, -1, 0}));
  sc.set(1, 4, vec({0, 0, 0, 1, 0, 0}));
  sc.set(2, 3, vec({0, 0, 0, 0, 1, 0}));
  sc.set(3, 4, vec({0, 0, 0, 0, 0, 1}));
  REQUIRE_NOTHROW(sc.check_jacobi());
  const LeviReport plain = levi_report(sc);
  CHECK(plain.radical.size() == 3);
  CHECK(plain.radical_derived_series == std::vector<std::size_t>{3, 1, 0});
  CHECK(plain.complement_semisimple);
  std::mt19937 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const LeviReport rep = levi_report(rebase(sc, random_invertible(6, rng)));
    CHECK(rep.radical_derived_series == std::vector<std::size_t>{3, 1, 0});
    CHECK(rep.complement_is_subalgebra);
    CHECK(rep.complement_semisimple);
    CHECK(rep.complement_radical_in_radical);
  }
}
