#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "symlie/expression.hpp"
#include "symlie/jet.hpp"
#include "symlie/parse.hpp"

namespace symlie {

/// Monic linear ODE y^(n) + sum_j a^j y^(j) (+ r) = 0 whose coefficients are
/// treated as extra dependent variables.
struct ODEFamily {
  struct Coefficient {
    std::string symbol;
    int multiplies;  // order of the y-derivative it multiplies
  };

  int order = 3;
  std::vector<Coefficient> coefficients;
  std::optional<std::string> nonhomogeneous;
  std::string independent = "x";
  std::string dependent = "y";

  /// Throws std::invalid_argument on n < 3, repeated symbols or a
  /// coefficient attached to an order outside [0, n).
  void validate() const;

  Expression residual() const;
  /// Coefficient symbols followed by the nonhomogeneous symbol, if any.
  std::vector<std::string> coefficient_symbols() const;
  /// (x; y, coefficients..., r) with max tracked order n + 4.
  JetSystem system() const;
  /// Right-hand side of y^(n) on the solution manifold.
  Expression solved_top() const;

  /// `e3nor`, `e3nh`, `glinode:<n>` (all lower orders present) or
  /// `normal:<n>` (y^(n-1) term removed).
  static ODEFamily builtin(std::string_view name);
  /// Line format: `order: 3`, `coeff: a1 @ 1`, `nonhomogeneous: r`.
  static ODEFamily parse(std::string_view text);
  std::string to_text() const;
};

/// x = X(z), y = h(z) w + g(z), with optional parameter values already
/// substituted. One-variable functions in the expressions are functions of z.
struct PointTransform {
  std::string new_independent = "z";
  std::string new_dependent = "w";
  Expression x_of;
  Expression y_of;
  std::map<std::string, Rational> parameters;

  /// Checks the linear shape; returns (h, g). Throws SingularTransform when
  /// dX/dz or h vanishes identically and std::invalid_argument when y is not
  /// affine in w.
  std::pair<Expression, Expression> linear_parts() const;
  /// `x = ...`, `y = ...`, optional `param: lambda = 1` lines.
  static PointTransform parse(std::string_view text);
  std::string to_text() const;
};

struct TransformResult {
  /// B_k: coefficient of w^(k) after dividing by the leading coefficient.
  std::map<int, Expression> by_order;
  /// w-free term divided by the leading coefficient (zero when absent).
  Expression inhomogeneous;
  /// Coefficient of w^(n) before normalization.
  Expression certificate;
  /// Orders carrying a nonzero coefficient that the family does not allow.
  std::vector<int> obstructions;
  /// A w-free term appeared in a homogeneous family.
  bool inhomogeneous_obstruction = false;

  /// B for a family symbol (a^j maps to the order it multiplies, r to the
  /// inhomogeneous term).
  Expression for_symbol(const ODEFamily& family, const std::string& symbol) const;
  bool is_equivalence() const { return obstructions.empty() && !inhomogeneous_obstruction; }
};

/// Pulls the residual back through the transform. Coefficient symbols stand
/// for their values at x = X(z). Throws SingularTransform if the leading
/// coefficient is zero.
TransformResult transform_equation(const ODEFamily& family, const PointTransform& transform);

/// symbol -> B for every coefficient symbol of the family.
std::map<std::string, Expression> induced_coefficient_action(const ODEFamily& family,
                                                             const PointTransform& transform);

struct SymmetryCheck {
  bool holds = false;
  Expression residue;
};

/// pr X applied to the residual on the solution manifold. Throws
/// CoordinateMismatch unless X has exactly the family's coordinates.
SymmetryCheck check_symmetry(const VectorField& field, const ODEFamily& family);

struct DeterminingSystem {
  ODEFamily family;
  /// Unknowns: xi(x,y), eta(x,y), phi_<symbol>(x,y,A...).
  VectorField ansatz;
  std::vector<Expression> equations;
};

DeterminingSystem determining_system(const ODEFamily& family);

struct GeneratorVerdict {
  bool holds = false;
  /// Indices of equations left nonzero.
  std::vector<std::size_t> failing;
};

/// Substitutes the components of `field` for the ansatz unknowns (with all
/// their partial derivatives) and checks every equation.
GeneratorVerdict verify_generator(const VectorField& field, const DeterminingSystem& system);

struct GeneratorSplit {
  VectorField x1;
  VectorField x2;
  std::vector<std::string> warnings;
};

/// X1 = X with the named functions (and all their derivatives) set to 0,
/// X2 = X - X1.
GeneratorSplit split_generator(const VectorField& field,
                               const std::vector<std::string>& zero_functions = {"g"});

struct LiftResult {
  bool ok = false;
  PointTransform transform;
  /// a^j -> B_j, the induced action on the coefficients.
  std::map<std::string, Expression> gamma;
  std::vector<std::string> obstructions;
  /// Pulled-back residual divided by the transformed residual.
  Expression multiplier;
};

/// (phi, psi) extended by the induced coefficient action; verified by
/// re-substituting into the residual.
LiftResult lift_to_symmetry(const ODEFamily& family, const PointTransform& transform);

// ------------------------------------------------------------ generators
// Components of the generator families on the augmented coordinates. The
// function arguments may be formal atoms or concrete expressions in x.

/// {F, (K + F')y, -2(a1 F' + F'''), -(3 a0 F' + a1 F'' + F'''')} on (x; y, a1, a0).
VectorField x1_generator(const Expression& f, const Expression& k);
/// {0, G, 0, -(a0 G + a1 G' + G''')/y} on (x; y, a1, a0).
VectorField x2_generator(const Expression& g);
/// X1 + X2 with formal f, g and parameter k1.
VectorField e3nor_generator();
/// Projection of X1 to (x; a1, a0).
VectorField x0_generator(const Expression& f);
/// Generator of the nonhomogeneous family with formal J, P, k1 and
/// phi4(x, y, a1, a0, r) on (x; y, a1, a0, r).
VectorField e3nh_generator();

/// The standard symbol context extended with the family's coordinates.
SymbolContext family_context(const ODEFamily& family);

}  // namespace symlie
