#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "symlie/expression.hpp"
#include "symlie/family.hpp"

namespace symlie {

/// A function of the coefficients a1, a0 of the normal third-order
/// equation and their x-derivatives.
struct InvariantCandidate {
  std::string name;
  Expression expression;
  int order = 0;
  /// How the formula was read, when that needed a choice.
  std::string note;
};

/// mu = -2 a0 + a1' in jet atoms.
Expression mu_expression();
/// Psi (order 3) and Psi2 (order 4), mu expanded. Psi2 reads the doubled
/// "+ +" of the printed formula as a single "+"; annihilation at order 4
/// decides between the sign readings (see tests).
std::vector<InvariantCandidate> psi_catalog();
/// mu as a candidate; a relative covariant, used as a failing control.
InvariantCandidate mu_candidate();
/// Looks up "psi", "psi2" or "mu". Throws std::invalid_argument.
InvariantCandidate invariant_by_name(const std::string& name);

/// Highest jet order of a1/a0 atoms in `e`, or -1.
int coefficient_jet_order(const Expression& e);

enum class GroupTag { Gc, GS };
std::string to_string(GroupTag tag);
/// "Gc" / "GS", case-insensitive. Throws std::invalid_argument.
GroupTag parse_group(const std::string& text);

struct AnnihilationResult {
  bool holds = false;
  Expression residue;
};

/// Applies the prolonged generator with formal f (Gc) or f, g (GS) to the
/// candidate. `include_k1` adds the y-scaling parameter k1 to the field.
/// Throws std::invalid_argument when the declared order does not match the
/// expression (constants pass at any order).
AnnihilationResult annihilation_check(const InvariantCandidate& inv, GroupTag group,
                                      bool include_k1 = true);

struct RankReport {
  GroupTag group = GroupTag::Gc;
  int order = 0;
  std::size_t dimension = 0;
  std::size_t rank = 0;
  std::size_t count = 0;
  std::size_t generators = 0;
  std::vector<std::size_t> trial_ranks;
  /// Sample points, one per trial, in the order of `coordinates`.
  std::vector<std::string> coordinates;
  std::vector<std::vector<Rational>> samples;
};

/// Rank of the prolonged action at random rational points in [-3, 3]. f
/// (and g for GS) range over polynomials of degree <= order + 4 (a Taylor
/// basis at the sample point), plus the k1 direction.
/// Coordinates: x and a1, a0 jets to `order` (Gc); also y jets for GS.
/// Rank per trial counts singular values above 1e-8 times the largest;
/// the reported rank is the maximum. Throws UnstableRank when no two
/// trials agree, std::invalid_argument for order > 4 or trials < 3.
RankReport invariant_count(GroupTag group, int order, int trials = 5, std::uint64_t seed = 0);

/// Values of a concrete one-variable function and its derivatives.
struct NumericFunction {
  std::string description;
  std::function<double(int derivative, double z)> value;

  static NumericFunction exponential();
  /// Any expression in `variable` (polynomial, Moebius, ...).
  static NumericFunction from_expression(const Expression& e, const std::string& variable = "z");
};

struct InvarianceSample {
  double z = 0;
  double original = 0;
  double transformed = 0;
  double deviation = 0;
  bool skipped = false;
  std::string reason;
};

struct InvarianceReport {
  std::string name;
  bool passed = false;
  double max_deviation = 0;
  std::vector<InvarianceSample> samples;

  /// `name status deviation`
  std::string line() const;
};

/// Evaluates `inv` on the transformed coefficients at z and on the original
/// coefficients at x = X(z). `a1`, `a0` are expressions in x; `functions`
/// gives numeric values for every function of z in the transform. Points
/// where either side is near-singular (mu = 0) are skipped.
InvarianceReport numeric_invariance_check(const InvariantCandidate& inv,
                                          const PointTransform& transform, const Expression& a1,
                                          const Expression& a0,
                                          const std::map<std::string, NumericFunction>& functions,
                                          const std::vector<double>& z_points, double tol);

/// Numeric value of `inv` with a1, a0 given as expressions in x.
double evaluate_invariant(const InvariantCandidate& inv, const Expression& a1,
                          const Expression& a0, double x);

}  // namespace symlie
