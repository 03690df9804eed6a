#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "symlie/expression.hpp"
#include "symlie/family.hpp"
#include "symlie/invariants.hpp"
#include "symlie/jet.hpp"

namespace symlie {

/// A vector field with concrete components, integrated from `initial`.
struct FlowSpec {
  VectorField field{JetSystem{}};
  /// Dependent symbols carried in the state with their highest jet order;
  /// empty means every dependent of the field at order 0. Prolonged
  /// components come from VectorField::prolonged.
  std::vector<std::pair<std::string, int>> jets;
  /// Independent coordinate first, then the jets in the order above.
  std::vector<double> initial;
  double t_end = 1;
  /// 0 picks 1000 steps per unit t; at least 100.
  int steps = 0;
  /// Bound on the step-halving error estimate (mixed relative).
  double tolerance = 1e-9;
};

struct Trajectory {
  std::vector<std::string> coordinates;
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  int steps = 0;
  double error_estimate = 0;

  const std::vector<double>& endpoint() const { return states.back(); }
  /// `t,x,y,...` header then one row per step.
  std::string to_csv() const;
};

/// Classical RK4 with fixed steps; the step count doubles until the
/// difference to the half-step solution is below the tolerance. Throws
/// FiniteTimeEscape when |state| exceeds 1e12, MissingBinding when a
/// component mentions atoms outside the state, std::invalid_argument on a
/// malformed FlowSpec.
Trajectory integrate_flow(const FlowSpec& spec);

/// Coordinate atoms of the state, in order.
std::vector<Atom> flow_coordinates(const FlowSpec& spec);

/// One-parameter subgroup of X1(f, k1) with a closed form for F_t.
struct FlowFixture {
  std::string name;
  /// f as an expression in x.
  Expression f;
  /// F_t as an expression in `variable`; transcendental constants such as
  /// e^t are rounded to the nearest double and taken exactly.
  std::function<Expression(double t, const std::string& variable)> finite;
};

/// "translation" (f = 1), "scaling" (f = x), "projective" (f = x^2).
FlowFixture flow_fixture(const std::string& name);
std::vector<std::string> flow_fixture_names();

/// |a - b| / max(1, |b|)
double mixed_relative_error(double a, double b);

struct FlowPointCheck {
  double x = 0, y = 0;
  std::vector<double> numeric;
  std::vector<double> expected;
  double error = 0;
  bool skipped = false;
  std::string reason;
};

struct FlowReport {
  std::string name;
  bool passed = false;
  double max_error = 0;
  std::vector<FlowPointCheck> points;
  std::string line() const;
};

/// Integrates the (x, y) flow of X1(f, k1) to time t from each grid point
/// and compares with (F_t(x), e^(k1 t) F_t'(x) y). Points where the flow
/// escapes are skipped.
FlowReport verify_flow_formula(const FlowFixture& fixture, double k1, double t,
                               const std::vector<std::pair<double, double>>& grid,
                               double tol = 1e-6);

/// Augmented flow of X1(f, k1) on (x; y, a1, a0) with a-jets to `order`,
/// starting from a1 = A1(x0), a0 = A0(x0) and their derivatives.
FlowSpec augmented_flow_spec(const FlowFixture& fixture, double k1, const Expression& a1,
                             const Expression& a0, double x0, double y0, double t,
                             int order = 3);

struct LemmaSample {
  double x0 = 0;
  double x_t = 0;
  /// a1, a0 after the flow, and B1, B0 of the transformed equation at x_t.
  double a1_flow = 0, a0_flow = 0, a1_action = 0, a0_action = 0;
  double error = 0;
  bool skipped = false;
  std::string reason;
};

struct LemmaReport {
  bool passed = false;
  double max_error = 0;
  std::vector<LemmaSample> samples;
  std::string line() const;
};

/// Compares the a1, a0 components of the augmented flow at time t with the
/// coefficients of the equation transformed by x = F_{-t}(z),
/// y = e^(-k1 t) F_{-t}'(z) w (transform_equation), evaluated at z = x_t.
LemmaReport lemma_consistency_check(const FlowFixture& fixture, double k1, double t,
                                    const Expression& a1, const Expression& a0,
                                    const std::vector<double>& samples, double tol = 1e-6);

/// max mixed relative error between flow(t1) composed with flow(t2) and flow(t1 + t2).
double group_property_error(const FlowSpec& spec, double t1, double t2);

/// max mixed relative error between the fourth-order central difference of
/// the trajectory at t = 0 (step h) and the field at the initial point.
double initial_derivative_error(const FlowSpec& spec, double h = 1e-4);

/// Values of `inv` along the augmented flow, one per sample time.
std::vector<double> invariant_along_flow(const InvariantCandidate& inv, const FlowSpec& spec,
                                         int samples);

}  // namespace symlie
