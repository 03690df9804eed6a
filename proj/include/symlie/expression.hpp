#pragma once

#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "symlie/atom.hpp"
#include "symlie/polynomial.hpp"

namespace symlie {

/// Denominator factor: primitive polynomial with integer coefficients and a
/// positive canonical leading coefficient, raised to a positive power.
struct DenominatorFactor {
  Polynomial base;
  int exponent;
};

/// Exact rational function over atoms: an expanded numerator over a product
/// of denominator factors. Factors are matched syntactically; there is no
/// polynomial factorization, so the representation is not unique, but an
/// expression is zero iff its numerator has no terms.
class Expression {
 public:
  Expression() = default;
  Expression(const Rational& value);  // NOLINT(google-explicit-constructor)
  Expression(long value) : Expression(Rational(value)) {}  // NOLINT
  Expression(int value) : Expression(Rational(value)) {}   // NOLINT
  explicit Expression(const Atom& atom);
  explicit Expression(Polynomial numerator);

  static Expression rational(long num, long den);

  const Polynomial& numerator() const noexcept { return numerator_; }
  const std::vector<DenominatorFactor>& denominator_factors() const noexcept {
    return denominator_;
  }
  Polynomial expanded_denominator() const;

  bool is_zero() const noexcept { return numerator_.is_zero(); }
  bool is_polynomial() const noexcept { return denominator_.empty(); }
  bool is_constant() const noexcept;
  Rational constant_value() const;

  Expression operator-() const;
  Expression operator+(const Expression& other) const;
  Expression operator-(const Expression& other) const;
  Expression operator*(const Expression& other) const;
  /// Throws DegenerateDivision when `other` is zero.
  Expression operator/(const Expression& other) const;
  Expression& operator+=(const Expression& other) { return *this = *this + other; }
  Expression& operator-=(const Expression& other) { return *this = *this - other; }
  Expression& operator*=(const Expression& other) { return *this = *this * other; }
  Expression& operator/=(const Expression& other) { return *this = *this / other; }
  Expression pow(int exponent) const;

  /// Formal partial derivative; all atoms are independent symbols.
  Expression differentiate(const Atom& atom) const;

  /// Simultaneous substitution. Rejects a binding whose value mentions the
  /// bound atom, and a binding for a function atom while another derivative
  /// of the same function occurs in the expression unbound.
  Expression substitute(const std::unordered_map<Atom, Expression, AtomHash>& bindings) const;
  Expression substitute(const Atom& atom, const Expression& value) const;

  /// IEEE evaluation. Throws MissingBinding or NearSingularEvaluation.
  double eval(const std::unordered_map<Atom, double, AtomHash>& point) const;

  bool contains(const Atom& atom) const noexcept;
  std::set<Atom, AtomIdLess> atoms() const;

  /// Semantic equality: the difference normalizes to zero.
  friend bool operator==(const Expression& a, const Expression& b) { return (a - b).is_zero(); }
  friend bool operator!=(const Expression& a, const Expression& b) { return !(a == b); }

 private:
  void canonicalize();
  void divide_by_polynomial(const Polynomial& p);

  Polynomial numerator_;
  std::vector<DenominatorFactor> denominator_;
};

inline Expression operator+(long a, const Expression& b) { return Expression(a) + b; }
inline Expression operator-(long a, const Expression& b) { return Expression(a) - b; }
inline Expression operator*(long a, const Expression& b) { return Expression(a) * b; }
inline Expression operator/(long a, const Expression& b) { return Expression(a) / b; }

using Bindings = std::unordered_map<Atom, Expression, AtomHash>;
using NumericPoint = std::unordered_map<Atom, double, AtomHash>;

/// Terms of the numerator grouped by their monomial in the atoms accepted by
/// `split`; the map value is the cofactor polynomial.
std::vector<std::pair<Monomial, Polynomial>> split_numerator(
    const Expression& e, const std::function<bool(const Atom&)>& split);

/// Expression lowered to double arithmetic over a slot vector, for repeated
/// evaluation inside integrators and rank sampling.
class NumericForm {
 public:
  NumericForm() = default;
  /// `slot_of` maps each atom of `e` to a slot index or returns -1 for an
  /// unbound atom (which raises MissingBinding).
  NumericForm(const Expression& e, const std::function<int(const Atom&)>& slot_of);

  /// Throws NearSingularEvaluation when the denominator is within 1e-12 of 0.
  double operator()(std::span<const double> slots) const;

 private:
  struct CompiledTerm {
    double coefficient;
    std::vector<std::pair<int, int>> powers;  // slot, exponent
  };
  using CompiledPolynomial = std::vector<CompiledTerm>;
  static CompiledPolynomial compile(const Polynomial& p,
                                    const std::function<int(const Atom&)>& slot_of);
  static double evaluate(const CompiledPolynomial& p, std::span<const double> slots);

  CompiledPolynomial numerator_;
  std::vector<std::pair<CompiledPolynomial, int>> denominator_;
};

constexpr double kSingularThreshold = 1e-12;

}  // namespace symlie
