#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "symlie/atom.hpp"

namespace symlie {

using Rational = mpq_class;

/// Power product of atoms, kept sorted by atom id.
class Monomial {
 public:
  using Factor = std::pair<Atom, std::uint32_t>;

  Monomial() = default;
  explicit Monomial(Atom atom, std::uint32_t exponent = 1);

  const std::vector<Factor>& factors() const noexcept { return factors_; }
  bool is_one() const noexcept { return factors_.empty(); }
  std::uint32_t degree_in(const Atom& atom) const noexcept;
  std::uint32_t total_degree() const noexcept;

  Monomial operator*(const Monomial& other) const;
  /// True when this monomial divides `other`.
  bool divides(const Monomial& other) const noexcept;
  /// `this / divisor`; requires `divisor.divides(*this)`.
  Monomial quotient(const Monomial& divisor) const;
  /// Removes `count` powers of `atom` (which must be present).
  Monomial lowered(const Atom& atom, std::uint32_t count = 1) const;
  static Monomial gcd(const Monomial& a, const Monomial& b);

  /// Lexicographic comparison by atom id: negative, zero or positive.
  static int compare(const Monomial& a, const Monomial& b) noexcept;
  /// Graded lexicographic comparison in canonical atom order.
  static int canonical_compare(const Monomial& a, const Monomial& b);

  std::size_t hash() const noexcept;
  friend bool operator==(const Monomial& a, const Monomial& b) noexcept {
    return a.factors_ == b.factors_;
  }

 private:
  std::vector<Factor> factors_;
};

struct MonomialHash {
  std::size_t operator()(const Monomial& m) const noexcept { return m.hash(); }
};

struct Term {
  Monomial monomial;
  Rational coefficient;
};

/// Sparse multivariate polynomial with exact rational coefficients; terms
/// are stored in strictly decreasing lexicographic order with no zeros.
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(const Rational& constant);  // NOLINT(google-explicit-constructor)
  Polynomial(long constant) : Polynomial(Rational(constant)) {}  // NOLINT
  static Polynomial from_atom(const Atom& atom);
  static Polynomial from_term(Monomial monomial, Rational coefficient);
  /// Builds from arbitrary (unsorted, possibly repeated) terms.
  static Polynomial from_terms(std::vector<Term> terms);

  const std::vector<Term>& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }
  bool is_constant() const noexcept;
  Rational constant_value() const;
  const Term& leading() const { return terms_.front(); }

  Polynomial operator-() const;
  Polynomial operator+(const Polynomial& other) const;
  Polynomial operator-(const Polynomial& other) const;
  Polynomial operator*(const Polynomial& other) const;
  Polynomial scaled(const Rational& factor) const;
  Polynomial times(const Monomial& monomial) const;
  Polynomial pow(unsigned exponent) const;

  Polynomial derivative(const Atom& atom) const;
  /// Exact quotient when `divisor` divides this polynomial.
  std::optional<Polynomial> exact_divide(const Polynomial& divisor) const;

  /// Positive rational c such that this / c has coprime integer coefficients.
  Rational content() const;
  Monomial monomial_gcd() const;
  /// Term that is largest in canonical graded order.
  const Term& canonical_leading() const;

  bool contains(const Atom& atom) const noexcept;
  std::uint32_t degree_in(const Atom& atom) const noexcept;
  void collect_atoms(std::set<Atom, AtomIdLess>& out) const;

  std::size_t hash() const noexcept;
  friend bool operator==(const Polynomial& a, const Polynomial& b);
  friend bool operator!=(const Polynomial& a, const Polynomial& b) { return !(a == b); }

 private:
  std::vector<Term> terms_;
};

}  // namespace symlie
