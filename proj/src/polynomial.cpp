#include "symlie/polynomial.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace symlie {

// ---------------------------------------------------------------- Monomial

Monomial::Monomial(Atom atom, std::uint32_t exponent) {
  if (exponent > 0) factors_.emplace_back(atom, exponent);
}

std::uint32_t Monomial::degree_in(const Atom& atom) const noexcept {
  for (const auto& [a, e] : factors_)
    if (a == atom) return e;
  return 0;
}

std::uint32_t Monomial::total_degree() const noexcept {
  std::uint32_t d = 0;
  for (const auto& f : factors_) d += f.second;
  return d;
}

Monomial Monomial::operator*(const Monomial& other) const {
  Monomial out;
  out.factors_.reserve(factors_.size() + other.factors_.size());
  auto i = factors_.begin();
  auto j = other.factors_.begin();
  while (i != factors_.end() && j != other.factors_.end()) {
    if (i->first.id() == j->first.id()) {
      out.factors_.emplace_back(i->first, i->second + j->second);
      ++i;
      ++j;
    } else if (i->first.id() < j->first.id()) {
      out.factors_.push_back(*i++);
    } else {
      out.factors_.push_back(*j++);
    }
  }
  out.factors_.insert(out.factors_.end(), i, factors_.end());
  out.factors_.insert(out.factors_.end(), j, other.factors_.end());
  return out;
}

bool Monomial::divides(const Monomial& other) const noexcept {
  auto j = other.factors_.begin();
  for (const auto& [a, e] : factors_) {
    while (j != other.factors_.end() && j->first.id() < a.id()) ++j;
    if (j == other.factors_.end() || j->first != a || j->second < e) return false;
  }
  return true;
}

Monomial Monomial::quotient(const Monomial& divisor) const {
  Monomial out;
  auto j = divisor.factors_.begin();
  for (const auto& [a, e] : factors_) {
    std::uint32_t sub = 0;
    if (j != divisor.factors_.end() && j->first == a) {
      sub = j->second;
      ++j;
    }
    if (sub > e) throw std::logic_error("monomial quotient is not exact");
    if (e > sub) out.factors_.emplace_back(a, e - sub);
  }
  if (j != divisor.factors_.end()) throw std::logic_error("monomial quotient is not exact");
  return out;
}

Monomial Monomial::lowered(const Atom& atom, std::uint32_t count) const {
  Monomial out;
  out.factors_.reserve(factors_.size());
  bool found = false;
  for (const auto& [a, e] : factors_) {
    if (a == atom) {
      found = true;
      if (e < count) throw std::logic_error("monomial lowered below zero");
      if (e > count) out.factors_.emplace_back(a, e - count);
    } else {
      out.factors_.emplace_back(a, e);
    }
  }
  if (!found && count > 0) throw std::logic_error("monomial lowered in absent atom");
  return out;
}

Monomial Monomial::gcd(const Monomial& a, const Monomial& b) {
  Monomial out;
  auto i = a.factors_.begin();
  auto j = b.factors_.begin();
  while (i != a.factors_.end() && j != b.factors_.end()) {
    if (i->first.id() == j->first.id()) {
      out.factors_.emplace_back(i->first, std::min(i->second, j->second));
      ++i;
      ++j;
    } else if (i->first.id() < j->first.id()) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}

int Monomial::compare(const Monomial& a, const Monomial& b) noexcept {
  auto i = a.factors_.begin();
  auto j = b.factors_.begin();
  while (i != a.factors_.end() && j != b.factors_.end()) {
    if (i->first.id() == j->first.id()) {
      if (i->second != j->second) return i->second > j->second ? 1 : -1;
      ++i;
      ++j;
    } else {
      // The side holding the lower-id atom has a positive exponent where the
      // other has zero.
      return i->first.id() < j->first.id() ? 1 : -1;
    }
  }
  if (i != a.factors_.end()) return 1;
  if (j != b.factors_.end()) return -1;
  return 0;
}

int Monomial::canonical_compare(const Monomial& a, const Monomial& b) {
  const auto da = a.total_degree();
  const auto db = b.total_degree();
  if (da != db) return da > db ? 1 : -1;
  auto fa = a.factors_;
  auto fb = b.factors_;
  auto by_atom = [](const Factor& p, const Factor& q) { return p.first.canonical_less(q.first); };
  std::sort(fa.begin(), fa.end(), by_atom);
  std::sort(fb.begin(), fb.end(), by_atom);
  auto i = fa.begin();
  auto j = fb.begin();
  while (i != fa.end() && j != fb.end()) {
    if (i->first == j->first) {
      if (i->second != j->second) return i->second > j->second ? 1 : -1;
      ++i;
      ++j;
    } else {
      return i->first.canonical_less(j->first) ? 1 : -1;
    }
  }
  if (i != fa.end()) return 1;
  if (j != fb.end()) return -1;
  return 0;
}

std::size_t Monomial::hash() const noexcept {
  std::size_t h = 0x9e3779b97f4a7c15ULL;
  for (const auto& [a, e] : factors_) {
    h ^= (static_cast<std::size_t>(a.id()) * 0x100000001b3ULL + e) + 0x9e3779b97f4a7c15ULL +
         (h << 6) + (h >> 2);
  }
  return h;
}

// -------------------------------------------------------------- Polynomial

namespace {

bool term_greater(const Term& a, const Term& b) {
  return Monomial::compare(a.monomial, b.monomial) > 0;
}

}  // namespace

Polynomial::Polynomial(const Rational& constant) {
  if (constant != 0) terms_.push_back(Term{Monomial{}, constant});
}

Polynomial Polynomial::from_atom(const Atom& atom) {
  Polynomial p;
  p.terms_.push_back(Term{Monomial(atom), Rational(1)});
  return p;
}

Polynomial Polynomial::from_term(Monomial monomial, Rational coefficient) {
  Polynomial p;
  if (coefficient != 0) p.terms_.push_back(Term{std::move(monomial), std::move(coefficient)});
  return p;
}

Polynomial Polynomial::from_terms(std::vector<Term> terms) {
  std::unordered_map<Monomial, Rational, MonomialHash> acc;
  acc.reserve(terms.size());
  for (auto& t : terms) {
    auto [it, inserted] = acc.try_emplace(std::move(t.monomial), t.coefficient);
    if (!inserted) it->second += t.coefficient;
  }
  Polynomial p;
  p.terms_.reserve(acc.size());
  for (auto& [m, c] : acc)
    if (c != 0) p.terms_.push_back(Term{m, c});
  std::sort(p.terms_.begin(), p.terms_.end(), term_greater);
  return p;
}

bool Polynomial::is_constant() const noexcept {
  return terms_.empty() || (terms_.size() == 1 && terms_.front().monomial.is_one());
}

Rational Polynomial::constant_value() const {
  if (terms_.empty()) return Rational(0);
  if (!is_constant()) throw std::logic_error("polynomial is not constant");
  return terms_.front().coefficient;
}

Polynomial Polynomial::operator-() const {
  Polynomial p = *this;
  for (auto& t : p.terms_) t.coefficient = -t.coefficient;
  return p;
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
  Polynomial out;
  out.terms_.reserve(terms_.size() + other.terms_.size());
  auto i = terms_.begin();
  auto j = other.terms_.begin();
  while (i != terms_.end() && j != other.terms_.end()) {
    const int c = Monomial::compare(i->monomial, j->monomial);
    if (c == 0) {
      Rational s = i->coefficient + j->coefficient;
      if (s != 0) out.terms_.push_back(Term{i->monomial, std::move(s)});
      ++i;
      ++j;
    } else if (c > 0) {
      out.terms_.push_back(*i++);
    } else {
      out.terms_.push_back(*j++);
    }
  }
  out.terms_.insert(out.terms_.end(), i, terms_.end());
  out.terms_.insert(out.terms_.end(), j, other.terms_.end());
  return out;
}

Polynomial Polynomial::operator-(const Polynomial& other) const { return *this + (-other); }

Polynomial Polynomial::operator*(const Polynomial& other) const {
  if (is_zero() || other.is_zero()) return {};
  if (other.is_constant()) return scaled(other.constant_value());
  if (is_constant()) return other.scaled(constant_value());
  if (other.size() == 1) return times(other.leading().monomial).scaled(other.leading().coefficient);
  if (size() == 1) return other.times(leading().monomial).scaled(leading().coefficient);
  std::unordered_map<Monomial, Rational, MonomialHash> acc;
  acc.reserve(terms_.size() * other.terms_.size());
  for (const auto& a : terms_) {
    for (const auto& b : other.terms_) {
      Rational c = a.coefficient * b.coefficient;
      auto [it, inserted] = acc.try_emplace(a.monomial * b.monomial, c);
      if (!inserted) it->second += c;
    }
  }
  Polynomial p;
  p.terms_.reserve(acc.size());
  for (auto& [m, c] : acc)
    if (c != 0) p.terms_.push_back(Term{m, c});
  std::sort(p.terms_.begin(), p.terms_.end(), term_greater);
  return p;
}

Polynomial Polynomial::scaled(const Rational& factor) const {
  if (factor == 0) return {};
  Polynomial p = *this;
  for (auto& t : p.terms_) t.coefficient *= factor;
  return p;
}

Polynomial Polynomial::times(const Monomial& monomial) const {
  // Multiplication by a monomial preserves the term order.
  Polynomial p;
  p.terms_.reserve(terms_.size());
  for (const auto& t : terms_) p.terms_.push_back(Term{t.monomial * monomial, t.coefficient});
  return p;
}

Polynomial Polynomial::pow(unsigned exponent) const {
  Polynomial result(Rational(1));
  Polynomial base = *this;
  while (exponent > 0) {
    if (exponent & 1U) result = result * base;
    exponent >>= 1U;
    if (exponent > 0) base = base * base;
  }
  return result;
}

Polynomial Polynomial::derivative(const Atom& atom) const {
  std::vector<Term> out;
  for (const auto& t : terms_) {
    const auto e = t.monomial.degree_in(atom);
    if (e == 0) continue;
    out.push_back(Term{t.monomial.lowered(atom), t.coefficient * e});
  }
  // Lowering one exponent can reorder terms under lex order; re-sort.
  return from_terms(std::move(out));
}

std::optional<Polynomial> Polynomial::exact_divide(const Polynomial& divisor) const {
  if (divisor.is_zero()) throw std::logic_error("exact_divide by zero polynomial");
  if (is_zero()) return Polynomial{};
  if (divisor.is_constant()) return scaled(1 / divisor.constant_value());
  // Quick degree rejection.
  std::set<Atom, AtomIdLess> atoms;
  divisor.collect_atoms(atoms);
  for (const auto& a : atoms)
    if (degree_in(a) < divisor.degree_in(a)) return std::nullopt;

  // Remainder kept in an ordered map so each reduction step touches only the
  // divisor's terms instead of re-merging the whole remainder.
  struct LexGreater {
    bool operator()(const Monomial& a, const Monomial& b) const noexcept {
      return Monomial::compare(a, b) > 0;
    }
  };
  std::map<Monomial, Rational, LexGreater> remainder;
  for (const auto& t : terms_) remainder.emplace_hint(remainder.end(), t.monomial, t.coefficient);

  const Term& lead = divisor.leading();
  std::vector<Term> quotient;
  while (!remainder.empty()) {
    auto top = remainder.begin();
    if (!lead.monomial.divides(top->first)) return std::nullopt;
    Monomial qm = top->first.quotient(lead.monomial);
    Rational qc = top->second / lead.coefficient;
    remainder.erase(top);
    for (std::size_t i = 1; i < divisor.terms_.size(); ++i) {
      const Term& d = divisor.terms_[i];
      Monomial m = d.monomial * qm;
      auto [it, inserted] = remainder.try_emplace(std::move(m));
      it->second -= qc * d.coefficient;
      if (it->second == 0) remainder.erase(it);
    }
    quotient.push_back(Term{std::move(qm), std::move(qc)});
  }
  return from_terms(std::move(quotient));
}

Rational Polynomial::content() const {
  if (terms_.empty()) return Rational(1);
  mpz_class num_gcd = 0;
  mpz_class den_lcm = 1;
  for (const auto& t : terms_) {
    mpz_class n = abs(t.coefficient.get_num());
    mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), n.get_mpz_t());
    mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), t.coefficient.get_den_mpz_t());
  }
  Rational c(num_gcd, den_lcm);
  c.canonicalize();
  return c;
}

Monomial Polynomial::monomial_gcd() const {
  if (terms_.empty()) return {};
  Monomial g = terms_.front().monomial;
  for (const auto& t : terms_) {
    g = Monomial::gcd(g, t.monomial);
    if (g.is_one()) break;
  }
  return g;
}

const Term& Polynomial::canonical_leading() const {
  if (terms_.empty()) throw std::logic_error("canonical_leading of zero polynomial");
  const Term* best = &terms_.front();
  for (const auto& t : terms_)
    if (Monomial::canonical_compare(t.monomial, best->monomial) > 0) best = &t;
  return *best;
}

bool Polynomial::contains(const Atom& atom) const noexcept {
  for (const auto& t : terms_)
    if (t.monomial.degree_in(atom) > 0) return true;
  return false;
}

std::uint32_t Polynomial::degree_in(const Atom& atom) const noexcept {
  std::uint32_t d = 0;
  for (const auto& t : terms_) d = std::max(d, t.monomial.degree_in(atom));
  return d;
}

void Polynomial::collect_atoms(std::set<Atom, AtomIdLess>& out) const {
  for (const auto& t : terms_)
    for (const auto& f : t.monomial.factors()) out.insert(f.first);
}

std::size_t Polynomial::hash() const noexcept {
  std::size_t h = terms_.size();
  for (const auto& t : terms_) h = h * 1000003ULL ^ t.monomial.hash();
  return h;
}

bool operator==(const Polynomial& a, const Polynomial& b) {
  if (a.terms_.size() != b.terms_.size()) return false;
  for (std::size_t i = 0; i < a.terms_.size(); ++i) {
    if (!(a.terms_[i].monomial == b.terms_[i].monomial)) return false;
    if (a.terms_[i].coefficient != b.terms_[i].coefficient) return false;
  }
  return true;
}

}  // namespace symlie
