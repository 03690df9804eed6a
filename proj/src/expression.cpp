#include "symlie/expression.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "symlie/error.hpp"

namespace symlie {

namespace {

struct Factored {
  Rational scale;
  std::vector<DenominatorFactor> factors;
};

// p = scale * prod(factors); every factor primitive with positive canonical
// leading coefficient, single atoms split out of the monomial content.
Factored factor_out(const Polynomial& p) {
  Factored out;
  out.scale = p.content();
  const Monomial common = p.monomial_gcd();
  std::vector<Term> rest;
  rest.reserve(p.size());
  const Rational inv = 1 / out.scale;
  for (const auto& t : p.terms())
    rest.push_back(Term{t.monomial.quotient(common), t.coefficient * inv});
  Polynomial q = Polynomial::from_terms(std::move(rest));
  if (q.canonical_leading().coefficient < 0) {
    q = -q;
    out.scale = -out.scale;
  }
  for (const auto& [atom, e] : common.factors())
    out.factors.push_back(DenominatorFactor{Polynomial::from_atom(atom), static_cast<int>(e)});
  if (!q.is_constant()) out.factors.push_back(DenominatorFactor{std::move(q), 1});
  return out;
}

bool factor_less(const DenominatorFactor& a, const DenominatorFactor& b) {
  if (a.base.size() != b.base.size()) return a.base.size() < b.base.size();
  const auto& ta = a.base.terms();
  const auto& tb = b.base.terms();
  for (std::size_t i = 0; i < ta.size(); ++i) {
    const int c = Monomial::compare(ta[i].monomial, tb[i].monomial);
    if (c != 0) return c > 0;
    if (ta[i].coefficient != tb[i].coefficient) return ta[i].coefficient < tb[i].coefficient;
  }
  return false;
}

void merge_factor(std::vector<DenominatorFactor>& into, const Polynomial& base, int exponent) {
  for (auto& f : into) {
    if (f.base == base) {
      f.exponent += exponent;
      return;
    }
  }
  into.push_back(DenominatorFactor{base, exponent});
}

int find_factor(const std::vector<DenominatorFactor>& list, const Polynomial& base) {
  for (std::size_t i = 0; i < list.size(); ++i)
    if (list[i].base == base) return static_cast<int>(i);
  return -1;
}

bool same_denominator(const std::vector<DenominatorFactor>& a,
                      const std::vector<DenominatorFactor>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].exponent != b[i].exponent || a[i].base != b[i].base) return false;
  return true;
}

Polynomial product_of(const std::vector<std::pair<const Polynomial*, int>>& powers) {
  Polynomial out(Rational(1));
  for (const auto& [base, e] : powers)
    if (e > 0) out = out * base->pow(static_cast<unsigned>(e));
  return out;
}

}  // namespace

Expression::Expression(const Rational& value) : numerator_(value) {}

Expression::Expression(const Atom& atom) : numerator_(Polynomial::from_atom(atom)) {}

Expression::Expression(Polynomial numerator) : numerator_(std::move(numerator)) {}

Expression Expression::rational(long num, long den) {
  if (den == 0) throw DegenerateDivision("rational literal with zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return Expression(r);
}

Polynomial Expression::expanded_denominator() const {
  Polynomial out(Rational(1));
  for (const auto& f : denominator_) out = out * f.base.pow(static_cast<unsigned>(f.exponent));
  return out;
}

bool Expression::is_constant() const noexcept {
  return denominator_.empty() && numerator_.is_constant();
}

Rational Expression::constant_value() const {
  if (!is_constant()) throw std::logic_error("expression is not constant");
  return numerator_.constant_value();
}

void Expression::canonicalize() {
  if (numerator_.is_zero()) {
    denominator_.clear();
    return;
  }
  for (auto& f : denominator_) {
    if (f.exponent <= 0) continue;
    if (f.base.size() == 1) {
      // Single atom: cancel the smallest power present in every term.
      const Atom atom = f.base.leading().monomial.factors().front().first;
      std::uint32_t k = UINT32_MAX;
      for (const auto& t : numerator_.terms()) k = std::min(k, t.monomial.degree_in(atom));
      const int c = std::min<int>(static_cast<int>(k), f.exponent);
      if (c > 0) {
        std::vector<Term> terms;
        terms.reserve(numerator_.size());
        for (const auto& t : numerator_.terms())
          terms.push_back(Term{t.monomial.lowered(atom, static_cast<std::uint32_t>(c)),
                               t.coefficient});
        numerator_ = Polynomial::from_terms(std::move(terms));
        f.exponent -= c;
      }
      continue;
    }
    while (f.exponent > 0) {
      auto q = numerator_.exact_divide(f.base);
      if (!q) break;
      numerator_ = std::move(*q);
      --f.exponent;
    }
  }
  std::erase_if(denominator_, [](const DenominatorFactor& f) { return f.exponent <= 0; });
  std::sort(denominator_.begin(), denominator_.end(), factor_less);
}

void Expression::divide_by_polynomial(const Polynomial& p) {
  if (p.is_zero()) throw DegenerateDivision("division by an expression that normalizes to zero");
  Factored fp = factor_out(p);
  numerator_ = numerator_.scaled(1 / fp.scale);
  for (auto& f : fp.factors) merge_factor(denominator_, f.base, f.exponent);
}

Expression Expression::operator-() const {
  Expression out = *this;
  out.numerator_ = -numerator_;
  return out;
}

Expression Expression::operator+(const Expression& other) const {
  if (other.is_zero()) return *this;
  if (is_zero()) return other;
  Expression out;
  if (same_denominator(denominator_, other.denominator_)) {
    out.numerator_ = numerator_ + other.numerator_;
    out.denominator_ = denominator_;
  } else {
    // Least common multiple of the syntactic factorizations.
    out.denominator_ = denominator_;
    for (const auto& f : other.denominator_) {
      const int i = find_factor(out.denominator_, f.base);
      if (i < 0)
        out.denominator_.push_back(f);
      else
        out.denominator_[i].exponent = std::max(out.denominator_[i].exponent, f.exponent);
    }
    auto cofactor = [&out](const std::vector<DenominatorFactor>& mine) {
      std::vector<std::pair<const Polynomial*, int>> powers;
      for (const auto& f : out.denominator_) {
        const int i = find_factor(mine, f.base);
        const int have = i < 0 ? 0 : mine[i].exponent;
        powers.emplace_back(&f.base, f.exponent - have);
      }
      return product_of(powers);
    };
    out.numerator_ = numerator_ * cofactor(denominator_) + other.numerator_ * cofactor(other.denominator_);
  }
  out.canonicalize();
  return out;
}

Expression Expression::operator-(const Expression& other) const { return *this + (-other); }

Expression Expression::operator*(const Expression& other) const {
  if (is_zero() || other.is_zero()) return {};
  Expression out;
  out.numerator_ = numerator_ * other.numerator_;
  out.denominator_ = denominator_;
  for (const auto& f : other.denominator_) merge_factor(out.denominator_, f.base, f.exponent);
  if (!denominator_.empty() || !other.denominator_.empty()) out.canonicalize();
  return out;
}

Expression Expression::operator/(const Expression& other) const {
  if (other.is_zero()) throw DegenerateDivision("division by an expression that normalizes to zero");
  if (is_zero()) return {};
  Expression out;
  out.numerator_ = numerator_ * other.expanded_denominator();
  out.denominator_ = denominator_;
  out.divide_by_polynomial(other.numerator_);
  out.canonicalize();
  return out;
}

Expression Expression::pow(int exponent) const {
  if (exponent < 0) return Expression(1) / pow(-exponent);
  Expression out;
  out.numerator_ = numerator_.pow(static_cast<unsigned>(exponent));
  for (const auto& f : denominator_)
    out.denominator_.push_back(DenominatorFactor{f.base, f.exponent * exponent});
  out.canonicalize();
  return out;
}

Expression Expression::differentiate(const Atom& atom) const {
  Polynomial dnum = numerator_.derivative(atom);
  std::vector<std::size_t> touched;
  for (std::size_t i = 0; i < denominator_.size(); ++i)
    if (denominator_[i].base.contains(atom)) touched.push_back(i);
  Expression out;
  out.denominator_ = denominator_;
  if (touched.empty()) {
    out.numerator_ = std::move(dnum);
  } else {
    // d(P / prod d_i^e_i) = (P' prod_S d_i - P sum_S e_i d_i' prod_{S\i} d_j) / (D prod_S d_i)
    Polynomial all(Rational(1));
    for (std::size_t i : touched) all = all * denominator_[i].base;
    Polynomial sum;
    for (std::size_t i : touched) {
      Polynomial term = denominator_[i].base.derivative(atom).scaled(denominator_[i].exponent);
      for (std::size_t j : touched)
        if (j != i) term = term * denominator_[j].base;
      sum = sum + term;
    }
    out.numerator_ = dnum * all - numerator_ * sum;
    for (std::size_t i : touched) ++out.denominator_[i].exponent;
  }
  out.canonicalize();
  return out;
}

bool Expression::contains(const Atom& atom) const noexcept {
  if (numerator_.contains(atom)) return true;
  for (const auto& f : denominator_)
    if (f.base.contains(atom)) return true;
  return false;
}

std::set<Atom, AtomIdLess> Expression::atoms() const {
  std::set<Atom, AtomIdLess> out;
  numerator_.collect_atoms(out);
  for (const auto& f : denominator_) f.base.collect_atoms(out);
  return out;
}

Expression Expression::substitute(const Atom& atom, const Expression& value) const {
  Bindings b;
  b.emplace(atom, value);
  return substitute(b);
}

Expression Expression::substitute(const Bindings& bindings) const {
  if (bindings.empty()) return *this;
  for (const auto& [atom, value] : bindings) {
    if (value.contains(atom))
      throw SubstitutionError("recursive binding: the value bound to " + atom.name() +
                              " contains it");
  }
  const auto present = atoms();
  bool any = false;
  for (const auto& a : present) {
    if (bindings.count(a)) {
      any = true;
      continue;
    }
    if (!a.is_function()) continue;
    for (const auto& [bound, value] : bindings) {
      if (bound.is_function() && bound.name() == a.name() && bound.args() == a.args())
        throw SubstitutionError("binding for function " + a.name() +
                                " leaves one of its derivative atoms unbound");
    }
  }
  if (!any) return *this;

  // Registry of distinct denominator bases across bound values.
  std::vector<Polynomial> bases;
  auto base_index = [&bases](const Polynomial& p) {
    for (std::size_t i = 0; i < bases.size(); ++i)
      if (bases[i] == p) return static_cast<int>(i);
    bases.push_back(p);
    return static_cast<int>(bases.size() - 1);
  };
  struct BoundValue {
    const Polynomial* numerator;
    std::vector<std::pair<int, int>> den;  // base index, exponent
  };
  std::unordered_map<Atom, BoundValue, AtomHash> bound;
  for (const auto& [atom, value] : bindings) {
    if (!present.count(atom)) continue;
    BoundValue bv{&value.numerator(), {}};
    for (const auto& f : value.denominator_factors())
      bv.den.emplace_back(base_index(f.base), f.exponent);
    bound.emplace(atom, std::move(bv));
  }

  auto substitute_polynomial = [&](const Polynomial& p) {
    struct Pending {
      Rational coefficient;
      Monomial free_part;
      std::vector<std::pair<Atom, std::uint32_t>> bound_part;
      std::map<int, int> den;
    };
    std::vector<Pending> pending;
    pending.reserve(p.size());
    std::map<int, int> lcd;
    for (const auto& t : p.terms()) {
      Pending pd{t.coefficient, Monomial{}, {}, {}};
      for (const auto& [a, e] : t.monomial.factors()) {
        auto it = bound.find(a);
        if (it == bound.end()) {
          pd.free_part = pd.free_part * Monomial(a, e);
        } else {
          pd.bound_part.emplace_back(a, e);
          for (const auto& [idx, de] : it->second.den) pd.den[idx] += de * static_cast<int>(e);
        }
      }
      for (const auto& [idx, de] : pd.den) lcd[idx] = std::max(lcd[idx], de);
      pending.push_back(std::move(pd));
    }
    std::map<std::pair<std::uint32_t, std::uint32_t>, Polynomial> power_cache;
    auto atom_power = [&](const Atom& a, std::uint32_t e) -> const Polynomial& {
      auto key = std::make_pair(a.id(), e);
      auto it = power_cache.find(key);
      if (it != power_cache.end()) return it->second;
      return power_cache.emplace(key, bound.at(a).numerator->pow(e)).first->second;
    };
    std::map<std::pair<int, int>, Polynomial> base_cache;
    auto base_power = [&](int idx, int e) -> const Polynomial& {
      auto key = std::make_pair(idx, e);
      auto it = base_cache.find(key);
      if (it != base_cache.end()) return it->second;
      return base_cache.emplace(key, bases[idx].pow(static_cast<unsigned>(e))).first->second;
    };
    Polynomial sum;
    std::vector<Term> simple;
    for (const auto& pd : pending) {
      if (pd.bound_part.empty() && lcd.empty()) {
        simple.push_back(Term{pd.free_part, pd.coefficient});
        continue;
      }
      Polynomial term = Polynomial::from_term(pd.free_part, pd.coefficient);
      for (const auto& [a, e] : pd.bound_part) term = term * atom_power(a, e);
      for (const auto& [idx, e] : lcd) {
        auto it = pd.den.find(idx);
        const int missing = e - (it == pd.den.end() ? 0 : it->second);
        if (missing > 0) term = term * base_power(idx, missing);
      }
      sum = sum + term;
    }
    if (!simple.empty()) sum = sum + Polynomial::from_terms(std::move(simple));
    Expression out(std::move(sum));
    for (const auto& [idx, e] : lcd)
      if (e > 0) out.denominator_.push_back(DenominatorFactor{bases[idx], e});
    out.canonicalize();
    return out;
  };

  Expression result = substitute_polynomial(numerator_);
  for (const auto& f : denominator_) {
    Expression base = substitute_polynomial(f.base);
    if (base.is_zero())
      throw DegenerateDivision("substitution produces a zero denominator");
    result = result / base.pow(f.exponent);
  }
  return result;
}

double Expression::eval(const NumericPoint& point) const {
  auto value_of = [&point](const Atom& a) {
    auto it = point.find(a);
    if (it == point.end()) throw MissingBinding("no numeric value bound for atom " + a.name());
    return it->second;
  };
  auto eval_poly = [&](const Polynomial& p) {
    double s = 0.0;
    for (const auto& t : p.terms()) {
      double v = t.coefficient.get_d();
      for (const auto& [a, e] : t.monomial.factors()) {
        const double x = value_of(a);
        for (std::uint32_t k = 0; k < e; ++k) v *= x;
      }
      s += v;
    }
    return s;
  };
  double den = 1.0;
  for (const auto& f : denominator_) den *= std::pow(eval_poly(f.base), f.exponent);
  if (std::fabs(den) <= kSingularThreshold)
    throw NearSingularEvaluation("denominator evaluates within 1e-12 of zero");
  return eval_poly(numerator_) / den;
}

std::vector<std::pair<Monomial, Polynomial>> split_numerator(
    const Expression& e, const std::function<bool(const Atom&)>& split) {
  std::unordered_map<Monomial, std::vector<Term>, MonomialHash> groups;
  for (const auto& t : e.numerator().terms()) {
    Monomial key;
    Monomial rest;
    for (const auto& [a, p] : t.monomial.factors()) {
      if (split(a))
        key = key * Monomial(a, p);
      else
        rest = rest * Monomial(a, p);
    }
    groups[key].push_back(Term{rest, t.coefficient});
  }
  std::vector<std::pair<Monomial, Polynomial>> out;
  out.reserve(groups.size());
  for (auto& [key, terms] : groups) out.emplace_back(key, Polynomial::from_terms(std::move(terms)));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return Monomial::canonical_compare(a.first, b.first) > 0;
  });
  return out;
}

// ------------------------------------------------------------- NumericForm

NumericForm::CompiledPolynomial NumericForm::compile(
    const Polynomial& p, const std::function<int(const Atom&)>& slot_of) {
  CompiledPolynomial out;
  out.reserve(p.size());
  for (const auto& t : p.terms()) {
    CompiledTerm ct{t.coefficient.get_d(), {}};
    for (const auto& [a, e] : t.monomial.factors()) {
      const int slot = slot_of(a);
      if (slot < 0) throw MissingBinding("no numeric slot for atom " + a.name());
      ct.powers.emplace_back(slot, static_cast<int>(e));
    }
    out.push_back(std::move(ct));
  }
  return out;
}

NumericForm::NumericForm(const Expression& e, const std::function<int(const Atom&)>& slot_of)
    : numerator_(compile(e.numerator(), slot_of)) {
  for (const auto& f : e.denominator_factors())
    denominator_.emplace_back(compile(f.base, slot_of), f.exponent);
}

double NumericForm::evaluate(const CompiledPolynomial& p, std::span<const double> slots) {
  double s = 0.0;
  for (const auto& t : p) {
    double v = t.coefficient;
    for (const auto& [slot, e] : t.powers) {
      const double x = slots[static_cast<std::size_t>(slot)];
      for (int k = 0; k < e; ++k) v *= x;
    }
    s += v;
  }
  return s;
}

double NumericForm::operator()(std::span<const double> slots) const {
  double den = 1.0;
  for (const auto& [p, e] : denominator_) den *= std::pow(evaluate(p, slots), e);
  if (std::fabs(den) <= kSingularThreshold)
    throw NearSingularEvaluation("denominator evaluates within 1e-12 of zero");
  return evaluate(numerator_, slots) / den;
}

}  // namespace symlie
