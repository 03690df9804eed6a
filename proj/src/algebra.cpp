#include "symlie/algebra.hpp"

#include <sstream>
#include <stdexcept>

#include "symlie/error.hpp"
#include "symlie/family.hpp"
#include "symlie/parse.hpp"

namespace symlie {

VectorField bracket(const VectorField& a, const VectorField& b) {
  const JetSystem& sys = a.system();
  if (sys.independent != b.system().independent || sys.dependents != b.system().dependents)
    throw CoordinateMismatch("bracket of vector fields on different coordinates");
  Expression xi = a.apply(b.xi()) - b.apply(a.xi());
  std::vector<Expression> etas;
  for (std::size_t i = 0; i < sys.dependents.size(); ++i)
    etas.push_back(a.apply(b.etas()[i]) - b.apply(a.etas()[i]));
  return VectorField(sys, std::move(xi), std::move(etas));
}

// -------------------------------------------------------------- relations

std::vector<std::string> relation_ids() { return {"x1-x1", "x2-x2", "x1-x2"}; }

RelationCheck verify_relation(std::string_view id) {
  auto fn = [](const char* name) { return Expression(Atom::function(name, "x")); };
  auto d = [](const char* name, int k) { return Expression(Atom::function(name, "x", k)); };
  const Expression k1(Atom::parameter("k1")), k2(Atom::parameter("k2"));
  RelationCheck out;
  out.id = std::string(id);
  VectorField lhs(JetSystem{}), rhs(JetSystem{});
  if (id == "x1-x1") {
    out.statement = "[X1(f1,k1), X1(f2,k2)] = X1(-f2*f1' + f1*f2', 0)";
    lhs = bracket(x1_generator(fn("f1"), k1), x1_generator(fn("f2"), k2));
    rhs = x1_generator(-fn("f2") * d("f1", 1) + fn("f1") * d("f2", 1), Expression());
  } else if (id == "x2-x2") {
    out.statement = "[X2(g1), X2(g2)] = 0";
    lhs = bracket(x2_generator(fn("g1")), x2_generator(fn("g2")));
    rhs = VectorField(lhs.system());
  } else if (id == "x1-x2") {
    out.statement = "[X1(f1,k1), X2(g1)] = X2(f1*g1' - g1*(k1 + f1'))";
    lhs = bracket(x1_generator(fn("f1"), k1), x2_generator(fn("g1")));
    rhs = x2_generator(fn("f1") * d("g1", 1) - fn("g1") * (k1 + d("f1", 1)));
  } else {
    throw std::invalid_argument("unknown relation '" + std::string(id) + "' (x1-x1, x2-x2, x1-x2)");
  }
  out.residue = lhs - rhs;
  out.holds = out.residue.is_zero();
  return out;
}

// ---------------------------------------------------- StructureConstants

StructureConstants::StructureConstants(std::vector<std::string> labels)
    : labels_(std::move(labels)),
      table_(labels_.size(), std::vector<RationalVector>(labels_.size(),
                                                         RationalVector(labels_.size(), 0))) {}

void StructureConstants::set(std::size_t i, std::size_t j, const RationalVector& v) {
  if (v.size() != dimension()) throw std::invalid_argument("structure constant vector size");
  table_[i][j] = v;
  RationalVector neg(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) neg[k] = -v[k];
  table_[j][i] = std::move(neg);
}

RationalVector StructureConstants::bracket(const RationalVector& a, const RationalVector& b) const {
  const std::size_t n = dimension();
  RationalVector out(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (b[j] == 0 || i == j) continue;
      const Rational w = a[i] * b[j];
      for (std::size_t k = 0; k < n; ++k)
        if (table_[i][j][k] != 0) out[k] += w * table_[i][j][k];
    }
  }
  return out;
}

RationalMatrix StructureConstants::ad(const RationalVector& a) const {
  const std::size_t n = dimension();
  RationalMatrix m(n, RationalVector(n, 0));
  for (std::size_t j = 0; j < n; ++j) {
    RationalVector e(n, 0);
    e[j] = 1;
    const RationalVector col = bracket(a, e);
    for (std::size_t k = 0; k < n; ++k) m[k][j] = col[k];
  }
  return m;
}

void StructureConstants::check_jacobi() const {
  const std::size_t n = dimension();
  auto unit = [n](std::size_t i) {
    RationalVector e(n, 0);
    e[i] = 1;
    return e;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_zero(table_[i][i]))
      throw JacobiViolation("[" + labels_[i] + ", " + labels_[i] + "] is not zero");
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        if (table_[i][j][k] != -table_[j][i][k])
          throw JacobiViolation("table is not antisymmetric at [" + labels_[i] + ", " +
                                labels_[j] + "]");
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        RationalVector sum = bracket(bracket(unit(i), unit(j)), unit(k));
        const RationalVector b = bracket(bracket(unit(j), unit(k)), unit(i));
        const RationalVector c = bracket(bracket(unit(k), unit(i)), unit(j));
        for (std::size_t m = 0; m < n; ++m) sum[m] += b[m] + c[m];
        if (!is_zero(sum))
          throw JacobiViolation("Jacobi identity fails for (" + labels_[i] + ", " + labels_[j] +
                                ", " + labels_[k] + ")");
      }
}

std::string StructureConstants::to_text() const {
  std::string out = "labels:";
  for (const auto& l : labels_) out += " " + l;
  out += "\n";
  for (std::size_t i = 0; i < dimension(); ++i)
    for (std::size_t j = i + 1; j < dimension(); ++j) {
      const RationalVector& v = table_[i][j];
      if (is_zero(v)) continue;
      out += "[" + std::to_string(i) + "," + std::to_string(j) + "] -> {";
      bool first = true;
      for (std::size_t k = 0; k < v.size(); ++k) {
        if (v[k] == 0) continue;
        out += (first ? "" : ", ") + std::to_string(k) + ": " + to_string(v[k]);
        first = false;
      }
      out += "}\n";
    }
  return out;
}

StructureConstants StructureConstants::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  std::optional<StructureConstants> sc;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line.compare(first, 2, "//") == 0) continue;
    if (line.compare(first, 7, "labels:") == 0) {
      std::istringstream words(line.substr(first + 7));
      std::vector<std::string> labels;
      std::string w;
      while (words >> w) labels.push_back(w);
      if (labels.empty()) throw ParseError("no labels", line_no, 1);
      sc.emplace(std::move(labels));
      continue;
    }
    if (!sc) throw ParseError("'labels:' must come first", line_no, 1);
    std::size_t i = 0, j = 0;
    char c1 = 0, c2 = 0, c3 = 0;
    std::istringstream head(line.substr(first));
    if (!(head >> c1 >> i >> c2 >> j >> c3) || c1 != '[' || c2 != ',' || c3 != ']')
      throw ParseError("expected '[i,j] -> {k: c, ...}'", line_no, static_cast<int>(first) + 1);
    const auto open = line.find('{'), close = line.rfind('}');
    const auto arrow = line.find("->");
    if (arrow == std::string::npos || open == std::string::npos || close == std::string::npos ||
        close < open)
      throw ParseError("expected '-> {k: c, ...}'", line_no, static_cast<int>(first) + 1);
    const std::size_t n = sc->dimension();
    if (i >= n || j >= n || i == j)
      throw ParseError("bracket indices out of range", line_no, static_cast<int>(first) + 1);
    RationalVector v(n, 0);
    std::string body = line.substr(open + 1, close - open - 1);
    std::istringstream entries(body);
    std::string entry;
    while (std::getline(entries, entry, ',')) {
      const auto colon = entry.find(':');
      if (colon == std::string::npos) {
        if (entry.find_first_not_of(" \t") == std::string::npos) continue;
        throw ParseError("expected 'k: c'", line_no, static_cast<int>(open) + 2);
      }
      std::size_t k = 0;
      try {
        k = std::stoul(entry.substr(0, colon));
      } catch (const std::exception&) {
        throw ParseError("bad basis index", line_no, static_cast<int>(open) + 2);
      }
      if (k >= n) throw ParseError("basis index out of range", line_no, static_cast<int>(open) + 2);
      Expression value = parse_expression(entry.substr(colon + 1));
      if (!value.is_constant()) throw ParseError("constant must be rational", line_no, 1);
      v[k] = value.constant_value();
    }
    sc->set(i, j, v);
  }
  if (!sc) throw ParseError("empty structure constant table", line_no + 1, 1);
  return *sc;
}

// --------------------------------------------------------------- truncate

std::optional<RationalVector> express_in_span(const VectorField& field,
                                              const std::vector<VectorField>& basis) {
  const std::size_t n = basis.size();
  std::vector<Atom> unknowns;
  for (std::size_t k = 0; k < n; ++k) unknowns.push_back(Atom::parameter("$c" + std::to_string(k)));
  auto is_unknown = [&](const Atom& a) {
    return a.is_parameter() && !a.name().empty() && a.name()[0] == '$';
  };
  RationalMatrix rows;
  RationalVector rhs;
  for (const auto& coord : field.coordinates()) {
    Expression combo = -field.coefficient(coord);
    for (std::size_t k = 0; k < n; ++k)
      combo += Expression(unknowns[k]) * basis[k].coefficient(coord);
    for (const auto& [monomial, cofactor] :
         split_numerator(combo, [&](const Atom& a) { return !is_unknown(a); })) {
      (void)monomial;
      RationalVector row(n, 0);
      Rational constant = 0;
      for (const auto& t : cofactor.terms()) {
        if (t.monomial.is_one()) {
          constant += t.coefficient;
          continue;
        }
        const auto& factors = t.monomial.factors();
        std::size_t k = 0;
        while (k < n && factors.front().first != unknowns[k]) ++k;
        if (factors.size() != 1 || factors.front().second != 1 || k == n)
          throw std::logic_error("span equation is not linear in the unknowns");
        row[k] += t.coefficient;
      }
      rows.push_back(std::move(row));
      rhs.push_back(-constant);
    }
  }
  if (rows.empty()) return RationalVector(n, 0);
  return solve(rows, rhs, n);
}

StructureConstants truncate(const std::vector<VectorField>& generators,
                            const std::vector<std::string>& given) {
  const std::size_t n = generators.size();
  std::vector<std::string> labels = given;
  if (labels.empty())
    for (std::size_t i = 0; i < n; ++i) labels.push_back("e" + std::to_string(i));
  if (labels.size() != n) throw std::invalid_argument("one label per generator required");
  // Independence: only the trivial combination gives the zero field.
  if (n > 0) {
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<VectorField> others;
      for (std::size_t m = 0; m < n; ++m)
        if (m != k) others.push_back(generators[m]);
      if (express_in_span(generators[k], others))
        throw RankError("generator " + labels[k] + " lies in the span of the others");
    }
  }
  StructureConstants sc(labels);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const VectorField b = bracket(generators[i], generators[j]);
      auto coords = express_in_span(b, generators);
      if (!coords)
        throw ClosureViolation("[" + labels[i] + ", " + labels[j] + "] = " + to_string(b) +
                               " leaves the span");
      sc.set(i, j, *coords);
    }
  return sc;
}

// ------------------------------------------------------------------- Levi

namespace {

RationalVector unit(std::size_t n, std::size_t i) {
  RationalVector e(n, 0);
  e[i] = 1;
  return e;
}

Rational trace_product(const RationalMatrix& a, const RationalMatrix& b) {
  Rational t = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < a.size(); ++k) t += a[i][k] * b[k][i];
  return t;
}

RationalMatrix killing_form(const StructureConstants& sc, const RationalMatrix& basis) {
  std::vector<RationalMatrix> ads;
  for (const auto& v : basis) ads.push_back(sc.ad(v));
  RationalMatrix k(basis.size(), RationalVector(basis.size(), 0));
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = i; j < basis.size(); ++j) k[i][j] = k[j][i] = trace_product(ads[i], ads[j]);
  return k;
}

RationalMatrix bracket_span(const StructureConstants& sc, const RationalMatrix& a,
                            const RationalMatrix& b) {
  RationalMatrix rows;
  for (const auto& u : a)
    for (const auto& v : b) rows.push_back(sc.bracket(u, v));
  return row_basis(rows, sc.dimension());
}

bool contained(const RationalMatrix& rows, const RationalMatrix& span) {
  for (const auto& r : rows)
    if (!coordinates_in(span, r)) return false;
  return true;
}

// Rows p with p . v = 0 exactly for v in span(rows).
RationalMatrix annihilator(const RationalMatrix& rows, std::size_t n) {
  return nullspace(rows, n);
}

Rational dot(const RationalVector& a, const RationalVector& b) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

LeviReport levi_report(const StructureConstants& sc) {
  sc.check_jacobi();
  const std::size_t n = sc.dimension();
  LeviReport rep;
  rep.dimension = n;
  RationalMatrix identity;
  for (std::size_t i = 0; i < n; ++i) identity.push_back(unit(n, i));
  rep.killing = killing_form(sc, identity);

  // Derived series of L.
  RationalMatrix current = identity;
  rep.derived_series.push_back(n);
  while (!current.empty()) {
    RationalMatrix next = bracket_span(sc, current, current);
    if (next.size() == current.size()) break;
    rep.derived_series.push_back(next.size());
    current = std::move(next);
  }
  const RationalMatrix derived = bracket_span(sc, identity, identity);

  // Radical: Killing-orthogonal complement of [L, L].
  rep.radical = row_basis(nullspace(multiply(derived, rep.killing), n), n);
  for (std::size_t i = 0; i < n; ++i)
    if (coordinates_in(rep.radical, unit(n, i))) rep.radical_indices.push_back(i);
  if (rep.radical_indices.size() != rep.radical.size()) rep.radical_indices.clear();

  std::vector<RationalMatrix> layers{rep.radical};
  rep.radical_derived_series.push_back(rep.radical.size());
  while (!layers.back().empty()) {
    RationalMatrix next = bracket_span(sc, layers.back(), layers.back());
    if (next.size() == layers.back().size())
      throw std::logic_error("Killing-orthogonal complement of [L,L] is not solvable");
    rep.radical_derived_series.push_back(next.size());
    layers.push_back(std::move(next));
  }
  rep.radical_is_ideal = contained(bracket_span(sc, identity, rep.radical), rep.radical);

  // Vector-space complement: unit vectors on the non-pivot columns of R.
  std::vector<bool> pivot(n, false);
  for (auto p : row_reduce(rep.radical, n).pivots) pivot[p] = true;
  RationalMatrix x;
  for (std::size_t i = 0; i < n; ++i)
    if (!pivot[i]) x.push_back(unit(n, i));
  const std::size_t s = x.size();

  // Structure of L/R in the x basis.
  RationalMatrix full = x;
  full.insert(full.end(), rep.radical.begin(), rep.radical.end());
  std::vector<std::vector<RationalVector>> gamma(s, std::vector<RationalVector>(s));
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) {
      auto c = coordinates_in(full, sc.bracket(x[i], x[j]));
      gamma[i][j] = RationalVector(c->begin(), c->begin() + static_cast<long>(s));
    }

  // Correct x_i by elements of R_t so the brackets close modulo R_{t+1}.
  for (std::size_t t = 0; t + 1 < layers.size(); ++t) {
    const RationalMatrix& rt = layers[t];
    const RationalMatrix ann = annihilator(layers[t + 1], n);
    const std::size_t d = rt.size();
    const std::size_t unknowns = s * d;
    RationalMatrix rows;
    RationalVector rhs;
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = i + 1; j < s; ++j) {
        RationalVector defect = sc.bracket(x[i], x[j]);
        for (std::size_t k = 0; k < s; ++k)
          for (std::size_t m = 0; m < n; ++m) defect[m] -= gamma[i][j][k] * x[k][m];
        for (const auto& p : ann) {
          RationalVector row(unknowns, 0);
          for (std::size_t a = 0; a < d; ++a) {
            row[j * d + a] += dot(p, sc.bracket(x[i], rt[a]));
            row[i * d + a] -= dot(p, sc.bracket(x[j], rt[a]));
            for (std::size_t k = 0; k < s; ++k) row[k * d + a] -= gamma[i][j][k] * dot(p, rt[a]);
          }
          rows.push_back(std::move(row));
          rhs.push_back(-dot(p, defect));
        }
      }
    if (rows.empty()) continue;
    auto u = solve(rows, rhs, unknowns);
    if (!u) throw std::logic_error("no Levi correction at radical layer " + std::to_string(t));
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t m = 0; m < n; ++m) x[i][m] += (*u)[i * d + a] * rt[a][m];
  }
  rep.complement = x;

  // Checks on the complement.
  rep.complement_is_subalgebra = contained(bracket_span(sc, x, x), row_basis(x, n));
  rep.complement_radical_in_radical = contained(bracket_span(sc, x, rep.radical), rep.radical);
  if (s > 0 && rep.complement_is_subalgebra) {
    StructureConstants sub(std::vector<std::string>(s, "s"));
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = i + 1; j < s; ++j) sub.set(i, j, *coordinates_in(x, sc.bracket(x[i], x[j])));
    RationalMatrix sub_identity;
    for (std::size_t i = 0; i < s; ++i) sub_identity.push_back(unit(s, i));
    rep.complement_killing_rank = rank(killing_form(sub, sub_identity), s);
  }
  rep.complement_semisimple = rep.complement_is_subalgebra && rep.complement_killing_rank == s;
  return rep;
}

std::string LeviReport::to_text(const std::vector<std::string>& labels) const {
  auto combo = [&](const RationalVector& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] == 0) continue;
      if (!out.empty()) out += v[i] > 0 ? " + " : " - ";
      else if (v[i] < 0) out += "-";
      Rational mag = abs(v[i]);
      if (mag != 1) out += to_string(mag) + "*";
      out += i < labels.size() ? labels[i] : "e" + std::to_string(i);
    }
    return out.empty() ? std::string("0") : out;
  };
  auto dims = [](const std::vector<std::size_t>& v) {
    std::string out;
    for (auto d : v) out += (out.empty() ? "" : " ") + std::to_string(d);
    return out;
  };
  std::ostringstream os;
  os << "dimension: " << dimension << "\n";
  os << "derived series: " << dims(derived_series) << "\n";
  os << "radical dim: " << radical.size() << "\n";
  if (!radical_indices.empty()) {
    os << "radical basis:";
    for (auto i : radical_indices) os << " " << (i < labels.size() ? labels[i] : std::to_string(i));
    os << "\n";
  } else {
    for (const auto& r : radical) os << "radical vector: " << combo(r) << "\n";
  }
  os << "radical derived series: " << dims(radical_derived_series) << "\n";
  os << "radical is ideal: " << (radical_is_ideal ? "yes" : "no") << "\n";
  os << "complement dim: " << complement.size() << "\n";
  for (const auto& c : complement) os << "complement vector: " << combo(c) << "\n";
  os << "complement is subalgebra: " << (complement_is_subalgebra ? "yes" : "no") << "\n";
  os << "complement killing rank: " << complement_killing_rank << "\n";
  os << "complement semisimple: " << (complement_semisimple ? "yes" : "no") << "\n";
  os << "[complement, radical] in radical: " << (complement_radical_in_radical ? "yes" : "no")
     << "\n";
  return os.str();
}

// -------------------------------------------------------------- snapshots

std::vector<VectorField> snapshot(std::string_view name, std::vector<std::string>& labels) {
  const Expression x(Atom::independent("x"));
  const std::vector<std::pair<std::string, Expression>> monomials{
      {"1", Expression(1)}, {"x", x}, {"x^2", x.pow(2)}, {"x^3", x.pow(3)}};
  std::size_t degree = 2;
  bool with_x1 = true, with_x2 = true;
  if (name == "deg2") {
  } else if (name == "x1deg2") {
    with_x2 = false;
  } else if (name == "x2deg2") {
    with_x1 = false;
  } else if (name == "deg3") {
    degree = 3;
  } else {
    throw std::invalid_argument("unknown snapshot '" + std::string(name) +
                                "' (deg2, x1deg2, x2deg2, deg3)");
  }
  std::vector<VectorField> out;
  labels.clear();
  if (with_x1)
    for (std::size_t d = 0; d <= degree; ++d) {
      out.push_back(x1_generator(monomials[d].second, Expression()));
      labels.push_back("X1(" + monomials[d].first + ",0)");
    }
  if (with_x2)
    for (std::size_t d = 0; d <= degree; ++d) {
      out.push_back(x2_generator(monomials[d].second));
      labels.push_back("X2(" + monomials[d].first + ")");
    }
  return out;
}

}  // namespace symlie
