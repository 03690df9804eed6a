#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "symlie/jet.hpp"
#include "symlie/linalg.hpp"

namespace symlie {

/// [X, Y]^i = X(Y^i) - Y(X^i), differentiating through function atoms.
/// Throws CoordinateMismatch for fields on different coordinates.
VectorField bracket(const VectorField& a, const VectorField& b);

struct RelationCheck {
  std::string id;
  std::string statement;
  bool holds = false;
  /// bracket minus the expected right-hand side
  VectorField residue{JetSystem{}};
};

/// "x1-x1", "x2-x2" or "x1-x2", with formal f1, f2, g1, g2, k1, k2.
/// Throws std::invalid_argument for other ids.
RelationCheck verify_relation(std::string_view id);
std::vector<std::string> relation_ids();

/// Rational structure constants [e_i, e_j] = sum_k c^k_ij e_k.
class StructureConstants {
 public:
  explicit StructureConstants(std::vector<std::string> labels);

  std::size_t dimension() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const RationalVector& get(std::size_t i, std::size_t j) const { return table_[i][j]; }
  /// Sets [e_i, e_j] = v and [e_j, e_i] = -v.
  void set(std::size_t i, std::size_t j, const RationalVector& v);
  /// Bracket of two elements given in coordinates.
  RationalVector bracket(const RationalVector& a, const RationalVector& b) const;
  /// ad(a) as a matrix acting on column coordinate vectors.
  RationalMatrix ad(const RationalVector& a) const;

  /// Throws JacobiViolation naming the first failing triple, or when the
  /// table is not antisymmetric.
  void check_jacobi() const;

  /// `labels: ...` then one `[i,j] -> {k: c, ...}` line per nonzero bracket, i < j.
  std::string to_text() const;
  static StructureConstants parse(std::string_view text);

  friend bool operator==(const StructureConstants& a, const StructureConstants& b) {
    return a.labels_ == b.labels_ && a.table_ == b.table_;
  }

 private:
  std::vector<std::string> labels_;
  std::vector<std::vector<RationalVector>> table_;
};

/// Structure constants of the span of `generators`. Throws RankError when
/// the generators are linearly dependent over the rationals and
/// ClosureViolation naming the pair whose bracket leaves the span.
StructureConstants truncate(const std::vector<VectorField>& generators,
                            const std::vector<std::string>& labels = {});

/// Coordinates of `field` in the rational span of `basis`, or nullopt.
std::optional<RationalVector> express_in_span(const VectorField& field,
                                              const std::vector<VectorField>& basis);

struct LeviReport {
  std::size_t dimension = 0;
  /// Killing form of the whole algebra.
  RationalMatrix killing;
  /// Radical as rows of coordinates; indices of basis elements spanning it
  /// when it is spanned by basis elements (empty otherwise).
  RationalMatrix radical;
  std::vector<std::size_t> radical_indices;
  /// Levi complement as rows of coordinates.
  RationalMatrix complement;
  /// Dimensions of L, [L, L], ... until it stabilises.
  std::vector<std::size_t> derived_series;
  /// Dimensions of R, [R, R], ..., ending at 0.
  std::vector<std::size_t> radical_derived_series;
  /// Rank of the Killing form of the complement as an algebra on its own.
  std::size_t complement_killing_rank = 0;
  bool complement_semisimple = false;
  bool complement_is_subalgebra = false;
  bool radical_is_ideal = false;
  /// Every [complement, radical] bracket lies in the radical.
  bool complement_radical_in_radical = false;

  std::string to_text(const std::vector<std::string>& labels) const;
};

/// Radical = Killing-orthogonal complement of [L, L]; the complement is
/// built by correcting a vector-space complement through the derived
/// series of the radical. Throws JacobiViolation on inconsistent input.
LeviReport levi_report(const StructureConstants& sc);

/// Named finite snapshots: "deg2" = X1(1,0), X1(x,0), X1(x^2,0), X2(1),
/// X2(x), X2(x^2); "x1deg2" and "x2deg2" are the two halves; "deg3" adds
/// the cubic terms (not closed). Labels are returned through `labels`.
std::vector<VectorField> snapshot(std::string_view name, std::vector<std::string>& labels);

}  // namespace symlie
