#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "symlie/polynomial.hpp"

namespace symlie {

using RationalVector = std::vector<Rational>;
using RationalMatrix = std::vector<RationalVector>;  // row-major

struct RowEchelon {
  RationalMatrix reduced;           // reduced row echelon form, zero rows dropped
  std::vector<std::size_t> pivots;  // pivot column of each row
};

/// Gauss-Jordan elimination over the rationals; `columns` is needed when
/// the matrix has no rows.
RowEchelon row_reduce(RationalMatrix m, std::size_t columns);
std::size_t rank(const RationalMatrix& m, std::size_t columns);
/// Basis of { v : m v = 0 }.
RationalMatrix nullspace(const RationalMatrix& m, std::size_t columns);
/// One solution of m v = b, or nullopt when inconsistent.
std::optional<RationalVector> solve(const RationalMatrix& m, const RationalVector& b,
                                    std::size_t columns);
/// Independent rows spanning the same space (the reduced echelon rows).
RationalMatrix row_basis(const RationalMatrix& rows, std::size_t columns);
/// Coordinates of v in the given independent rows, or nullopt if outside their span.
std::optional<RationalVector> coordinates_in(const RationalMatrix& basis, const RationalVector& v);

RationalMatrix multiply(const RationalMatrix& a, const RationalMatrix& b);
RationalMatrix transpose(const RationalMatrix& a, std::size_t columns);
bool is_zero(const RationalVector& v);

}  // namespace symlie
