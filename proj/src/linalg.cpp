#include "symlie/linalg.hpp"

#include <algorithm>
#include <stdexcept>

namespace symlie {

RowEchelon row_reduce(RationalMatrix m, std::size_t columns) {
  RowEchelon out;
  std::size_t row = 0;
  for (std::size_t col = 0; col < columns && row < m.size(); ++col) {
    std::size_t pivot = row;
    while (pivot < m.size() && m[pivot][col] == 0) ++pivot;
    if (pivot == m.size()) continue;
    std::swap(m[row], m[pivot]);
    const Rational inv = 1 / m[row][col];
    for (auto& v : m[row]) v *= inv;
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == row || m[r][col] == 0) continue;
      const Rational factor = m[r][col];
      for (std::size_t c = col; c < columns; ++c) m[r][c] -= factor * m[row][c];
    }
    out.pivots.push_back(col);
    ++row;
  }
  m.resize(row);
  out.reduced = std::move(m);
  return out;
}

std::size_t rank(const RationalMatrix& m, std::size_t columns) {
  return row_reduce(m, columns).pivots.size();
}

RationalMatrix nullspace(const RationalMatrix& m, std::size_t columns) {
  const RowEchelon e = row_reduce(m, columns);
  std::vector<bool> is_pivot(columns, false);
  for (auto p : e.pivots) is_pivot[p] = true;
  RationalMatrix basis;
  for (std::size_t free = 0; free < columns; ++free) {
    if (is_pivot[free]) continue;
    RationalVector v(columns, 0);
    v[free] = 1;
    for (std::size_t r = 0; r < e.pivots.size(); ++r) v[e.pivots[r]] = -e.reduced[r][free];
    basis.push_back(std::move(v));
  }
  return basis;
}

std::optional<RationalVector> solve(const RationalMatrix& m, const RationalVector& b,
                                    std::size_t columns) {
  if (b.size() != m.size()) throw std::invalid_argument("solve: size mismatch");
  RationalMatrix augmented = m;
  for (std::size_t r = 0; r < m.size(); ++r) augmented[r].push_back(b[r]);
  const RowEchelon e = row_reduce(std::move(augmented), columns + 1);
  RationalVector x(columns, 0);
  for (std::size_t r = 0; r < e.pivots.size(); ++r) {
    if (e.pivots[r] == columns) return std::nullopt;
    x[e.pivots[r]] = e.reduced[r][columns];
  }
  return x;
}

RationalMatrix row_basis(const RationalMatrix& rows, std::size_t columns) {
  return row_reduce(rows, columns).reduced;
}

std::optional<RationalVector> coordinates_in(const RationalMatrix& basis, const RationalVector& v) {
  if (basis.empty()) {
    if (is_zero(v)) return RationalVector{};
    return std::nullopt;
  }
  const std::size_t n = v.size();
  // Solve sum_i c_i basis_i = v, i.e. basis^T c = v.
  return solve(transpose(basis, n), v, basis.size());
}

RationalMatrix multiply(const RationalMatrix& a, const RationalMatrix& b) {
  if (a.empty()) return {};
  const std::size_t inner = b.size();
  const std::size_t cols = inner ? b.front().size() : 0;
  RationalMatrix out(a.size(), RationalVector(cols, 0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < inner; ++k) {
      if (a[i][k] == 0) continue;
      for (std::size_t j = 0; j < cols; ++j) out[i][j] += a[i][k] * b[k][j];
    }
  return out;
}

RationalMatrix transpose(const RationalMatrix& a, std::size_t columns) {
  RationalMatrix out(columns, RationalVector(a.size(), 0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < columns; ++j) out[j][i] = a[i][j];
  return out;
}

bool is_zero(const RationalVector& v) {
  return std::all_of(v.begin(), v.end(), [](const Rational& x) { return x == 0; });
}

}  // namespace symlie
