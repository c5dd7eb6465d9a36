#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace linlayout {

/// A vector over F2 with at most 64 entries. Bit 0 is the least significant
/// bit and the first entry of the vector.
using BitVec = std::uint64_t;

inline constexpr int kMaxBits = 64;

inline BitVec unit(int i) { return BitVec{1} << i; }
inline BitVec low_mask(int n) {
  return n >= 64 ? ~BitVec{0} : (BitVec{1} << n) - 1;
}
int popcount(BitVec v);

/// Renders the first `len` entries LSB-first, so "101" is the value 5.
std::string to_bitstring(BitVec v, int len);
BitVec from_bitstring(const std::string &s);

/// Dense matrix over F2, stored column-major: column j is a BitVec whose bit i
/// is entry (i, j). Both dimensions are capped at 64.
class BitMatrix {
public:
  BitMatrix() = default;
  BitMatrix(int rows, int cols);
  BitMatrix(int rows, std::vector<BitVec> columns);

  static BitMatrix identity(int n);
  /// Rows given as nested lists, e.g. {{1, 0}, {1, 1}}.
  static BitMatrix from_rows(const std::vector<std::vector<int>> &rows);

  int rows() const { return rows_; }
  int cols() const { return static_cast<int>(cols_.size()); }

  BitVec column(int j) const { return cols_.at(j); }
  std::span<const BitVec> columns() const { return cols_; }
  BitVec row(int i) const;

  bool get(int i, int j) const { return (cols_.at(j) >> i) & 1; }
  void set(int i, int j, bool value);
  void set_column(int j, BitVec v);

  /// Matrix-vector product: XOR of the columns selected by x.
  BitVec apply(BitVec x) const;

  BitMatrix transpose() const;
  int rank() const;
  int weight() const;
  bool is_zero() const;

  /// Submatrix of rows [r0, r0+nr) and columns [c0, c0+nc).
  BitMatrix block(int r0, int nr, int c0, int nc) const;

  friend bool operator==(const BitMatrix &, const BitMatrix &) = default;

  std::string to_string() const;
  std::string shape_string() const;

private:
  int rows_ = 0;
  std::vector<BitVec> cols_;
};

BitMatrix operator*(const BitMatrix &a, const BitMatrix &b);
BitMatrix block_diagonal(const BitMatrix &m1, const BitMatrix &m2);

// Operations used throughout the layout code.

/// F2 product; throws Error naming both shapes when a.cols != b.rows.
BitMatrix bm_mul(const BitMatrix &a, const BitMatrix &b);

/// X with m * X = I. Requires full row rank. Free variables are zero, so each
/// column of X only uses the lowest-index pivot columns of m.
BitMatrix bm_right_inverse(const BitMatrix &m);

/// Returns M2 when m == [[m1, 0], [0, M2]].
BitMatrix bm_left_divide(const BitMatrix &m, const BitMatrix &m1);

/// X with b * X = a. Each column starts from the solution with every free
/// variable set to zero; when the system has few enough free variables the
/// free assignments are searched exhaustively and a strictly lighter solution
/// replaces it.
BitMatrix bm_solve_min_weight(const BitMatrix &b, const BitMatrix &a);

/// Number of free variables up to which bm_solve_min_weight searches
/// exhaustively.
inline constexpr int kMinWeightSearchLimit = 16;

/// Ordered set of linearly independent vectors in F2^dim.
struct Basis {
  int dim = 0;
  std::vector<BitVec> vectors;

  int size() const { return static_cast<int>(vectors.size()); }
};

/// Checks independence and range; throws Error otherwise.
void validate_basis(const Basis &b);

/// Extends `partial` to a basis of F2^dim by appending the lowest-index
/// standard basis vectors that are outside the current span.
Basis basis_complete(const Basis &partial);

/// log2 of |span(u) ∩ span(v)|.
int span_intersection_dim(const Basis &u, const Basis &v);

/// Incremental row-echelon form used for rank and membership queries.
class SpanBuilder {
public:
  explicit SpanBuilder(int dim = kMaxBits) : dim_(dim) {}

  /// Adds v; returns false if v was already in the span.
  bool insert(BitVec v);
  bool contains(BitVec v) const;
  BitVec reduce(BitVec v) const;
  int rank() const { return static_cast<int>(pivots_.size()); }
  int dim() const { return dim_; }

private:
  int dim_;
  // pivot bit -> reduced vector with that leading bit
  std::vector<std::pair<int, BitVec>> pivots_;
};

int rank_of(std::span<const BitVec> vectors);

} // namespace linlayout
