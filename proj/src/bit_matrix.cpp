#include "linlayout/bit_matrix.hpp"

#include "linlayout/error.hpp"

#include <algorithm>
#include <bit>
#include <sstream>
#include <utility>

namespace linlayout {

namespace {

void check_dim(int n, const char *what) {
  if (n < 0 || n > kMaxBits) {
    std::ostringstream os;
    os << what << " " << n << " outside [0, 64]";
    throw Error(os.str());
  }
}

} // namespace

int popcount(BitVec v) { return std::popcount(v); }

std::string to_bitstring(BitVec v, int len) {
  std::string s(static_cast<size_t>(len), '0');
  for (int i = 0; i < len; ++i)
    if ((v >> i) & 1)
      s[i] = '1';
  return s;
}

BitVec from_bitstring(const std::string &s) {
  if (s.size() > kMaxBits)
    throw Error("bit string longer than 64: " + s);
  BitVec v = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '1')
      v |= unit(static_cast<int>(i));
    else if (s[i] != '0')
      throw Error("invalid character in bit string: " + s);
  }
  return v;
}

BitMatrix::BitMatrix(int rows, int cols) : rows_(rows) {
  check_dim(rows, "row count");
  check_dim(cols, "column count");
  cols_.assign(static_cast<size_t>(cols), 0);
}

BitMatrix::BitMatrix(int rows, std::vector<BitVec> columns)
    : rows_(rows), cols_(std::move(columns)) {
  check_dim(rows, "row count");
  check_dim(static_cast<int>(cols_.size()), "column count");
  for (size_t j = 0; j < cols_.size(); ++j) {
    if (cols_[j] & ~low_mask(rows_)) {
      std::ostringstream os;
      os << "column " << j << " has bits beyond row count " << rows_;
      throw Error(os.str());
    }
  }
}

BitMatrix BitMatrix::identity(int n) {
  BitMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    m.cols_[i] = unit(i);
  return m;
}

BitMatrix BitMatrix::from_rows(const std::vector<std::vector<int>> &rows) {
  int nr = static_cast<int>(rows.size());
  int nc = nr == 0 ? 0 : static_cast<int>(rows[0].size());
  BitMatrix m(nr, nc);
  for (int i = 0; i < nr; ++i) {
    if (static_cast<int>(rows[i].size()) != nc)
      throw Error("ragged row list");
    for (int j = 0; j < nc; ++j)
      m.set(i, j, rows[i][j] != 0);
  }
  return m;
}

BitVec BitMatrix::row(int i) const {
  BitVec r = 0;
  for (int j = 0; j < cols(); ++j)
    r |= ((cols_[j] >> i) & 1) << j;
  return r;
}

void BitMatrix::set(int i, int j, bool value) {
  if (i < 0 || i >= rows_)
    throw Error("row index out of range");
  if (value)
    cols_.at(j) |= unit(i);
  else
    cols_.at(j) &= ~unit(i);
}

void BitMatrix::set_column(int j, BitVec v) {
  if (v & ~low_mask(rows_))
    throw Error("column has bits beyond row count");
  cols_.at(j) = v;
}

BitVec BitMatrix::apply(BitVec x) const {
  BitVec out = 0;
  for (int j = 0; j < cols(); ++j)
    if ((x >> j) & 1)
      out ^= cols_[j];
  return out;
}

BitMatrix BitMatrix::transpose() const {
  BitMatrix t(cols(), rows_);
  for (int i = 0; i < rows_; ++i)
    t.cols_[i] = row(i);
  return t;
}

int BitMatrix::rank() const { return rank_of(cols_); }

int BitMatrix::weight() const {
  int w = 0;
  for (BitVec c : cols_)
    w += popcount(c);
  return w;
}

bool BitMatrix::is_zero() const {
  return std::all_of(cols_.begin(), cols_.end(),
                     [](BitVec c) { return c == 0; });
}

BitMatrix BitMatrix::block(int r0, int nr, int c0, int nc) const {
  if (r0 < 0 || nr < 0 || r0 + nr > rows_ || c0 < 0 || nc < 0 ||
      c0 + nc > cols())
    throw Error("block out of range for " + shape_string());
  BitMatrix b(nr, nc);
  for (int j = 0; j < nc; ++j)
    b.cols_[j] = (cols_[c0 + j] >> r0) & low_mask(nr);
  return b;
}

std::string BitMatrix::to_string() const {
  std::ostringstream os;
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols(); ++j)
      os << (j ? " " : "") << (get(i, j) ? '1' : '0');
    os << '\n';
  }
  return os.str();
}

std::string BitMatrix::shape_string() const {
  std::ostringstream os;
  os << rows_ << "x" << cols();
  return os.str();
}

BitMatrix operator*(const BitMatrix &a, const BitMatrix &b) {
  return bm_mul(a, b);
}

BitMatrix bm_mul(const BitMatrix &a, const BitMatrix &b) {
  if (a.cols() != b.rows())
    throw Error("dimension mismatch in product: " + a.shape_string() + " * " +
                b.shape_string());
  std::vector<BitVec> cols(static_cast<size_t>(b.cols()));
  for (int j = 0; j < b.cols(); ++j)
    cols[j] = a.apply(b.column(j));
  return BitMatrix(a.rows(), std::move(cols));
}

BitMatrix block_diagonal(const BitMatrix &m1, const BitMatrix &m2) {
  int rows = m1.rows() + m2.rows();
  std::vector<BitVec> cols;
  cols.reserve(static_cast<size_t>(m1.cols() + m2.cols()));
  for (BitVec c : m1.columns())
    cols.push_back(c);
  for (BitVec c : m2.columns())
    cols.push_back(c << m1.rows());
  return BitMatrix(rows, std::move(cols));
}

namespace {

struct Reduced {
  // Row i of the reduced system: coefficient bits over b's columns, and the
  // right-hand side bits over a's columns.
  std::vector<std::pair<BitVec, BitVec>> rows;
  std::vector<int> pivot_cols; // pivot column of row i, for i < rank
};

Reduced reduce_system(const BitMatrix &b, const BitMatrix &a) {
  Reduced r;
  for (int i = 0; i < b.rows(); ++i)
    r.rows.emplace_back(b.row(i), a.row(i));
  int rank = 0;
  for (int c = 0; c < b.cols() && rank < b.rows(); ++c) {
    int piv = -1;
    for (int i = rank; i < b.rows(); ++i) {
      if ((r.rows[i].first >> c) & 1) {
        piv = i;
        break;
      }
    }
    if (piv < 0)
      continue;
    std::swap(r.rows[rank], r.rows[piv]);
    for (int i = 0; i < b.rows(); ++i) {
      if (i != rank && ((r.rows[i].first >> c) & 1)) {
        r.rows[i].first ^= r.rows[rank].first;
        r.rows[i].second ^= r.rows[rank].second;
      }
    }
    r.pivot_cols.push_back(c);
    ++rank;
  }
  return r;
}

} // namespace

BitMatrix bm_solve_min_weight(const BitMatrix &b, const BitMatrix &a) {
  if (b.rows() != a.rows())
    throw Error("dimension mismatch in solve: " + b.shape_string() + " * X = " +
                a.shape_string());
  Reduced r = reduce_system(b, a);
  int rank = static_cast<int>(r.pivot_cols.size());
  for (int i = rank; i < b.rows(); ++i) {
    if (r.rows[i].second != 0) {
      int j = std::countr_zero(r.rows[i].second);
      std::ostringstream os;
      os << "column " << j << " of the right-hand side is outside the column "
         << "span of the " << b.shape_string() << " matrix";
      throw Error(os.str());
    }
  }

  // Kernel basis: one vector per free column.
  BitVec pivot_mask = 0;
  for (int c : r.pivot_cols)
    pivot_mask |= unit(c);
  std::vector<BitVec> kernel;
  bool search_needed = false;
  for (int f = 0; f < b.cols(); ++f) {
    if ((pivot_mask >> f) & 1)
      continue;
    BitVec n = unit(f);
    for (int i = 0; i < rank; ++i)
      if ((r.rows[i].first >> f) & 1)
        n |= unit(r.pivot_cols[i]);
    kernel.push_back(n);
    // A weight-one kernel vector is a zero column: toggling it only adds
    // weight, so it never improves on the zero-slack solution.
    if (popcount(n) > 1)
      search_needed = true;
  }
  int nfree = static_cast<int>(kernel.size());
  search_needed = search_needed && nfree <= kMinWeightSearchLimit;

  std::vector<BitVec> cols(static_cast<size_t>(a.cols()));
  for (int j = 0; j < a.cols(); ++j) {
    BitVec x = 0;
    for (int i = 0; i < rank; ++i)
      if ((r.rows[i].second >> j) & 1)
        x |= unit(r.pivot_cols[i]);
    if (search_needed) {
      BitVec best = x;
      int best_w = popcount(x);
      BitVec cur = x;
      // Gray-code walk over all free assignments.
      for (std::uint64_t k = 1; k < (std::uint64_t{1} << nfree); ++k) {
        cur ^= kernel[std::countr_zero(k)];
        int w = popcount(cur);
        if (w < best_w) {
          best_w = w;
          best = cur;
        }
      }
      x = best;
    }
    cols[j] = x;
  }
  return BitMatrix(b.cols(), std::move(cols));
}

BitMatrix bm_right_inverse(const BitMatrix &m) {
  SpanBuilder span(m.rows());
  for (BitVec c : m.columns())
    span.insert(c);
  if (span.rank() < m.rows()) {
    for (int i = 0; i < m.rows(); ++i) {
      if (!span.contains(unit(i))) {
        std::ostringstream os;
        os << "matrix " << m.shape_string() << " is not surjective: row " << i
           << " is outside the column span";
        throw Error(os.str());
      }
    }
  }
  return bm_solve_min_weight(m, BitMatrix::identity(m.rows()));
}

BitMatrix bm_left_divide(const BitMatrix &m, const BitMatrix &m1) {
  if (m.rows() < m1.rows() || m.cols() < m1.cols())
    throw Error("cannot divide " + m.shape_string() + " by larger " +
                m1.shape_string());
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      bool in_top = i < m1.rows(), in_left = j < m1.cols();
      bool expected;
      if (in_top && in_left)
        expected = m1.get(i, j);
      else if (in_top != in_left)
        expected = false;
      else
        continue;
      if (m.get(i, j) != expected) {
        std::ostringstream os;
        os << "matrix is not block diagonal over " << m1.shape_string()
           << ": entry (" << i << ", " << j << ") is " << m.get(i, j);
        throw Error(os.str());
      }
    }
  }
  return m.block(m1.rows(), m.rows() - m1.rows(), m1.cols(),
                 m.cols() - m1.cols());
}

bool SpanBuilder::insert(BitVec v) {
  v = reduce(v);
  if (v == 0)
    return false;
  int lead = 63 - std::countl_zero(v);
  // Keep the stored vectors fully reduced against each other's pivots.
  for (auto &[p, w] : pivots_)
    if ((w >> lead) & 1)
      w ^= v;
  pivots_.emplace_back(lead, v);
  return true;
}

BitVec SpanBuilder::reduce(BitVec v) const {
  for (const auto &[p, w] : pivots_)
    if ((v >> p) & 1)
      v ^= w;
  return v;
}

bool SpanBuilder::contains(BitVec v) const { return reduce(v) == 0; }

int rank_of(std::span<const BitVec> vectors) {
  SpanBuilder s;
  for (BitVec v : vectors)
    s.insert(v);
  return s.rank();
}

void validate_basis(const Basis &b) {
  check_dim(b.dim, "basis dimension");
  SpanBuilder s(b.dim);
  for (size_t i = 0; i < b.vectors.size(); ++i) {
    BitVec v = b.vectors[i];
    if (v & ~low_mask(b.dim))
      throw Error("basis vector " + to_bitstring(v, kMaxBits) +
                  " exceeds dimension");
    if (!s.insert(v)) {
      std::ostringstream os;
      os << "basis vector " << i << " (" << to_bitstring(v, b.dim)
         << ") is dependent on the previous ones";
      throw Error(os.str());
    }
  }
}

Basis basis_complete(const Basis &partial) {
  validate_basis(partial);
  Basis out = partial;
  SpanBuilder s(partial.dim);
  for (BitVec v : partial.vectors)
    s.insert(v);
  for (int i = 0; i < partial.dim && s.rank() < partial.dim; ++i)
    if (s.insert(unit(i)))
      out.vectors.push_back(unit(i));
  return out;
}

int span_intersection_dim(const Basis &u, const Basis &v) {
  if (u.dim != v.dim)
    throw Error("span intersection of bases in different dimensions");
  std::vector<BitVec> all = u.vectors;
  all.insert(all.end(), v.vectors.begin(), v.vectors.end());
  return rank_of(u.vectors) + rank_of(v.vectors) - rank_of(all);
}

} // namespace linlayout
