#include "linlayout/bit_matrix.hpp"
#include "linlayout/error.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace linlayout;

namespace {

std::set<BitVec> span_set(const std::vector<BitVec> &vs) {
  std::set<BitVec> s{0};
  for (BitVec v : vs) {
    std::set<BitVec> next = s;
    for (BitVec x : s)
      next.insert(x ^ v);
    s = std::move(next);
  }
  return s;
}

// Lightest x with b * x == a, by enumerating every x.
int brute_min_weight(const BitMatrix &b, BitVec a) {
  int best = -1;
  for (BitVec x = 0; x < (BitVec{1} << b.cols()); ++x)
    if (b.apply(x) == a && (best < 0 || popcount(x) < best))
      best = popcount(x);
  return best;
}

} // namespace

TEST(BitVecTest, BitstringRoundTrip) {
  EXPECT_EQ(to_bitstring(5, 3), "101");
  EXPECT_EQ(to_bitstring(1, 4), "1000");
  EXPECT_EQ(from_bitstring("011"), 6u);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    BitVec v = lltest::random_vec(rng, 20);
    EXPECT_EQ(from_bitstring(to_bitstring(v, 20)), v);
  }
}

TEST(BitMatrixTest, RowsAndColumnsAgree) {
  BitMatrix m = BitMatrix::from_rows({{1, 0, 1}, {0, 1, 1}});
  EXPECT_EQ(m.rows(), 2);
  EXPECT_EQ(m.cols(), 3);
  EXPECT_EQ(m.column(2), 3u);
  EXPECT_EQ(m.row(0), 5u);
  EXPECT_EQ(m.apply(0b111), 0u);
  EXPECT_EQ(m.transpose().transpose(), m);
}

TEST(BitMatrixTest, MultiplyShapeMismatchThrows) {
  EXPECT_THROW(bm_mul(BitMatrix(2, 3), BitMatrix(2, 2)), Error);
}

TEST(BitMatrixTest, ProductMatchesApply) {
  std::mt19937_64 rng(2);
  for (int it = 0; it < 200; ++it) {
    BitMatrix a = lltest::random_matrix(rng, 7, 5);
    BitMatrix b = lltest::random_matrix(rng, 5, 6);
    BitMatrix ab = bm_mul(a, b);
    for (int k = 0; k < 10; ++k) {
      BitVec x = lltest::random_vec(rng, 6);
      EXPECT_EQ(ab.apply(x), a.apply(b.apply(x)));
    }
  }
}

TEST(BitMatrixTest, RightInverse) {
  std::mt19937_64 rng(3);
  int done = 0;
  while (done < 200) {
    BitMatrix m = lltest::random_matrix(rng, 6, 9);
    if (m.rank() < 6) {
      EXPECT_THROW(bm_right_inverse(m), Error);
      continue;
    }
    EXPECT_EQ(bm_mul(m, bm_right_inverse(m)), BitMatrix::identity(6));
    ++done;
  }
}

TEST(BitMatrixTest, LeftDivideRecoversBlock) {
  BitMatrix m1 = BitMatrix::identity(2);
  BitMatrix m2 = BitMatrix::from_rows({{1, 1}, {0, 1}});
  BitMatrix m = block_diagonal(m1, m2);
  EXPECT_EQ(bm_left_divide(m, m1), m2);
  BitMatrix bad = m;
  bad.set(0, 3, true);
  EXPECT_THROW(bm_left_divide(bad, m1), Error);
}

TEST(BitMatrixTest, MinWeightMatchesExhaustiveSearch) {
  std::mt19937_64 rng(4);
  for (int it = 0; it < 300; ++it) {
    int rows = 1 + static_cast<int>(rng() % 5);
    int cols = rows + static_cast<int>(rng() % 7);
    BitMatrix b = lltest::random_matrix(rng, rows, cols);
    BitVec target = b.apply(lltest::random_vec(rng, cols));
    BitMatrix x = bm_solve_min_weight(b, BitMatrix(rows, std::vector<BitVec>{target}));
    EXPECT_EQ(b.apply(x.column(0)), target);
    EXPECT_EQ(popcount(x.column(0)), brute_min_weight(b, target));
  }
}

TEST(BitMatrixTest, SolveOutsideSpanThrows) {
  BitMatrix b = BitMatrix::from_rows({{1, 0}, {1, 0}});
  EXPECT_THROW(bm_solve_min_weight(b, BitMatrix(2, std::vector<BitVec>{1})), Error);
}

TEST(BasisTest, CompleteUsesLowestStandardVectors) {
  Basis b{3, {0b101}};
  Basis full = basis_complete(b);
  ASSERT_EQ(full.size(), 3);
  EXPECT_EQ(full.vectors[0], 0b101u);
  EXPECT_EQ(full.vectors[1], 0b001u);
  EXPECT_EQ(full.vectors[2], 0b010u);
  EXPECT_THROW(validate_basis(Basis{2, {1, 2, 3}}), Error);
  EXPECT_THROW(validate_basis(Basis{2, {4}}), Error);
}

TEST(BasisTest, IntersectionDimensionMatchesEnumeration) {
  std::mt19937_64 rng(5);
  for (int it = 0; it < 300; ++it) {
    int dim = 1 + static_cast<int>(rng() % 7);
    auto pick = [&](int n) {
      SpanBuilder sb(dim);
      std::vector<BitVec> vs;
      for (int k = 0; k < n; ++k) {
        BitVec v = lltest::random_vec(rng, dim);
        if (sb.insert(v))
          vs.push_back(v);
      }
      return vs;
    };
    std::vector<BitVec> u = pick(static_cast<int>(rng() % 5));
    std::vector<BitVec> v = pick(static_cast<int>(rng() % 5));
    std::set<BitVec> su = span_set(u), sv = span_set(v);
    int common = 0;
    for (BitVec x : su)
      common += sv.count(x);
    int expect = 0;
    while ((1 << expect) < common)
      ++expect;
    EXPECT_EQ(span_intersection_dim(Basis{dim, u}, Basis{dim, v}), expect);
  }
}

TEST(SpanBuilderTest, MembershipAndRank) {
  SpanBuilder sb(4);
  EXPECT_TRUE(sb.insert(0b0011));
  EXPECT_TRUE(sb.insert(0b0110));
  EXPECT_FALSE(sb.insert(0b0101));
  EXPECT_TRUE(sb.contains(0b0101));
  EXPECT_FALSE(sb.contains(0b1000));
  EXPECT_EQ(sb.rank(), 2);
}
