#include "linlayout/constructors.hpp"
#include "linlayout/error.hpp"
#include "linlayout/text_format.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace linlayout;

namespace {

BlockedSpec spec_a() { return {{4, 4}, {1, 1}, {2, 3}, {1, 0}, {1, 0}}; }

// Direct xor-swizzle address of element (i, j), reduced to the row width.
std::uint64_t swizzle_offset(const SwizzleSpec &s, std::uint64_t i, std::uint64_t j) {
  std::uint64_t phase = (i / s.per_phase) % s.max_phase;
  std::uint64_t col = ((phase ^ (j / s.vec)) * s.vec) ^ (j % s.vec);
  return (i << s.n) | (col & low_mask(s.n));
}

} // namespace

TEST(BlockedTest, ReproducesDisplayedMatrix) {
  BitMatrix expect = BitMatrix::from_rows({
      {1, 0, 0, 0, 0, 0, 0, 0},
      {0, 0, 1, 0, 0, 0, 0, 0},
      {0, 0, 0, 1, 0, 0, 0, 0},
      {0, 0, 0, 0, 1, 0, 0, 0},
      {0, 1, 0, 0, 0, 0, 0, 0},
      {0, 0, 0, 0, 0, 1, 0, 0},
      {0, 0, 0, 0, 0, 0, 1, 0},
      {0, 0, 0, 0, 0, 0, 0, 1},
  });
  LinearLayout a = blocked(spec_a());
  EXPECT_EQ(a.matrix(), expect);
  EXPECT_EQ(a.ins(), (std::vector<DimLabel>{{"reg", 2}, {"thread", 5}, {"warp", 1}}));
}

TEST(BlockedTest, TableRows) {
  LinearLayout a = blocked(spec_a());
  struct Row {
    TensorPoint loc;
    HwPoint hw;
  };
  std::vector<Row> rows = {
      {{0, 0}, {0, 0, 0}}, {{0, 1}, {1, 0, 0}}, {{0, 2}, {0, 1, 0}},
      {{0, 3}, {1, 1, 0}}, {{1, 0}, {2, 0, 0}}, {{1, 1}, {3, 0, 0}},
      {{2, 2}, {0, 9, 0}}, {{2, 3}, {1, 9, 0}}, {{3, 2}, {2, 9, 0}},
      {{3, 3}, {3, 9, 0}},
  };
  for (const Row &r : rows)
    EXPECT_EQ(ll_apply(a, r.hw), r.loc);
}

TEST(BlockedTest, RejectsUncoveredShape) {
  BlockedSpec s = spec_a();
  s.size_per_thread = {2, 1};
  EXPECT_THROW(blocked(s), Error);
  s = spec_a();
  s.order = {0, 0};
  EXPECT_THROW(blocked(s), Error);
}

TEST(BlockedTest, RandomSpecsAreBijective) {
  std::mt19937_64 rng(21);
  for (int it = 0; it < 100; ++it) {
    int rank = 1 + static_cast<int>(rng() % 3);
    BlockedSpec s;
    for (int k = 0; k < rank; ++k) {
      std::vector<int> parts = lltest::random_split(rng, static_cast<int>(rng() % 5), 3);
      s.shape.push_back(parts[0] + parts[1] + parts[2]);
      s.size_per_thread.push_back(parts[0]);
      s.threads_per_warp.push_back(parts[1]);
      s.warps_per_cta.push_back(parts[2]);
      s.order.push_back(k);
    }
    std::shuffle(s.order.begin(), s.order.end(), rng);
    LinearLayout l = blocked(s);
    EXPECT_TRUE(l.is_surjective());
    EXPECT_TRUE(l.is_injective());
    EXPECT_TRUE(ll_is_distributed(l));
    EXPECT_EQ(parse_layout(print_layout("B", l)).layout, l);
  }
}

TEST(MmaTest, Fp16OperandA) {
  LinearLayout l = mma_tile({MmaKind::mma, MmaOperand::lhs, 16, {0, 0}, {1, 0}});
  EXPECT_EQ(l.out_size("dim0"), 4);
  EXPECT_EQ(l.out_size("dim1"), 4);
  EXPECT_EQ(l.basis("reg", 0), (TensorPoint{0, 1}));
  EXPECT_EQ(l.basis("reg", 1), (TensorPoint{8, 0}));
  EXPECT_EQ(l.basis("reg", 2), (TensorPoint{0, 8}));
  EXPECT_EQ(l.basis("thread", 0), (TensorPoint{0, 2}));
  EXPECT_EQ(l.basis("thread", 2), (TensorPoint{1, 0}));
  EXPECT_TRUE(ll_is_distributed(l));
}

TEST(MmaTest, WarpsBroadcastAlongForeignDim) {
  LinearLayout lhs = mma_tile({MmaKind::mma, MmaOperand::lhs, 16, {1, 1}, {1, 0}});
  EXPECT_EQ(lhs.in_size("warp"), 2);
  EXPECT_EQ(ll_broadcast_mask(lhs, "warp"), 1u);
  LinearLayout out = mma_tile({MmaKind::mma, MmaOperand::out, 16, {1, 1}, {1, 0}});
  EXPECT_EQ(ll_broadcast_mask(out, "warp"), 0u);
  EXPECT_EQ(out.out_size("dim0"), 5);
  EXPECT_EQ(out.out_size("dim1"), 5);
}

TEST(MmaTest, WgmmaAddsWarpGroup) {
  LinearLayout l = mma_tile({MmaKind::wgmma, MmaOperand::out, 16, {0, 0}, {1, 0}});
  EXPECT_EQ(l.in_size("warp"), 2);
  EXPECT_EQ(l.out_size("dim0"), 6);
  EXPECT_THROW(mma_tile({MmaKind::wgmma, MmaOperand::rhs, 16, {0, 0}, {1, 0}}), Error);
  EXPECT_THROW(mma_tile({MmaKind::mma, MmaOperand::lhs, 12, {0, 0}, {1, 0}}), Error);
}

TEST(SwizzleTest, WorkedExample) {
  SwizzleSpec s{1, 2, 2, 1, 2};
  LinearLayout l = mma_swizzle(s);
  EXPECT_EQ(ll_apply(l, {6}), (TensorPoint{1, 0}));
  EXPECT_TRUE(ll_is_memory(l));
}

TEST(SwizzleTest, MatchesDirectFormulaOnSmallTiles) {
  for (int m = 0; m <= 3; ++m)
    for (int n = 0; n <= 3; ++n)
      for (int vec : {1, 2, 4})
        for (int pp : {1, 2})
          for (int mp : {1, 2, 4}) {
            SwizzleSpec s{m, n, vec, pp, mp};
            LinearLayout l = mma_swizzle(s);
            for (std::uint64_t i = 0; i < (1u << m); ++i)
              for (std::uint64_t j = 0; j < (1u << n); ++j)
                EXPECT_EQ(ll_apply(l, {swizzle_offset(s, i, j)}), (TensorPoint{i, j}));
          }
}

TEST(SwizzleTest, RejectsNonPowerOfTwo) {
  EXPECT_THROW(mma_swizzle({1, 2, 3, 1, 2}), Error);
  EXPECT_THROW(mma_swizzle({1, 2, 2, 0, 2}), Error);
}

TEST(UnswizzledTest, RowMajorAndColumnMajor) {
  LinearLayout rm = unswizzled({2, 3});
  EXPECT_EQ(ll_apply(rm, {1}), (TensorPoint{0, 1}));
  EXPECT_EQ(ll_apply(rm, {8}), (TensorPoint{1, 0}));
  EXPECT_TRUE(ll_is_memory(rm));
  LinearLayout cm = unswizzled({2, 3}, {0, 1});
  EXPECT_EQ(ll_apply(cm, {1}), (TensorPoint{1, 0}));
}
