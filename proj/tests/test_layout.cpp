#include "linlayout/error.hpp"
#include "linlayout/layout.hpp"
#include "linlayout/text_format.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace linlayout;

namespace {

LinearLayout layout_a() {
  return LinearLayout::from_bases(
      {{"reg", {{0, 1}, {1, 0}}},
       {"thread", {{0, 2}, {0, 4}, {0, 8}, {2, 0}, {4, 0}}},
       {"warp", {{8, 0}}}},
      positional_dims({4, 4}));
}

} // namespace

TEST(LayoutTest, PackingConventions) {
  LinearLayout a = layout_a();
  EXPECT_EQ(a.pack_in({1, 9, 0}), 1u | (9u << 2));
  EXPECT_EQ(a.pack_out({2, 3}), 2u * 16 + 3);
  EXPECT_EQ(a.unpack_out(0x23), (TensorPoint{2, 3}));
  EXPECT_EQ(a.out_offset("dim1"), 0);
  EXPECT_EQ(a.out_offset("dim0"), 4);
  EXPECT_EQ(a.in_offset("warp"), 7);
}

TEST(LayoutTest, ApplyChecksRanges) {
  LinearLayout a = layout_a();
  EXPECT_EQ(ll_apply(a, {1, 9, 0}), (TensorPoint{2, 3}));
  EXPECT_THROW(ll_apply(a, {4, 0, 0}), Error);
  EXPECT_THROW(ll_apply(a, {0, 0}), Error);
}

TEST(LayoutTest, ComposeWithInverseIsIdentity) {
  LinearLayout a = layout_a();
  LinearLayout inv = ll_right_inverse(a);
  LinearLayout id = ll_compose(a, inv);
  for (std::uint64_t i = 0; i < 16; ++i)
    for (std::uint64_t j = 0; j < 16; ++j)
      EXPECT_EQ(ll_apply(id, {i, j}), (TensorPoint{i, j}));
  EXPECT_THROW(ll_compose(a, a), Error);
}

TEST(LayoutTest, ProductStacksSharedLabels) {
  LinearLayout r = LinearLayout({{"reg", 1}}, {{"dim0", 1}}, BitMatrix::identity(1));
  LinearLayout p = ll_product(r, r);
  EXPECT_EQ(p.in_size("reg"), 2);
  EXPECT_EQ(p.out_size("dim0"), 2);
  EXPECT_EQ(p.basis("reg", 1), (TensorPoint{2}));
}

TEST(LayoutTest, Predicates) {
  LinearLayout a = layout_a();
  EXPECT_TRUE(ll_is_distributed(a));
  EXPECT_FALSE(ll_is_memory(a));
  EXPECT_EQ(ll_contiguous_log2(a), 1);
  EXPECT_EQ(ll_broadcast_mask(a, "reg"), 0u);

  LinearLayout bc = LinearLayout::from_bases(
      {{"reg", {{1}, {0}}}, {"thread", {{2}}}, {"warp", {}}}, positional_dims({2}));
  EXPECT_TRUE(ll_is_distributed(bc));
  EXPECT_EQ(ll_broadcast_mask(bc, "reg"), 2u);

  LinearLayout dup = LinearLayout::from_bases(
      {{"reg", {{1}, {1}}}, {"thread", {{2}}}, {"warp", {}}}, positional_dims({2}));
  EXPECT_FALSE(ll_is_distributed(dup));
}

TEST(LayoutTest, SliceRequiresSurjectivity) {
  LinearLayout a = layout_a();
  EXPECT_THROW(ll_slice(a, "dim7"), Error);
  LinearLayout j = ll_slice(a, "dim0");
  EXPECT_EQ(j.matrix(), a.matrix().block(0, 4, 0, 8));
  EXPECT_EQ(ll_broadcast_mask(j, "thread"), 0b11000u);
  LinearLayout bc = LinearLayout::from_bases(
      {{"reg", {{1, 0}}}, {"thread", {{0, 0}}}}, positional_dims({1, 0}));
  LinearLayout s = ll_slice(bc, "dim1");
  EXPECT_EQ(s.outs().size(), 1u);
}

TEST(LayoutTest, LeftDivideByRegisterTile) {
  LinearLayout a = layout_a();
  LinearLayout tile({{"reg", 1}}, {{"dim1", 1}}, BitMatrix::identity(1));
  LinearLayout q = ll_left_divide(a, tile);
  EXPECT_EQ(q.in_size("reg"), 1);
  EXPECT_EQ(q.out_size("dim1"), 3);
}

TEST(TextFormatTest, RoundTripRandomLayouts) {
  std::mt19937_64 rng(11);
  for (int it = 0; it < 100; ++it) {
    std::vector<int> dims = lltest::random_split(rng, 1 + static_cast<int>(rng() % 10), 2);
    int d = dims[0] + dims[1];
    LinearLayout l =
        lltest::random_distributed(rng, dims, lltest::random_split_hw(rng, d, rng() % 3));
    std::string text = print_layout("L", l) + print_matrix_comment(l);
    NamedLayout back = parse_layout(text);
    EXPECT_EQ(back.name, "L");
    EXPECT_EQ(back.layout, l);
  }
}

TEST(TextFormatTest, ReportsLineOfError) {
  try {
    parse_layout("layout X in(reg:1) out(dim0:1)\nreg: (3)\n");
    FAIL() << "expected an error";
  } catch (const Error &e) {
    EXPECT_NE(std::string(e.what()).find("line"), std::string::npos);
  }
  EXPECT_THROW(parse_layout("layout X in(reg:2) out(dim0:2)\nreg: (1)\n"), Error);
}
