#include "linlayout/constructors.hpp"

#include "linlayout/error.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <sstream>

namespace linlayout {

namespace {

std::string dim_name(int i) { return "dim" + std::to_string(i); }

void check_order(const std::vector<int> &order, size_t rank) {
  std::vector<int> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expect(rank);
  std::iota(expect.begin(), expect.end(), 0);
  if (sorted != expect)
    throw Error("order must be a permutation of 0.." +
                std::to_string(static_cast<int>(rank) - 1));
}

std::vector<std::string> dim_names(size_t rank) {
  std::vector<std::string> names;
  for (size_t i = 0; i < rank; ++i)
    names.push_back(dim_name(static_cast<int>(i)));
  return names;
}

LinearLayout zero_tile(int k, const std::string &in_label,
                       const std::string &out_dim) {
  return LinearLayout({{in_label, k}}, {{out_dim, 0}}, BitMatrix(0, k));
}

LinearLayout canonical_hw(const LinearLayout &l, size_t rank) {
  LinearLayout full = l;
  for (const char *label : {"reg", "thread", "warp"})
    if (!full.has_in(label))
      full = ll_product(full, identity_tile(0, label, dim_name(0)));
  for (size_t i = 0; i < rank; ++i)
    if (!full.has_out(dim_name(static_cast<int>(i))))
      full = ll_product(full, identity_tile(0, "reg", dim_name(static_cast<int>(i))));
  full = reorder_ins(full, {"reg", "thread", "warp"});
  return reorder_outs(full, dim_names(rank));
}

bool is_pow2(int x) { return x >= 1 && std::has_single_bit(static_cast<unsigned>(x)); }

} // namespace

LinearLayout identity_tile(int k, const std::string &in_label,
                           const std::string &out_dim) {
  if (k < 0 || k > kMaxBits)
    throw Error("identity tile size out of range");
  return LinearLayout({{in_label, k}}, {{out_dim, k}}, BitMatrix::identity(k));
}

LinearLayout blocked(const BlockedSpec &spec) {
  size_t rank = spec.shape.size();
  if (spec.size_per_thread.size() != rank ||
      spec.threads_per_warp.size() != rank || spec.warps_per_cta.size() != rank ||
      spec.order.size() != rank)
    throw Error("blocked spec: every per-dim list must have " +
                std::to_string(rank) + " entries");
  check_order(spec.order, rank);
  for (size_t i = 0; i < rank; ++i) {
    int r = spec.size_per_thread[i], t = spec.threads_per_warp[i],
        w = spec.warps_per_cta[i];
    if (r < 0 || t < 0 || w < 0)
      throw Error("blocked spec: negative count in dim " + std::to_string(i));
    if (r + t + w != spec.shape[i]) {
      std::ostringstream os;
      os << "blocked spec: dim " << i << " has shape 2^" << spec.shape[i]
         << " but registers, threads and warps cover 2^" << r + t + w;
      throw Error(os.str());
    }
  }
  LinearLayout l;
  auto tile = [&](const std::vector<int> &counts, const char *label) {
    for (int o : spec.order)
      l = ll_product(l, identity_tile(counts[o], label, dim_name(o)));
  };
  tile(spec.size_per_thread, "reg");
  tile(spec.threads_per_warp, "thread");
  tile(spec.warps_per_cta, "warp");
  return canonical_hw(l, rank);
}

LinearLayout mma_tile(const MmaSpec &spec) {
  if (spec.bitwidth != 8 && spec.bitwidth != 16 && spec.bitwidth != 32)
    throw Error("unsupported mma bitwidth " + std::to_string(spec.bitwidth) +
                " (expected 8, 16 or 32)");
  if (spec.warps.size() != 2)
    throw Error("mma spec: warps must list two dims");
  check_order(spec.order, 2);
  for (int w : spec.warps)
    if (w < 0)
      throw Error("mma spec: negative warp count");
  int packed = std::countr_zero(static_cast<unsigned>(32 / spec.bitwidth));

  LinearLayout l;
  auto mul = [&](int k, const char *in, int dim) {
    l = ll_product(l, identity_tile(k, in, dim_name(dim)));
  };
  switch (spec.operand) {
  case MmaOperand::lhs:
  case MmaOperand::out:
    mul(packed, "reg", 1);
    mul(2, "thread", 1);
    mul(3, "thread", 0);
    mul(1, "reg", 0);
    mul(1, "reg", 1);
    break;
  case MmaOperand::rhs:
    if (spec.kind == MmaKind::wgmma)
      throw Error("wgmma reads its rhs from shared memory; no register layout");
    mul(packed, "reg", 0);
    mul(2, "thread", 0);
    mul(3, "thread", 1);
    mul(1, "reg", 1);
    break;
  }
  if (spec.kind == MmaKind::wgmma)
    mul(2, "warp", 0);

  // The outer dimension of an operand is dim0 for lhs and dim1 for rhs. Warps
  // along the other output dimension hold the same operand data.
  for (int o : spec.order) {
    int k = spec.warps[o];
    bool owns = spec.operand == MmaOperand::out ||
                (spec.operand == MmaOperand::lhs && o == 0) ||
                (spec.operand == MmaOperand::rhs && o == 1);
    if (owns)
      mul(k, "warp", o);
    else
      l = ll_product(l, zero_tile(k, "warp", dim_name(o)));
  }
  return canonical_hw(l, 2);
}

LinearLayout unswizzled(const std::vector<int> &shape, std::vector<int> order) {
  size_t rank = shape.size();
  if (order.empty())
    for (size_t i = rank; i-- > 0;)
      order.push_back(static_cast<int>(i));
  check_order(order, rank);
  LinearLayout l;
  for (int o : order)
    l = ll_product(l, identity_tile(shape[o], "offset", dim_name(o)));
  if (!l.has_in("offset"))
    l = ll_product(l, LinearLayout({{"offset", 0}}, {}, BitMatrix(0, 0)));
  return reorder_outs(l, dim_names(rank));
}

BitVec swizzle_row_term(const SwizzleSpec &spec, int i) {
  std::uint64_t phase =
      ((std::uint64_t{1} << i) / static_cast<std::uint64_t>(spec.per_phase)) %
      static_cast<std::uint64_t>(spec.max_phase);
  return (static_cast<std::uint64_t>(spec.vec) * phase) & low_mask(spec.n);
}

LinearLayout mma_swizzle(const SwizzleSpec &spec) {
  if (spec.m < 0 || spec.n < 0 || spec.m + spec.n > 32)
    throw Error("swizzle spec: m and n must be non-negative with m + n <= 32");
  if (!is_pow2(spec.vec) || !is_pow2(spec.per_phase) || !is_pow2(spec.max_phase))
    throw Error("swizzle spec: vec, per_phase and max_phase must be powers of "
                "two and at least 1");
  // Rows: dim1 (columns of the tile) in bits 0..n-1, dim0 above.
  std::vector<BitVec> cols;
  for (int j = 0; j < spec.n; ++j)
    cols.push_back(unit(j));
  for (int i = 0; i < spec.m; ++i)
    cols.push_back(unit(spec.n + i) | swizzle_row_term(spec, i));
  return LinearLayout({{"offset", spec.m + spec.n}},
                      {{"dim0", spec.m}, {"dim1", spec.n}},
                      BitMatrix(spec.m + spec.n, std::move(cols)));
}

const char *to_string(MmaKind k) { return k == MmaKind::mma ? "mma" : "wgmma"; }

const char *to_string(MmaOperand o) {
  switch (o) {
  case MmaOperand::lhs:
    return "lhs";
  case MmaOperand::rhs:
    return "rhs";
  case MmaOperand::out:
    return "out";
  }
  return "?";
}

} // namespace linlayout
