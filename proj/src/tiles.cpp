#include "linlayout/constructors.hpp"
#include "linlayout/planner.hpp"

#include "planner_util.hpp"

namespace linlayout {

using namespace detail;

TilePattern vector_tile(int k) {
  return {"vector" + std::to_string(1 << k), identity_tile(k, "reg", "offset")};
}

TilePattern ldmatrix_tile(int elem_bits) {
  if (elem_bits != 8 && elem_bits != 16 && elem_bits != 32)
    throw Error("ldmatrix tiles exist for 8, 16 and 32-bit elements");
  int k = log2_floor(32 / elem_bits);
  return {"ldmatrix_b" + std::to_string(elem_bits),
          ll_product(identity_tile(k, "reg", "offset"), identity_tile(2, "thread", "offset"))};
}

TileMatch match_tile(const LinearLayout &l, const TilePattern &t) {
  LinearLayout target = l;
  if (t.tile.outs().size() == 1 && t.tile.outs()[0].name == "offset" && !l.has_out("offset"))
    target = with_outs(l, {{"offset", l.out_bits()}});
  try {
    return {ll_left_divide(target, t.tile), {}};
  } catch (const Error &) {
  }

  int k = t.tile.in_size("reg");
  if (k > target.in_size("reg"))
    throw Error("tile " + t.name + " needs " + std::to_string(k) + " register bits, layout has " +
                std::to_string(target.in_size("reg")));
  std::vector<BitVec> regs = target.columns_of("reg");
  std::vector<int> perm;
  for (int i = 0; i < k; ++i) {
    TensorPoint tp = t.tile.basis("reg", i);
    TensorPoint p(target.outs().size(), 0);
    for (size_t o = 0; o < t.tile.outs().size(); ++o)
      p[target.out_index(t.tile.outs()[o].name)] = tp[o];
    BitVec want = target.pack_out(p);
    auto it = std::find(regs.begin(), regs.end(), want);
    while (it != regs.end() && std::find(perm.begin(), perm.end(), it - regs.begin()) != perm.end())
      it = std::find(it + 1, regs.end(), want);
    if (it == regs.end())
      throw Error("tile " + t.name + ": register bit " + std::to_string(i) +
                  " of the tile has no matching register in the layout");
    perm.push_back(static_cast<int>(it - regs.begin()));
  }
  for (int j = 0; j < static_cast<int>(regs.size()); ++j)
    if (std::find(perm.begin(), perm.end(), j) == perm.end())
      perm.push_back(j);

  std::vector<BitVec> cols;
  int roff = target.in_offset("reg");
  for (int c = 0; c < target.in_bits(); ++c) {
    int r = c - roff;
    bool is_reg = r >= 0 && r < static_cast<int>(regs.size());
    cols.push_back(is_reg ? regs[perm[r]] : target.matrix().column(c));
  }
  LinearLayout permuted(target.ins(), target.outs(), BitMatrix(target.out_bits(), cols));
  try {
    return {ll_left_divide(permuted, t.tile), perm};
  } catch (const Error &e) {
    throw Error("tile " + t.name + " does not divide the layout even after permuting "
                "registers: " + e.what());
  }
}

GatherPlan plan_gather(const LinearLayout &l, int axis) {
  check_distributed(l, "L");
  if (axis < 0 || axis >= static_cast<int>(l.outs().size()))
    throw Error("gather axis " + std::to_string(axis) + " out of range");
  const DimLabel &dim = l.outs()[axis];
  BitVec mask = low_mask(dim.bits) << l.out_offset(dim.name);

  GatherPlan p;
  p.axis = axis;
  std::vector<BitVec> warps = l.columns_of("warp");
  for (size_t i = 0; i < warps.size(); ++i)
    if (warps[i] & mask) {
      p.reason = "warp bit " + std::to_string(i) + " moves along the gather axis";
      return p;
    }
  std::vector<BitVec> threads = l.columns_of("thread");
  for (size_t i = 0; i < threads.size(); ++i)
    if (threads[i] & mask)
      p.axis_threads.push_back(static_cast<int>(i));
  for (std::uint64_t k = 0; k < (std::uint64_t{1} << p.axis_threads.size()); ++k) {
    std::uint64_t m = 0;
    for (size_t i = 0; i < p.axis_threads.size(); ++i)
      if (k >> i & 1)
        m |= std::uint64_t{1} << p.axis_threads[i];
    p.masks.push_back(m);
  }
  p.feasible = true;
  return p;
}

} // namespace linlayout
