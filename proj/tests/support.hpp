#pragma once

#include "linlayout/layout.hpp"
#include "linlayout/shape_ops.hpp"

#include <algorithm>
#include <random>
#include <vector>

namespace lltest {

using linlayout::BitMatrix;
using linlayout::BitVec;
using linlayout::DimLabel;
using linlayout::LinearLayout;

inline BitVec random_vec(std::mt19937_64 &rng, int bits) {
  return bits == 0 ? 0 : rng() & linlayout::low_mask(bits);
}

inline BitMatrix random_matrix(std::mt19937_64 &rng, int rows, int cols) {
  std::vector<BitVec> c(cols);
  for (BitVec &v : c)
    v = random_vec(rng, rows);
  return BitMatrix(rows, std::move(c));
}

/// Splits `total` bits into `parts` non-negative counts.
inline std::vector<int> random_split(std::mt19937_64 &rng, int total, int parts) {
  std::vector<int> out(parts, 0);
  for (int i = 0; i < total; ++i)
    ++out[rng() % parts];
  return out;
}

struct HwSplit {
  int reg = 0;
  int thread = 0;
  int warp = 0;
};

/// Random distributed layout onto `dims` (bit counts). Every tensor bit is
/// owned by exactly one hardware bit; hardware bits beyond the tensor bits are
/// zero columns at random positions. Requires reg + thread + warp >= sum(dims).
inline LinearLayout random_distributed(std::mt19937_64 &rng,
                                       const std::vector<int> &dims,
                                       HwSplit split) {
  int d = 0;
  for (int b : dims)
    d += b;
  std::vector<BitVec> units;
  for (int i = 0; i < d; ++i)
    units.push_back(linlayout::unit(i));
  std::shuffle(units.begin(), units.end(), rng);
  int total = split.reg + split.thread + split.warp;
  std::vector<BitVec> cols = units;
  cols.resize(total, 0);
  std::shuffle(cols.begin(), cols.end(), rng);
  return LinearLayout({{"reg", split.reg}, {"thread", split.thread}, {"warp", split.warp}},
                      linlayout::positional_dims(dims), BitMatrix(d, std::move(cols)));
}

/// Hardware split with reg + thread + warp = d + extra.
inline HwSplit random_split_hw(std::mt19937_64 &rng, int d, int extra, int max_thread = 5,
                               int max_warp = 3) {
  int total = d + extra;
  HwSplit s;
  s.thread = std::min<int>(max_thread, static_cast<int>(rng() % (total + 1)));
  s.warp = std::min<int>(max_warp, static_cast<int>(rng() % (total - s.thread + 1)));
  s.reg = total - s.thread - s.warp;
  return s;
}

struct LayoutPair {
  LinearLayout a, b;
};

/// Scatters `units` over `slots` positions. Unless `zeros_anywhere`, the
/// leftover zero columns go to slots with zero_ok[i] set.
inline std::vector<BitVec> place_units(std::mt19937_64 &rng, const std::vector<BitVec> &units,
                                       int slots, bool zeros_anywhere,
                                       const std::vector<int> &zero_ok) {
  std::vector<BitVec> cols(slots, 0);
  std::vector<int> free;
  for (int i = 0; i < slots; ++i)
    free.push_back(i);
  std::shuffle(free.begin(), free.end(), rng);
  if (!zeros_anywhere) {
    std::stable_partition(free.begin(), free.end(),
                          [&](int i) { return zero_ok[i] == 0; });
  }
  for (size_t k = 0; k < units.size(); ++k)
    cols[free[k]] = units[k];
  return cols;
}

/// Distributed pair over the same tensor. `b` starts its registers with the
/// first `keep_regs` nonzero register columns of `a` and optionally copies
/// a's warp columns; everything else is placed at random. Zero columns stay
/// in registers unless `thread_broadcast`. Requires enough register slots for
/// the zero columns.
inline LayoutPair random_pair(std::mt19937_64 &rng, const std::vector<int> &dims, HwSplit sa,
                              HwSplit sb, int keep_regs, bool same_warps,
                              bool thread_broadcast) {
  int d = 0;
  for (int x : dims)
    d += x;
  auto build = [&](HwSplit s, std::vector<BitVec> fixed_reg, std::vector<BitVec> fixed_warp) {
    std::vector<BitVec> used = fixed_reg;
    used.insert(used.end(), fixed_warp.begin(), fixed_warp.end());
    std::vector<BitVec> units;
    for (int i = 0; i < d; ++i)
      if (std::find(used.begin(), used.end(), linlayout::unit(i)) == used.end())
        units.push_back(linlayout::unit(i));
    std::shuffle(units.begin(), units.end(), rng);
    int rfree = s.reg - static_cast<int>(fixed_reg.size());
    int wfree = s.warp - static_cast<int>(fixed_warp.size());
    int slots = rfree + s.thread + wfree;
    std::vector<int> zero_ok(slots, 0);
    for (int i = 0; i < rfree; ++i)
      zero_ok[i] = 1;
    std::vector<BitVec> cols = place_units(rng, units, slots, thread_broadcast, zero_ok);
    std::vector<BitVec> all = fixed_reg;
    all.insert(all.end(), cols.begin(), cols.begin() + rfree);
    all.insert(all.end(), cols.begin() + rfree, cols.begin() + rfree + s.thread);
    all.insert(all.end(), fixed_warp.begin(), fixed_warp.end());
    all.insert(all.end(), cols.begin() + rfree + s.thread, cols.end());
    return LinearLayout({{"reg", s.reg}, {"thread", s.thread}, {"warp", s.warp}},
                        linlayout::positional_dims(dims), BitMatrix(d, std::move(all)));
  };
  LayoutPair p;
  p.a = build(sa, {}, {});
  std::vector<BitVec> keep;
  for (BitVec x : p.a.columns_of("reg"))
    if (x && static_cast<int>(keep.size()) < keep_regs)
      keep.push_back(x);
  std::vector<BitVec> warps;
  if (same_warps) {
    warps = p.a.columns_of("warp");
    sb.warp = sa.warp;
  }
  p.b = build(sb, keep, warps);
  return p;
}

/// A valid op of the given kind and a random distributed operand layout.
struct ShapeCase {
  linlayout::ShapeOp op;
  LinearLayout in;
};

inline ShapeCase random_shape_case(std::mt19937_64 &rng, linlayout::ShapeOpKind kind) {
  using linlayout::ShapeOpKind;
  using linlayout::unit;
  int rank = 1 + static_cast<int>(rng() % 3);
  int d = 1 + static_cast<int>(rng() % 8);
  std::vector<int> dims = random_split(rng, d, rank);
  linlayout::ShapeOp op;
  op.kind = kind;
  int extra = static_cast<int>(rng() % 3);
  switch (kind) {
  case ShapeOpKind::trans:
    for (int k = 0; k < rank; ++k)
      op.params.push_back(k);
    std::shuffle(op.params.begin(), op.params.end(), rng);
    break;
  case ShapeOpKind::reshape:
    op.params = random_split(rng, d, 1 + static_cast<int>(rng() % 3));
    break;
  case ShapeOpKind::expand_dims:
    op.params = {static_cast<int>(rng() % (rank + 1))};
    break;
  case ShapeOpKind::broadcast: {
    dims[rng() % rank] = 0;
    op.params = dims;
    int grown = 0;
    for (int k = 0; k < rank; ++k)
      if (dims[k] == 0 && rng() % 2) {
        op.params[k] = 1 + static_cast<int>(rng() % 2);
        grown += op.params[k];
      }
    d = 0;
    for (int b : dims)
      d += b;
    extra += grown;
    break;
  }
  case ShapeOpKind::join:
    break;
  case ShapeOpKind::split:
    dims.push_back(1);
    ++d;
    break;
  }
  op.in_shape = dims;
  HwSplit split = random_split_hw(rng, d, extra);
  if (kind == ShapeOpKind::split && split.reg == 0) {
    ++split.reg;
    --(split.thread > 0 ? split.thread : split.warp);
  }
  LinearLayout l = random_distributed(rng, dims, split);
  if (kind == ShapeOpKind::split) {
    std::vector<BitVec> cols(l.matrix().columns().begin(), l.matrix().columns().end());
    std::swap(cols[0], *std::find(cols.begin(), cols.end(), unit(0)));
    l = LinearLayout(l.ins(), l.outs(), BitMatrix(l.out_bits(), cols));
  }
  return {op, l};
}

} // namespace lltest
