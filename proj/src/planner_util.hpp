#pragma once

#include "linlayout/error.hpp"
#include "linlayout/layout.hpp"

#include <algorithm>
#include <bit>
#include <string>
#include <vector>

namespace linlayout::detail {

inline std::vector<BitVec> nonzero(const std::vector<BitVec> &v) {
  std::vector<BitVec> out;
  for (BitVec x : v)
    if (x)
      out.push_back(x);
  return out;
}

inline BitVec span_mask(const std::vector<BitVec> &units) {
  BitVec m = 0;
  for (BitVec u : units)
    m |= u;
  return m;
}

inline std::vector<BitVec> sorted(std::vector<BitVec> v) {
  std::sort(v.begin(), v.end());
  return v;
}

inline bool contains(const std::vector<BitVec> &v, BitVec x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

/// Hardware position of every tensor bit in a distributed layout. Tensor
/// vectors map to flat hardware indices by xoring these.
class DistInverse {
public:
  explicit DistInverse(const LinearLayout &l) : l_(&l), owner_(l.out_bits(), 0) {
    for (int c = 0; c < l.in_bits(); ++c) {
      BitVec col = l.matrix().column(c);
      if (col)
        owner_[std::countr_zero(col)] = unit(c);
    }
  }
  BitVec hw(BitVec x) const {
    BitVec h = 0;
    for (int i = 0; x; ++i, x >>= 1)
      if (x & 1)
        h |= owner_[i];
    return h;
  }
  /// (reg, thread, warp) of tensor vector x.
  HwPoint point(BitVec x) const { return l_->unpack_in(hw(x)); }

private:
  const LinearLayout *l_;
  std::vector<BitVec> owner_;
};

inline void check_distributed(const LinearLayout &l, const char *which) {
  if (!ll_is_distributed(l))
    throw Error(std::string("layout ") + which +
                " is not distributed (inputs must be reg/thread/warp, surjective, "
                "columns single bits without repeats)");
  for (const char *label : {"reg", "thread", "warp"})
    if (!l.has_in(label))
      throw Error(std::string("layout ") + which + " has no '" + label + "' input");
}

inline void check_pair(const LinearLayout &a, const LinearLayout &b) {
  check_distributed(a, "A");
  check_distributed(b, "B");
  if (a.outs() != b.outs())
    throw Error("layouts A and B cover different tensor shapes");
}

inline void check_elem_bits(int elem_bits) {
  if (elem_bits != 8 && elem_bits != 16 && elem_bits != 32 && elem_bits != 64)
    throw Error("element width must be 8, 16, 32 or 64 bits, got " +
                std::to_string(elem_bits));
}

inline int log2_floor(std::int64_t x) {
  int k = -1;
  while (x > 0) {
    x >>= 1;
    ++k;
  }
  return k;
}

/// log2 of how many threads share one wavefront.
inline int bank_group_bits(int banks, int bank_bytes, std::int64_t vector_bytes) {
  std::int64_t per_thread = std::max<std::int64_t>(1, vector_bytes / bank_bytes);
  return std::max(0, log2_floor(banks) - log2_floor(per_thread));
}

} // namespace linlayout::detail
