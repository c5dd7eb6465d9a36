#pragma once

#include "linlayout/layout.hpp"

#include <string>
#include <vector>

namespace linlayout {

/// Blocked layout parameters. All counts are log2; `order` lists tensor
/// dimensions fastest first.
struct BlockedSpec {
  std::vector<int> shape;
  std::vector<int> size_per_thread;
  std::vector<int> threads_per_warp;
  std::vector<int> warps_per_cta;
  std::vector<int> order;
};

enum class MmaKind { mma, wgmma };
enum class MmaOperand { lhs, rhs, out };

struct MmaSpec {
  MmaKind kind = MmaKind::mma;
  MmaOperand operand = MmaOperand::out;
  int bitwidth = 16;
  /// log2 warp count per output dimension (M, N).
  std::vector<int> warps{0, 0};
  /// Warp order, fastest first.
  std::vector<int> order{1, 0};
};

/// Parameters of the xor swizzle for a 2^m x 2^n tile. vec, per_phase and
/// max_phase are element counts (powers of two, at least 1).
struct SwizzleSpec {
  int m = 0;
  int n = 0;
  int vec = 1;
  int per_phase = 1;
  int max_phase = 1;
};

/// Maps the first k bits of `in_label` identically onto the first k bits of
/// `out_dim`.
LinearLayout identity_tile(int k, const std::string &in_label,
                           const std::string &out_dim);

/// Register bits fill the dims in `order` first, then thread bits, then warp
/// bits. Output labels are dim0..dim{n-1}; inputs are reg, thread, warp.
LinearLayout blocked(const BlockedSpec &spec);

/// mma / wgmma operand and accumulator layouts over dims (dim0, dim1).
LinearLayout mma_tile(const MmaSpec &spec);

/// Identity from `offset` onto the tensor flattened along `order` (fastest
/// first). An empty order means row-major.
LinearLayout unswizzled(const std::vector<int> &shape,
                        std::vector<int> order = {});

/// offset -> (dim0, dim1) for the xor swizzle: offset column bits are the
/// element column xored with vec * ((row / per_phase) mod max_phase), reduced
/// mod 2^n; offset row bits are the element row.
LinearLayout mma_swizzle(const SwizzleSpec &spec);

/// Contribution of row bit i to the swizzled column bits.
BitVec swizzle_row_term(const SwizzleSpec &spec, int i);

const char *to_string(MmaKind k);
const char *to_string(MmaOperand o);

} // namespace linlayout
