#pragma once

#include "linlayout/planner.hpp"
#include "linlayout/shape_ops.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace linlayout {

/// A B slot whose value differs from what layout B puts there. -1 is empty.
struct Mismatch {
  std::uint64_t warp = 0, thread = 0, reg = 0;
  std::int64_t expected = -1;
  std::int64_t got = -1;
};

struct SimReport {
  bool correct = true;
  int shuffle_rounds = 0;
  std::int64_t read_wavefronts = 0;
  std::int64_t write_wavefronts = 0;
  std::int64_t smem_bytes = 0;
  /// First mismatches only; `mismatch_count` has the total.
  std::vector<Mismatch> mismatches;
  std::int64_t mismatch_count = 0;
};

/// Materializes A's lane state, executes the plan step by step and compares
/// the result with B's lane state. Throws on plans that reference lanes or
/// registers out of range.
SimReport sim_convert(const ConversionPlan &plan);

struct BankCount {
  std::int64_t total = 0;
  std::int64_t transactions = 0;
  int max_per_instruction = 0;
  int min_per_instruction = 0;
};

/// Wavefronts for every warp of `dist` reading or writing `mem` with vector
/// accesses over the registers in mem's vect span. Each transaction costs the
/// largest number of distinct rows any bank sees.
BankCount sim_bank_count(const MemoryLayout &mem, const LinearLayout &dist);

/// Executes the gather round by round. `src` and `idx` are indexed by
/// flattened tensor position; out[p] = src[p with its axis coordinate
/// replaced by idx[p]].
std::vector<std::uint64_t> sim_gather(const GatherPlan &plan, const LinearLayout &l,
                                      const std::vector<std::uint64_t> &src,
                                      const std::vector<std::uint64_t> &idx);

/// True when every value of the result already sits in the same thread and
/// warp of the operand.
bool sim_shape_op(const ShapeOp &op, const LinearLayout &in, const LinearLayout &out);

} // namespace linlayout
