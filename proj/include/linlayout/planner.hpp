#pragma once

#include "linlayout/layout.hpp"

#include <optional>
#include <string>
#include <vector>

namespace linlayout {

/// Shared memory geometry: `banks` banks of `bank_bytes` bytes each. One row
/// of all banks is one wavefront.
struct BankConfig {
  int banks = 32;
  int bank_bytes = 4;

  /// "32x4" style.
  static BankConfig parse(std::string_view text);
  /// LINLAYOUT_BANKS if set, else the default.
  static BankConfig from_env();
  std::string to_string() const;
  int row_bytes() const { return banks * bank_bytes; }
};

enum class PlanKind { noop, reg_permute, warp_shuffle, shared_memory };
const char *to_string(PlanKind k);
PlanKind plan_kind(std::string_view name);

// Tensor vectors below are flattened tensor indices (bit i = flattened bit i).

struct ShuffleLane {
  std::uint64_t warp = 0;
  std::uint64_t thread = 0;
  /// Lane whose payload this lane reads in this round.
  std::uint64_t src_thread = 0;
  /// A register indices this lane offers, in vector order.
  std::vector<std::uint64_t> send;
  /// B register indices the received payload lands in, in vector order.
  std::vector<std::uint64_t> recv;
};

struct ShuffleRound {
  int index = 0;
  BitVec offset = 0; // R(index)
  std::vector<ShuffleLane> lanes;
};

struct ShufflePlan {
  int d = 0;
  std::vector<BitVec> V, I, E, F, G, R;
  int payload_bits = 32;
  /// B register bits that repeat data; filled by copying after the rounds.
  BitVec fill_mask = 0;
  std::vector<ShuffleRound> rounds;
};

struct MemoryLayout {
  /// Inputs vect, bank, idx onto the tensor dims.
  LinearLayout layout;
  int v = 0, b = 0, s = 0;
  std::vector<BitVec> H, C;
  /// idx vectors taken from A's bank threads because H and C ran out.
  int padding = 0;
  int elem_bits = 16;
  BankConfig cfg;

  /// The same map with one `offset` input (vect lowest).
  LinearLayout offset_layout() const { return flatten_ins(layout, "offset"); }
  /// Dimension of the idx part chosen from H and C.
  int conflict_free_dim() const { return s - padding; }
};

struct WavefrontPrediction {
  int instructions = 0;       // per warp
  int transactions = 0;       // per instruction
  int per_instruction = 0;    // wavefronts
  std::int64_t total = 0;     // over all warps and instructions
  bool exact = true;          // false when a vector is narrower than a bank
};

struct PlanStats {
  int shuffle_rounds = 0;
  std::int64_t read_wavefronts = 0;
  std::int64_t write_wavefronts = 0;
  std::int64_t smem_bytes = 0;
};

struct ConversionPlan {
  PlanKind kind = PlanKind::noop;
  int elem_bits = 16;
  LinearLayout a, b;
  /// b^{-1} ∘ a: A hardware bits onto B hardware bits.
  LinearLayout quotient;
  /// Why a cheaper kind did not apply.
  std::string reason;
  /// B register index -> A register index (reg_permute).
  std::vector<std::uint64_t> reg_table;
  std::optional<ShufflePlan> shuffle;
  std::optional<MemoryLayout> smem;
  PlanStats stats;
};

/// Weight-minimal solution X of b * X = a as a layout from a's inputs onto
/// b's inputs. Throws unless a's image lies in b's.
LinearLayout quotient_layout(const LinearLayout &a, const LinearLayout &b);

ConversionPlan plan_convert(const LinearLayout &a, const LinearLayout &b, int elem_bits,
                            BankConfig cfg = {}, int payload_bits = 32);

/// Throws with the failed precondition when a shuffle cannot realize a -> b.
ShufflePlan plan_shuffle(const LinearLayout &a, const LinearLayout &b, int elem_bits,
                         int payload_bits = 32);

MemoryLayout plan_swizzle(const LinearLayout &a, const LinearLayout &b, int elem_bits,
                          BankConfig cfg = {});

/// Closed-form wavefront count for `dist` accessing `mem`: per instruction,
/// transactions * 2^c with c = dim(span(vect ∪ idx) ∩ span(bank-group threads)).
WavefrontPrediction predict_wavefronts(const MemoryLayout &mem, const LinearLayout &dist);

/// Register columns of `dist` used as the vector; those inside span(vect).
std::vector<int> vector_registers(const MemoryLayout &mem, const LinearLayout &dist);

struct TilePattern {
  std::string name;
  LinearLayout tile;
};

/// Vectorized access of 2^k registers: reg bits 0..k-1 onto offset bits.
TilePattern vector_tile(int k);
/// ldmatrix-style: 4 contiguous bytes per register group, 4 lanes per row.
TilePattern ldmatrix_tile(int elem_bits);

struct TileMatch {
  LinearLayout quotient;
  /// New reg bit i is old reg bit permutation[i]; empty when none was needed.
  std::vector<int> permutation;
};

/// l ÷ tile, permuting l's registers when that makes the division exist. A
/// tile over `offset` matches l with its outputs flattened to `offset`.
TileMatch match_tile(const LinearLayout &l, const TilePattern &t);

struct GatherPlan {
  int axis = 0;
  bool feasible = false;
  std::string reason;
  /// Thread columns with a component along the axis.
  std::vector<int> axis_threads;
  /// Thread xor mask of each round.
  std::vector<std::uint64_t> masks;
  int rounds() const { return static_cast<int>(masks.size()); }
};

GatherPlan plan_gather(const LinearLayout &l, int axis);

} // namespace linlayout
