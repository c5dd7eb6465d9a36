#pragma once

#include "linlayout/bit_matrix.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace linlayout {

/// A labeled bit-space: `bits` is log2 of the dimension size.
struct DimLabel {
  std::string name;
  int bits = 0;

  friend bool operator==(const DimLabel &, const DimLabel &) = default;
};

/// Coordinates, one per input (resp. output) label, in label order.
using HwPoint = std::vector<std::uint64_t>;
using TensorPoint = std::vector<std::uint64_t>;

// Input labels pack first-listed-lowest: for in(reg:2, thread:5, warp:1) the
// hardware vector is reg bits 0-1, thread bits 2-6, warp bit 7.
//
// Output labels pack last-listed-lowest (row-major): for out(dim0:4, dim1:4)
// the flattened index is dim0 * 16 + dim1, so dim1 occupies rows 0-3. The
// matrix rows are therefore exactly the bits of the flattened tensor index.

/// A linear map over F2 between labeled bit-spaces. Immutable.
class LinearLayout {
public:
  using Bases =
      std::vector<std::pair<std::string, std::vector<std::vector<std::uint64_t>>>>;

  LinearLayout() = default;
  LinearLayout(std::vector<DimLabel> ins, std::vector<DimLabel> outs,
               BitMatrix matrix);

  /// Builds a layout from the image of every input basis bit, given as output
  /// coordinates. The bit count of each input label is its number of bases.
  static LinearLayout from_bases(const Bases &bases,
                                 std::vector<DimLabel> outs);

  const std::vector<DimLabel> &ins() const { return ins_; }
  const std::vector<DimLabel> &outs() const { return outs_; }
  const BitMatrix &matrix() const { return matrix_; }

  int in_bits() const { return matrix_.cols(); }
  int out_bits() const { return matrix_.rows(); }

  bool has_in(std::string_view name) const;
  bool has_out(std::string_view name) const;
  int in_index(std::string_view name) const;
  int out_index(std::string_view name) const;
  /// Bit count of a label; 0 for labels the layout does not have.
  int in_size(std::string_view name) const;
  int out_size(std::string_view name) const;
  /// First column of an input label.
  int in_offset(std::string_view name) const;
  /// First row of an output label.
  int out_offset(std::string_view name) const;

  /// Flattened image of bit `bit` of input label `name`.
  BitVec column(std::string_view name, int bit) const;
  std::vector<BitVec> columns_of(std::string_view name) const;
  /// Image of the same bit as output coordinates.
  TensorPoint basis(std::string_view name, int bit) const;

  BitVec pack_in(const HwPoint &p) const;
  HwPoint unpack_in(BitVec v) const;
  BitVec pack_out(const TensorPoint &p) const;
  TensorPoint unpack_out(BitVec v) const;

  BitVec apply_flat(BitVec hw) const { return matrix_.apply(hw); }

  bool is_surjective() const;
  bool is_injective() const;

  friend bool operator==(const LinearLayout &, const LinearLayout &) = default;

private:
  std::vector<DimLabel> ins_;
  std::vector<DimLabel> outs_;
  BitMatrix matrix_;
};

/// Evaluates the layout at a hardware point; throws on out-of-range
/// coordinates or a wrong coordinate count.
TensorPoint ll_apply(const LinearLayout &l, const HwPoint &p);

/// outer ∘ inner. inner.outs() must equal outer.ins() (names, sizes, order).
LinearLayout ll_compose(const LinearLayout &outer, const LinearLayout &inner);

/// Label-wise block-diagonal product. Labels present in both operands get
/// l2's bits above l1's; labels only in l2 are appended after l1's.
LinearLayout ll_product(const LinearLayout &l1, const LinearLayout &l2);

/// Right inverse of a surjective layout; input and output labels swap.
LinearLayout ll_right_inverse(const LinearLayout &l);

/// Drops an output label. The result must still be surjective.
LinearLayout ll_slice(const LinearLayout &l, std::string_view removed_out);

bool ll_is_distributed(const LinearLayout &l);
bool ll_is_memory(const LinearLayout &l);

/// Bit i set iff bit i of input label `in_dim` maps to zero.
BitVec ll_broadcast_mask(const LinearLayout &l, std::string_view in_dim);

/// log2 of the number of tensor-contiguous elements held in consecutive
/// registers: the largest k such that flattened bits 0..k-1 are produced by
/// register bits 0..k-1 under the layout's right inverse.
int ll_contiguous_log2(const LinearLayout &l);

/// Label-wise left division L ÷ T: T's input bits must be the lowest bits of
/// the same input labels in L, mapping identically onto the lowest bits of
/// T's output labels, with every other column of L zero on those bits.
LinearLayout ll_left_divide(const LinearLayout &l, const LinearLayout &t);

/// Same map, output labels listed in a new order (a transposition when the
/// names are tensor dims).
LinearLayout reorder_outs(const LinearLayout &l,
                          const std::vector<std::string> &order);
LinearLayout reorder_ins(const LinearLayout &l,
                         const std::vector<std::string> &order);

LinearLayout rename_in(const LinearLayout &l, std::string_view from,
                       std::string to);
LinearLayout rename_out(const LinearLayout &l, std::string_view from,
                        std::string to);

/// Reinterprets the flattened output bits under a new output shape with the
/// same total bit count. The matrix is unchanged.
LinearLayout with_outs(const LinearLayout &l, std::vector<DimLabel> outs);

/// Merges all input labels into one label `name` (first label lowest).
LinearLayout flatten_ins(const LinearLayout &l, std::string name);

/// Output labels named dim0..dim{n-1} with the given bit counts.
std::vector<DimLabel> positional_dims(const std::vector<int> &bits);

} // namespace linlayout
