#pragma once

#include "linlayout/layout.hpp"

#include <map>
#include <string>
#include <vector>

namespace linlayout {

enum class ShapeOpKind { trans, reshape, join, split, expand_dims, broadcast };

const char *to_string(ShapeOpKind k);
ShapeOpKind shape_op_kind(std::string_view name);
bool is_shape_op(std::string_view name);

/// A shape operation on one tensor (join takes two of the same shape). Shapes
/// are log2 sizes per dim.
///
///   trans        params = permutation: output dim k is input dim params[k]
///   reshape      params = output shape, same total bits
///   expand_dims  params = {axis}, inserts a size-1 dim
///   broadcast    params = output shape; each dim keeps its size or grows
///                from size 1
///   join         params = {}, appends a size-2 dim selecting the operand
///   split        params = {}, removes the trailing size-2 dim
struct ShapeOp {
  ShapeOpKind kind = ShapeOpKind::trans;
  std::vector<int> in_shape;
  std::vector<int> params;

  /// Throws if params do not fit in_shape.
  void validate() const;
  std::vector<int> out_shape() const;
  /// Input coordinates that feed output coordinate `y`. For join the last
  /// output coordinate selects the operand and the single entry indexes it.
  /// For split, entry h is the source of `y` in output half h.
  std::vector<TensorPoint> sources(const TensorPoint &y) const;
};

/// Layout of the result such that executing `op` keeps every value in the
/// lane that already holds it.
LinearLayout transfer_forward(const ShapeOp &op, const LinearLayout &l_in);
/// Operand layout that `transfer_forward` maps onto `l_out`.
LinearLayout transfer_backward(const ShapeOp &op, const LinearLayout &l_out);

/// One op per line:
///
///   %3 = broadcast(%2) shape=[128,32]
///   %4 = mul(%0, %3) shape=[128,32]
///   anchor %0 blocked_a
///
/// `attr=[...]` carries trans permutations and the expand_dims axis. Layouts
/// referenced by anchors may be defined inline in the layout text format.
struct OpNode {
  std::string id;
  std::string op;
  std::vector<int> args;  // node indices
  std::vector<int> shape; // log2
  std::vector<int> attr;
  int line = 0;
};

struct OpGraph {
  std::vector<OpNode> nodes;
  std::map<int, std::string> anchors; // node index -> layout name
  std::map<std::string, LinearLayout> layouts;

  int find(std::string_view id) const;
};

OpGraph parse_graph(std::string_view text);
OpGraph read_graph_file(const std::string &path);

struct Conversion {
  int value;
  int user;
  LinearLayout from;
  LinearLayout to;
};

struct Rematerialization {
  int value;
  int user;
  LinearLayout layout;
};

struct Propagation {
  std::vector<LinearLayout> layouts; // per node
  std::vector<Conversion> conversions;
  std::vector<Rematerialization> rematerialized;
};

/// Elementwise ops take the layout of their preferred operand: highest
/// contiguity, then lowest node index. Unanchored sources take the layout
/// their first user needs. Conversions that can be avoided by recomputing a
/// chain of shape and elementwise ops from cheap sources are removed.
Propagation propagate(const OpGraph &g);

} // namespace linlayout
