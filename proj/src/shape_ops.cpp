#include "linlayout/shape_ops.hpp"

#include "linlayout/error.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace linlayout {

namespace {

std::string shape_str(const std::vector<int> &s) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < s.size(); ++i)
    os << (i ? "," : "") << s[i];
  os << ']';
  return os.str();
}

int sum(const std::vector<int> &s) { return std::accumulate(s.begin(), s.end(), 0); }

// Row of the lowest bit of dim k under row-major flattening.
std::vector<int> row_offsets(const std::vector<int> &shape) {
  std::vector<int> off(shape.size());
  int acc = 0;
  for (size_t k = shape.size(); k-- > 0;) {
    off[k] = acc;
    acc += shape[k];
  }
  return off;
}

void check_operand(const ShapeOp &op, const LinearLayout &l, const std::vector<int> &shape,
                   const char *side) {
  std::vector<int> bits;
  for (const DimLabel &d : l.outs())
    bits.push_back(d.bits);
  if (bits != shape)
    throw Error(std::string(to_string(op.kind)) + ": " + side + " layout has shape " +
                shape_str(bits) + ", expected " + shape_str(shape) + " (log2)");
}

LinearLayout permute_dims(const LinearLayout &l, const std::vector<int> &perm,
                          const std::vector<int> &out_shape) {
  std::vector<std::string> names;
  for (int p : perm)
    names.push_back(l.outs()[p].name);
  return with_outs(reorder_outs(l, names), positional_dims(out_shape));
}

std::vector<int> inverse_perm(const std::vector<int> &perm) {
  std::vector<int> inv(perm.size());
  for (size_t k = 0; k < perm.size(); ++k)
    inv[perm[k]] = static_cast<int>(k);
  return inv;
}

// New register bit 0 carrying flattened row 0; all other rows move up by one.
LinearLayout insert_low_reg(const LinearLayout &l, const std::vector<int> &out_shape) {
  std::vector<DimLabel> ins = l.ins();
  if (!l.has_in("reg"))
    ins.insert(ins.begin(), {"reg", 0});
  int at = 0;
  for (DimLabel &d : ins) {
    if (d.name == "reg") {
      ++d.bits;
      break;
    }
    at += d.bits;
  }
  std::vector<BitVec> cols;
  for (BitVec c : l.matrix().columns())
    cols.push_back(c << 1);
  cols.insert(cols.begin() + at, unit(0));
  return LinearLayout(ins, positional_dims(out_shape), BitMatrix(l.out_bits() + 1, cols));
}

LinearLayout remove_low_reg(const LinearLayout &l, const std::vector<int> &out_shape,
                            const char *what) {
  if (l.in_size("reg") < 1 || l.column("reg", 0) != unit(0))
    throw Error(std::string(what) +
                ": register bit 0 must hold the trailing size-2 dimension");
  int at = l.in_offset("reg");
  std::vector<BitVec> cols;
  for (int c = 0; c < l.in_bits(); ++c) {
    if (c == at)
      continue;
    BitVec v = l.matrix().column(c);
    if (v & 1)
      throw Error(std::string(what) +
                  ": the trailing size-2 dimension is shared with another input bit");
    cols.push_back(v >> 1);
  }
  std::vector<DimLabel> ins = l.ins();
  for (DimLabel &d : ins)
    if (d.name == "reg")
      --d.bits;
  return LinearLayout(ins, positional_dims(out_shape), BitMatrix(l.out_bits() - 1, cols));
}

} // namespace

const char *to_string(ShapeOpKind k) {
  switch (k) {
  case ShapeOpKind::trans:
    return "trans";
  case ShapeOpKind::reshape:
    return "reshape";
  case ShapeOpKind::join:
    return "join";
  case ShapeOpKind::split:
    return "split";
  case ShapeOpKind::expand_dims:
    return "expand_dims";
  case ShapeOpKind::broadcast:
    return "broadcast";
  }
  return "?";
}

bool is_shape_op(std::string_view name) {
  for (ShapeOpKind k : {ShapeOpKind::trans, ShapeOpKind::reshape, ShapeOpKind::join,
                        ShapeOpKind::split, ShapeOpKind::expand_dims, ShapeOpKind::broadcast})
    if (name == to_string(k))
      return true;
  return false;
}

ShapeOpKind shape_op_kind(std::string_view name) {
  for (ShapeOpKind k : {ShapeOpKind::trans, ShapeOpKind::reshape, ShapeOpKind::join,
                        ShapeOpKind::split, ShapeOpKind::expand_dims, ShapeOpKind::broadcast})
    if (name == to_string(k))
      return k;
  throw Error("unknown shape op '" + std::string(name) + "'");
}

void ShapeOp::validate() const {
  for (int b : in_shape)
    if (b < 0)
      throw Error("negative dimension in shape " + shape_str(in_shape));
  size_t rank = in_shape.size();
  std::string name = to_string(kind);
  switch (kind) {
  case ShapeOpKind::trans: {
    std::vector<int> sorted = params;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expect(rank);
    std::iota(expect.begin(), expect.end(), 0);
    if (sorted != expect)
      throw Error("trans: " + shape_str(params) + " is not a permutation of " +
                  std::to_string(rank) + " dims");
    break;
  }
  case ShapeOpKind::reshape:
    if (sum(params) != sum(in_shape) ||
        std::any_of(params.begin(), params.end(), [](int b) { return b < 0; }))
      throw Error("reshape: cannot reshape " + shape_str(in_shape) + " to " +
                  shape_str(params) + " (log2 sizes must have equal sums)");
    break;
  case ShapeOpKind::expand_dims:
    if (params.size() != 1 || params[0] < 0 || params[0] > static_cast<int>(rank))
      throw Error("expand_dims: axis must be in [0, " + std::to_string(rank) + "]");
    break;
  case ShapeOpKind::broadcast:
    if (params.size() != rank)
      throw Error("broadcast: rank mismatch between " + shape_str(in_shape) + " and " +
                  shape_str(params));
    for (size_t k = 0; k < rank; ++k)
      if (params[k] != in_shape[k] && in_shape[k] != 0)
        throw Error("broadcast: dim " + std::to_string(k) + " must keep its size or have size 1");
    break;
  case ShapeOpKind::join:
    if (!params.empty())
      throw Error("join takes no parameters");
    break;
  case ShapeOpKind::split:
    if (!params.empty())
      throw Error("split takes no parameters");
    if (rank == 0 || in_shape.back() != 1)
      throw Error("split: trailing dimension must have size 2");
    break;
  }
}

std::vector<int> ShapeOp::out_shape() const {
  validate();
  switch (kind) {
  case ShapeOpKind::trans: {
    std::vector<int> out;
    for (int p : params)
      out.push_back(in_shape[p]);
    return out;
  }
  case ShapeOpKind::reshape:
  case ShapeOpKind::broadcast:
    return params;
  case ShapeOpKind::expand_dims: {
    std::vector<int> out = in_shape;
    out.insert(out.begin() + params[0], 0);
    return out;
  }
  case ShapeOpKind::join: {
    std::vector<int> out = in_shape;
    out.push_back(1);
    return out;
  }
  case ShapeOpKind::split:
    return {in_shape.begin(), in_shape.end() - 1};
  }
  return {};
}

std::vector<TensorPoint> ShapeOp::sources(const TensorPoint &y) const {
  std::vector<int> out = out_shape();
  if (y.size() != out.size())
    throw Error("coordinate rank does not match the output shape");
  auto flatten = [](const TensorPoint &p, const std::vector<int> &shape) {
    std::uint64_t v = 0;
    for (size_t k = 0; k < shape.size(); ++k)
      v = (v << shape[k]) | p[k];
    return v;
  };
  auto unflatten = [](std::uint64_t v, const std::vector<int> &shape) {
    TensorPoint p(shape.size());
    for (size_t k = shape.size(); k-- > 0;) {
      p[k] = v & low_mask(shape[k]);
      v >>= shape[k];
    }
    return p;
  };
  switch (kind) {
  case ShapeOpKind::trans: {
    TensorPoint x(y.size());
    for (size_t k = 0; k < y.size(); ++k)
      x[params[k]] = y[k];
    return {x};
  }
  case ShapeOpKind::reshape:
    return {unflatten(flatten(y, out), in_shape)};
  case ShapeOpKind::expand_dims: {
    TensorPoint x = y;
    x.erase(x.begin() + params[0]);
    return {x};
  }
  case ShapeOpKind::broadcast: {
    TensorPoint x = y;
    for (size_t k = 0; k < x.size(); ++k)
      if (in_shape[k] == 0)
        x[k] = 0;
    return {x};
  }
  case ShapeOpKind::join:
    return {TensorPoint(y.begin(), y.end() - 1)};
  case ShapeOpKind::split: {
    TensorPoint x0 = y, x1 = y;
    x0.push_back(0);
    x1.push_back(1);
    return {x0, x1};
  }
  }
  return {};
}

LinearLayout transfer_forward(const ShapeOp &op, const LinearLayout &l_in) {
  std::vector<int> out = op.out_shape();
  check_operand(op, l_in, op.in_shape, "operand");
  switch (op.kind) {
  case ShapeOpKind::trans:
    return permute_dims(l_in, op.params, out);
  case ShapeOpKind::reshape:
  case ShapeOpKind::expand_dims:
    return with_outs(l_in, positional_dims(out));
  case ShapeOpKind::broadcast: {
    std::vector<int> old_off = row_offsets(op.in_shape);
    std::vector<int> new_off = row_offsets(out);
    std::vector<int> new_rows;
    for (size_t k = out.size(); k-- > 0;)
      if (op.in_shape[k] == 0)
        for (int b = 0; b < out[k]; ++b)
          new_rows.push_back(new_off[k] + b);
    std::vector<BitVec> cols;
    size_t next = 0;
    for (BitVec c : l_in.matrix().columns()) {
      BitVec m = 0;
      if (c == 0) {
        if (next < new_rows.size())
          m = unit(new_rows[next++]);
      } else {
        for (size_t k = 0; k < out.size(); ++k)
          for (int b = 0; b < op.in_shape[k]; ++b)
            if (c & unit(old_off[k] + b))
              m |= unit(new_off[k] + b);
      }
      cols.push_back(m);
    }
    if (next < new_rows.size()) {
      std::ostringstream os;
      os << "broadcast: needs " << new_rows.size()
         << " broadcast (zero) input bits to cover the new dims, layout has " << next;
      throw Error(os.str());
    }
    return LinearLayout(l_in.ins(), positional_dims(out), BitMatrix(sum(out), cols));
  }
  case ShapeOpKind::join:
    return insert_low_reg(l_in, out);
  case ShapeOpKind::split:
    return remove_low_reg(l_in, out, "split");
  }
  return l_in;
}

LinearLayout transfer_backward(const ShapeOp &op, const LinearLayout &l_out) {
  std::vector<int> out = op.out_shape();
  check_operand(op, l_out, out, "result");
  switch (op.kind) {
  case ShapeOpKind::trans:
    return permute_dims(l_out, inverse_perm(op.params), op.in_shape);
  case ShapeOpKind::reshape:
  case ShapeOpKind::expand_dims:
    return with_outs(l_out, positional_dims(op.in_shape));
  case ShapeOpKind::broadcast: {
    std::vector<int> old_off = row_offsets(op.in_shape);
    std::vector<int> new_off = row_offsets(out);
    std::vector<BitVec> cols;
    for (BitVec c : l_out.matrix().columns()) {
      BitVec m = 0;
      for (size_t k = 0; k < out.size(); ++k)
        for (int b = 0; b < op.in_shape[k]; ++b)
          if (c & unit(new_off[k] + b))
            m |= unit(old_off[k] + b);
      cols.push_back(m);
    }
    return LinearLayout(l_out.ins(), positional_dims(op.in_shape),
                        BitMatrix(sum(op.in_shape), cols));
  }
  case ShapeOpKind::join:
    return remove_low_reg(l_out, op.in_shape, "join");
  case ShapeOpKind::split:
    return insert_low_reg(l_out, op.in_shape);
  }
  return l_out;
}

} // namespace linlayout
