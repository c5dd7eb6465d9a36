#include "linlayout/layout.hpp"

#include "linlayout/error.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace linlayout {

namespace {

void check_labels(const std::vector<DimLabel> &dims, const char *side) {
  std::set<std::string> seen;
  for (const DimLabel &d : dims) {
    if (d.bits < 0)
      throw Error(std::string(side) + " label '" + d.name +
                  "' has negative size");
    if (d.name.empty())
      throw Error(std::string("empty ") + side + " label name");
    if (!seen.insert(d.name).second)
      throw Error(std::string("duplicate ") + side + " label '" + d.name + "'");
  }
}

int total_bits(const std::vector<DimLabel> &dims) {
  int n = 0;
  for (const DimLabel &d : dims)
    n += d.bits;
  return n;
}

int find_label(const std::vector<DimLabel> &dims, std::string_view name) {
  for (size_t i = 0; i < dims.size(); ++i)
    if (dims[i].name == name)
      return static_cast<int>(i);
  return -1;
}

LinearLayout::Bases to_bases(const LinearLayout &l) {
  LinearLayout::Bases bases;
  for (const DimLabel &d : l.ins()) {
    std::vector<std::vector<std::uint64_t>> imgs;
    for (int b = 0; b < d.bits; ++b)
      imgs.push_back(l.basis(d.name, b));
    bases.emplace_back(d.name, std::move(imgs));
  }
  return bases;
}

} // namespace

LinearLayout::LinearLayout(std::vector<DimLabel> ins, std::vector<DimLabel> outs,
                           BitMatrix matrix)
    : ins_(std::move(ins)), outs_(std::move(outs)), matrix_(std::move(matrix)) {
  check_labels(ins_, "input");
  check_labels(outs_, "output");
  if (total_bits(ins_) != matrix_.cols() || total_bits(outs_) != matrix_.rows()) {
    std::ostringstream os;
    os << "labels describe " << total_bits(outs_) << "x" << total_bits(ins_)
       << " but matrix is " << matrix_.shape_string();
    throw Error(os.str());
  }
}

LinearLayout LinearLayout::from_bases(const Bases &bases,
                                      std::vector<DimLabel> outs) {
  std::vector<DimLabel> ins;
  for (const auto &[name, imgs] : bases)
    ins.push_back({name, static_cast<int>(imgs.size())});
  LinearLayout shell(ins, outs, BitMatrix(total_bits(outs), total_bits(ins)));
  BitMatrix m(shell.out_bits(), shell.in_bits());
  int col = 0;
  for (const auto &[name, imgs] : bases)
    for (const auto &coords : imgs)
      m.set_column(col++, shell.pack_out(coords));
  return LinearLayout(std::move(ins), std::move(outs), std::move(m));
}

bool LinearLayout::has_in(std::string_view name) const {
  return find_label(ins_, name) >= 0;
}
bool LinearLayout::has_out(std::string_view name) const {
  return find_label(outs_, name) >= 0;
}

int LinearLayout::in_index(std::string_view name) const {
  int i = find_label(ins_, name);
  if (i < 0)
    throw Error("unknown input label '" + std::string(name) + "'");
  return i;
}

int LinearLayout::out_index(std::string_view name) const {
  int i = find_label(outs_, name);
  if (i < 0)
    throw Error("unknown output label '" + std::string(name) + "'");
  return i;
}

int LinearLayout::in_size(std::string_view name) const {
  int i = find_label(ins_, name);
  return i < 0 ? 0 : ins_[i].bits;
}

int LinearLayout::out_size(std::string_view name) const {
  int i = find_label(outs_, name);
  return i < 0 ? 0 : outs_[i].bits;
}

int LinearLayout::in_offset(std::string_view name) const {
  int idx = in_index(name), off = 0;
  for (int i = 0; i < idx; ++i)
    off += ins_[i].bits;
  return off;
}

int LinearLayout::out_offset(std::string_view name) const {
  int idx = out_index(name), off = 0;
  for (size_t i = idx + 1; i < outs_.size(); ++i)
    off += outs_[i].bits;
  return off;
}

BitVec LinearLayout::column(std::string_view name, int bit) const {
  if (bit < 0 || bit >= ins_[in_index(name)].bits)
    throw Error("bit " + std::to_string(bit) + " out of range for label '" +
                std::string(name) + "'");
  return matrix_.column(in_offset(name) + bit);
}

std::vector<BitVec> LinearLayout::columns_of(std::string_view name) const {
  std::vector<BitVec> cols;
  if (!has_in(name))
    return cols;
  int off = in_offset(name);
  for (int b = 0; b < in_size(name); ++b)
    cols.push_back(matrix_.column(off + b));
  return cols;
}

TensorPoint LinearLayout::basis(std::string_view name, int bit) const {
  return unpack_out(column(name, bit));
}

BitVec LinearLayout::pack_in(const HwPoint &p) const {
  if (p.size() != ins_.size())
    throw Error("expected " + std::to_string(ins_.size()) +
                " input coordinates, got " + std::to_string(p.size()));
  BitVec v = 0;
  int off = 0;
  for (size_t i = 0; i < ins_.size(); ++i) {
    if (p[i] & ~low_mask(ins_[i].bits))
      throw Error("coordinate " + std::to_string(p[i]) + " out of range for '" +
                  ins_[i].name + "' (" + std::to_string(ins_[i].bits) +
                  " bits)");
    v |= static_cast<BitVec>(p[i]) << off;
    off += ins_[i].bits;
  }
  return v;
}

HwPoint LinearLayout::unpack_in(BitVec v) const {
  HwPoint p;
  int off = 0;
  for (const DimLabel &d : ins_) {
    p.push_back((v >> off) & low_mask(d.bits));
    off += d.bits;
  }
  return p;
}

BitVec LinearLayout::pack_out(const TensorPoint &p) const {
  if (p.size() != outs_.size())
    throw Error("expected " + std::to_string(outs_.size()) +
                " output coordinates, got " + std::to_string(p.size()));
  BitVec v = 0;
  int off = 0;
  for (size_t k = outs_.size(); k-- > 0;) {
    if (p[k] & ~low_mask(outs_[k].bits))
      throw Error("coordinate " + std::to_string(p[k]) + " out of range for '" +
                  outs_[k].name + "' (" + std::to_string(outs_[k].bits) +
                  " bits)");
    v |= static_cast<BitVec>(p[k]) << off;
    off += outs_[k].bits;
  }
  return v;
}

TensorPoint LinearLayout::unpack_out(BitVec v) const {
  TensorPoint p(outs_.size());
  int off = 0;
  for (size_t k = outs_.size(); k-- > 0;) {
    p[k] = (v >> off) & low_mask(outs_[k].bits);
    off += outs_[k].bits;
  }
  return p;
}

bool LinearLayout::is_surjective() const {
  return matrix_.rank() == matrix_.rows();
}

bool LinearLayout::is_injective() const {
  return matrix_.rank() == matrix_.cols();
}

TensorPoint ll_apply(const LinearLayout &l, const HwPoint &p) {
  return l.unpack_out(l.apply_flat(l.pack_in(p)));
}

LinearLayout ll_compose(const LinearLayout &outer, const LinearLayout &inner) {
  if (inner.outs() != outer.ins()) {
    std::ostringstream os;
    os << "cannot compose: inner outputs (";
    for (const DimLabel &d : inner.outs())
      os << d.name << ":" << d.bits << " ";
    os << ") differ from outer inputs (";
    for (const DimLabel &d : outer.ins())
      os << d.name << ":" << d.bits << " ";
    os << ")";
    throw Error(os.str());
  }
  std::vector<BitVec> cols;
  for (BitVec c : inner.matrix().columns())
    cols.push_back(outer.apply_flat(outer.pack_in(inner.unpack_out(c))));
  return LinearLayout(inner.ins(), outer.outs(),
                      BitMatrix(outer.out_bits(), std::move(cols)));
}

LinearLayout ll_product(const LinearLayout &l1, const LinearLayout &l2) {
  auto merge = [](std::vector<DimLabel> a, const std::vector<DimLabel> &b) {
    for (const DimLabel &d : b) {
      int i = find_label(a, d.name);
      if (i < 0)
        a.push_back(d);
      else
        a[i].bits += d.bits;
    }
    return a;
  };
  std::vector<DimLabel> ins = merge(l1.ins(), l2.ins());
  std::vector<DimLabel> outs = merge(l1.outs(), l2.outs());
  if (total_bits(ins) > kMaxBits || total_bits(outs) > kMaxBits)
    throw Error("product exceeds 64 bits");

  LinearLayout::Bases bases;
  for (const DimLabel &d : ins) {
    std::vector<std::vector<std::uint64_t>> imgs;
    auto embed = [&](const LinearLayout &src, int bit, bool shift) {
      TensorPoint p = src.basis(d.name, bit);
      std::vector<std::uint64_t> coords(outs.size(), 0);
      for (size_t k = 0; k < src.outs().size(); ++k) {
        int at = find_label(outs, src.outs()[k].name);
        int sh = shift ? l1.out_size(src.outs()[k].name) : 0;
        coords[at] = p[k] << sh;
      }
      return coords;
    };
    for (int b = 0; b < l1.in_size(d.name); ++b)
      imgs.push_back(embed(l1, b, false));
    for (int b = 0; b < l2.in_size(d.name); ++b)
      imgs.push_back(embed(l2, b, true));
    bases.emplace_back(d.name, std::move(imgs));
  }
  return LinearLayout::from_bases(bases, outs);
}

LinearLayout ll_right_inverse(const LinearLayout &l) {
  BitMatrix x = bm_right_inverse(l.matrix());
  LinearLayout::Bases bases;
  for (const DimLabel &d : l.outs()) {
    std::vector<std::vector<std::uint64_t>> imgs;
    int off = l.out_offset(d.name);
    for (int b = 0; b < d.bits; ++b)
      imgs.push_back(l.unpack_in(x.column(off + b)));
    bases.emplace_back(d.name, std::move(imgs));
  }
  return LinearLayout::from_bases(bases, l.ins());
}

LinearLayout ll_slice(const LinearLayout &l, std::string_view removed_out) {
  int idx = l.out_index(removed_out);
  std::vector<DimLabel> outs = l.outs();
  outs.erase(outs.begin() + idx);
  LinearLayout::Bases bases = to_bases(l);
  for (auto &[name, imgs] : bases)
    for (auto &c : imgs)
      c.erase(c.begin() + idx);
  LinearLayout out = LinearLayout::from_bases(bases, outs);
  if (!out.is_surjective())
    throw Error("slice along '" + std::string(removed_out) +
                "' is not surjective onto the remaining dimensions");
  return out;
}

bool ll_is_distributed(const LinearLayout &l) {
  for (const DimLabel &d : l.ins())
    if (d.name != "reg" && d.name != "thread" && d.name != "warp")
      return false;
  if (!l.is_surjective())
    return false;
  BitVec seen = 0;
  for (BitVec c : l.matrix().columns()) {
    if (c == 0)
      continue;
    if (popcount(c) != 1 || (seen & c))
      return false;
    seen |= c;
  }
  return true;
}

bool ll_is_memory(const LinearLayout &l) {
  if (l.ins().size() != 1 || l.ins()[0].name != "offset")
    return false;
  if (l.in_bits() != l.out_bits() || !l.is_injective())
    return false;
  for (BitVec c : l.matrix().columns()) {
    int w = popcount(c);
    if (w < 1 || w > 2)
      return false;
  }
  return true;
}

BitVec ll_broadcast_mask(const LinearLayout &l, std::string_view in_dim) {
  BitVec mask = 0;
  std::vector<BitVec> cols = l.columns_of(l.ins()[l.in_index(in_dim)].name);
  for (size_t i = 0; i < cols.size(); ++i)
    if (cols[i] == 0)
      mask |= unit(static_cast<int>(i));
  return mask;
}

int ll_contiguous_log2(const LinearLayout &l) {
  if (!l.has_in("reg"))
    return 0;
  BitMatrix x = bm_right_inverse(l.matrix());
  int roff = l.in_offset("reg");
  int k = 0;
  while (k < l.in_size("reg") && k < l.out_bits() &&
         x.column(k) == unit(roff + k))
    ++k;
  return k;
}

LinearLayout ll_left_divide(const LinearLayout &l, const LinearLayout &t) {
  for (const DimLabel &d : t.ins())
    if (l.in_size(d.name) < d.bits || !l.has_in(d.name))
      throw Error("cannot divide: input label '" + d.name +
                  "' is missing or too small");
  for (const DimLabel &d : t.outs())
    if (l.out_size(d.name) < d.bits || !l.has_out(d.name))
      throw Error("cannot divide: output label '" + d.name +
                  "' is missing or too small");

  // Output bits of l covered by the tile.
  BitVec tile_rows = 0;
  for (const DimLabel &d : t.outs())
    tile_rows |= low_mask(d.bits) << l.out_offset(d.name);
  auto embed = [&](const TensorPoint &tp) {
    TensorPoint p(l.outs().size(), 0);
    for (size_t k = 0; k < t.outs().size(); ++k)
      p[l.out_index(t.outs()[k].name)] = tp[k];
    return l.pack_out(p);
  };

  LinearLayout::Bases bases;
  for (const DimLabel &d : l.ins()) {
    int tb = t.in_size(d.name);
    for (int b = 0; b < tb; ++b) {
      if (l.column(d.name, b) != embed(t.basis(d.name, b))) {
        std::ostringstream os;
        os << "not divisible: bit " << b << " of '" << d.name
           << "' does not match the tile";
        throw Error(os.str());
      }
    }
    std::vector<std::vector<std::uint64_t>> imgs;
    for (int b = tb; b < d.bits; ++b) {
      BitVec c = l.column(d.name, b);
      if (c & tile_rows) {
        std::ostringstream os;
        os << "not divisible: bit " << b << " of '" << d.name
           << "' touches the tile's output bits";
        throw Error(os.str());
      }
      TensorPoint p = l.unpack_out(c);
      for (size_t k = 0; k < p.size(); ++k)
        p[k] >>= t.out_size(l.outs()[k].name);
      imgs.push_back(p);
    }
    bases.emplace_back(d.name, std::move(imgs));
  }
  std::vector<DimLabel> outs = l.outs();
  for (DimLabel &d : outs)
    d.bits -= t.out_size(d.name);
  return LinearLayout::from_bases(bases, outs);
}

LinearLayout reorder_outs(const LinearLayout &l,
                          const std::vector<std::string> &order) {
  if (order.size() != l.outs().size())
    throw Error("output order must name every output label");
  std::vector<DimLabel> outs;
  std::vector<int> src;
  for (const std::string &n : order) {
    int i = l.out_index(n);
    if (std::find(src.begin(), src.end(), i) != src.end())
      throw Error("output order repeats '" + n + "'");
    src.push_back(i);
    outs.push_back(l.outs()[i]);
  }
  LinearLayout::Bases bases = to_bases(l);
  for (auto &[name, imgs] : bases) {
    for (auto &c : imgs) {
      std::vector<std::uint64_t> nc;
      for (int i : src)
        nc.push_back(c[i]);
      c = std::move(nc);
    }
  }
  return LinearLayout::from_bases(bases, outs);
}

LinearLayout reorder_ins(const LinearLayout &l,
                         const std::vector<std::string> &order) {
  if (order.size() != l.ins().size())
    throw Error("input order must name every input label");
  LinearLayout::Bases bases = to_bases(l), out;
  for (const std::string &n : order) {
    int i = l.in_index(n);
    out.push_back(bases[i]);
  }
  return LinearLayout::from_bases(out, l.outs());
}

LinearLayout rename_in(const LinearLayout &l, std::string_view from,
                       std::string to) {
  std::vector<DimLabel> ins = l.ins();
  ins[l.in_index(from)].name = std::move(to);
  return LinearLayout(std::move(ins), l.outs(), l.matrix());
}

LinearLayout rename_out(const LinearLayout &l, std::string_view from,
                        std::string to) {
  std::vector<DimLabel> outs = l.outs();
  outs[l.out_index(from)].name = std::move(to);
  return LinearLayout(l.ins(), std::move(outs), l.matrix());
}

LinearLayout with_outs(const LinearLayout &l, std::vector<DimLabel> outs) {
  if (total_bits(outs) != l.out_bits())
    throw Error("new output shape has " + std::to_string(total_bits(outs)) +
                " bits, layout has " + std::to_string(l.out_bits()));
  return LinearLayout(l.ins(), std::move(outs), l.matrix());
}

LinearLayout flatten_ins(const LinearLayout &l, std::string name) {
  return LinearLayout({{std::move(name), l.in_bits()}}, l.outs(), l.matrix());
}

std::vector<DimLabel> positional_dims(const std::vector<int> &bits) {
  std::vector<DimLabel> dims;
  for (size_t i = 0; i < bits.size(); ++i)
    dims.push_back({"dim" + std::to_string(i), bits[i]});
  return dims;
}

} // namespace linlayout
