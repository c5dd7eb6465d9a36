#include "linlayout/planner.hpp"

#include "planner_util.hpp"

namespace linlayout {

using namespace detail;

namespace {

int bank_group_bits(const BankConfig &cfg, std::int64_t vector_bytes) {
  return detail::bank_group_bits(cfg.banks, cfg.bank_bytes, vector_bytes);
}

std::vector<BitVec> bank_threads(const LinearLayout &l, int gbits) {
  std::vector<BitVec> t = l.columns_of("thread");
  t.resize(std::min<size_t>(t.size(), gbits));
  return nonzero(t);
}

} // namespace

MemoryLayout plan_swizzle(const LinearLayout &a, const LinearLayout &b, int elem_bits,
                          BankConfig cfg) {
  check_pair(a, b);
  check_elem_bits(elem_bits);
  int d = a.out_bits();
  std::int64_t w = elem_bits / 8;

  MemoryLayout m;
  m.elem_bits = elem_bits;
  m.cfg = cfg;

  std::vector<BitVec> b_reg = b.columns_of("reg");
  std::vector<BitVec> vect;
  for (BitVec x : sorted(nonzero(a.columns_of("reg"))))
    if (contains(b_reg, x) && (std::int64_t{2} << vect.size()) * w <= 16)
      vect.push_back(x);
  m.v = static_cast<int>(vect.size());
  std::int64_t vbytes = (std::int64_t{1} << m.v) * w;

  int gbits = bank_group_bits(cfg, vbytes);
  std::vector<BitVec> a_bank = bank_threads(a, gbits);
  std::vector<BitVec> b_bank = bank_threads(b, gbits);

  int per_row = log2_floor(cfg.row_bytes()) - log2_floor(vbytes);
  m.b = std::clamp(per_row, 0, d - m.v);
  m.s = d - m.v - m.b;

  std::vector<BitVec> e, f;
  for (BitVec x : sorted(a_bank))
    if (!contains(b_bank, x))
      e.push_back(x);
  for (BitVec x : sorted(b_bank))
    if (!contains(a_bank, x))
      f.push_back(x);
  if (e.size() > f.size())
    std::swap(e, f);
  for (size_t i = 0; i < e.size(); ++i)
    m.H.push_back(e[i] ^ f[i]);

  SpanBuilder p(d);
  Basis pb{d, {}};
  for (const auto *set : {&vect, &a_bank, &b_bank})
    for (BitVec x : *set)
      if (p.insert(x))
        pb.vectors.push_back(x);
  Basis full = basis_complete(pb);
  m.C.assign(full.vectors.begin() + pb.size(), full.vectors.end());

  SpanBuilder used(d);
  for (BitVec x : vect)
    used.insert(x);
  std::vector<BitVec> idx;
  for (const auto *set : {&m.H, &m.C})
    for (BitVec x : *set)
      if (static_cast<int>(idx.size()) < m.s && used.insert(x))
        idx.push_back(x);
  int chosen = static_cast<int>(idx.size());
  std::vector<BitVec> fallback = sorted(a_bank);
  for (int i = 0; i < d; ++i)
    fallback.push_back(unit(i));
  for (BitVec x : fallback)
    if (static_cast<int>(idx.size()) < m.s && used.insert(x))
      idx.push_back(x);
  m.padding = static_cast<int>(idx.size()) - chosen;

  Basis vi{d, vect};
  vi.vectors.insert(vi.vectors.end(), idx.begin(), idx.end());
  Basis all = basis_complete(vi);
  std::vector<BitVec> cols = vect;
  cols.insert(cols.end(), all.vectors.begin() + vi.size(), all.vectors.end());
  cols.insert(cols.end(), idx.begin(), idx.end());
  m.layout = LinearLayout({{"vect", m.v}, {"bank", m.b}, {"idx", m.s}}, a.outs(),
                          BitMatrix(d, cols));
  return m;
}

std::vector<int> vector_registers(const MemoryLayout &mem, const LinearLayout &dist) {
  SpanBuilder sb(mem.layout.out_bits());
  for (BitVec x : mem.layout.columns_of("vect"))
    sb.insert(x);
  std::vector<int> out;
  std::vector<BitVec> regs = dist.columns_of("reg");
  for (size_t i = 0; i < regs.size(); ++i)
    if (regs[i] && sb.contains(regs[i]))
      out.push_back(static_cast<int>(i));
  return out;
}

WavefrontPrediction predict_wavefronts(const MemoryLayout &mem, const LinearLayout &dist) {
  if (mem.layout.outs() != dist.outs())
    throw Error("memory and distributed layouts cover different tensor shapes");
  int d = dist.out_bits();
  int v = static_cast<int>(vector_registers(mem, dist).size());
  std::int64_t vbytes = (std::int64_t{1} << v) * mem.elem_bits / 8;
  int gbits = bank_group_bits(mem.cfg, vbytes);
  int nthread = dist.in_size("thread");
  int g = std::min(gbits, nthread);

  // Offset bits at or above r0 select the row; vect bits sit below them.
  LinearLayout off = mem.offset_layout();
  int r0 = log2_floor(mem.cfg.row_bytes()) - log2_floor(mem.elem_bits / 8);
  Basis rows{d, mem.layout.columns_of("vect")};
  for (int i = std::max(r0, mem.v); i < d; ++i)
    rows.vectors.push_back(off.matrix().column(i));
  Basis lanes{d, bank_threads(dist, g)};
  int c = span_intersection_dim(rows, lanes);

  WavefrontPrediction p;
  p.instructions = 1 << (dist.in_size("reg") - v);
  p.transactions = 1 << (nthread - g);
  p.per_instruction = p.transactions << c;
  p.total = static_cast<std::int64_t>(p.per_instruction) * p.instructions
            << dist.in_size("warp");
  p.exact = vbytes >= mem.cfg.bank_bytes && vbytes <= mem.cfg.row_bytes() && v == mem.v;
  return p;
}

} // namespace linlayout
