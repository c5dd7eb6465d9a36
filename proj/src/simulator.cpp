#include "linlayout/simulator.hpp"

#include "planner_util.hpp"

#include <map>
#include <set>

namespace linlayout {

using namespace detail;

namespace {

constexpr size_t kMaxReportedMismatches = 32;

std::uint64_t count(int bits) { return std::uint64_t{1} << bits; }

// Flat hardware index of (reg, thread, warp) in a reg/thread/warp layout.
BitVec hw_index(const LinearLayout &l, std::uint64_t reg, std::uint64_t thread,
                std::uint64_t warp) {
  return reg << l.in_offset("reg") | thread << l.in_offset("thread") |
         warp << l.in_offset("warp");
}

void check_range(std::uint64_t v, int bits, const std::string &what) {
  if (v >= count(bits))
    throw Error("plan references " + what + " " + std::to_string(v) + ", only " +
                std::to_string(count(bits)) + " exist");
}

void run_reg_permute(const ConversionPlan &plan, const std::vector<std::int64_t> &src,
                     std::vector<std::int64_t> &dst) {
  const LinearLayout &a = plan.a, &b = plan.b;
  if (plan.reg_table.size() != count(b.in_size("reg")))
    throw Error("register table has " + std::to_string(plan.reg_table.size()) +
                " entries, B has " + std::to_string(count(b.in_size("reg"))) + " registers");
  for (std::uint64_t s : plan.reg_table)
    check_range(s, a.in_size("reg"), "A register");
  for (std::uint64_t w = 0; w < count(b.in_size("warp")); ++w)
    for (std::uint64_t t = 0; t < count(b.in_size("thread")); ++t)
      for (std::uint64_t r = 0; r < plan.reg_table.size(); ++r)
        dst[hw_index(b, r, t, w)] = src[hw_index(a, plan.reg_table[r], t, w)];
}

int run_shuffle(const ConversionPlan &plan, const std::vector<std::int64_t> &src,
                std::vector<std::int64_t> &dst) {
  const LinearLayout &a = plan.a, &b = plan.b;
  const ShufflePlan &sp = *plan.shuffle;
  int tbits = a.in_size("thread"), wbits = a.in_size("warp");
  if (b.in_size("thread") != tbits || b.in_size("warp") != wbits)
    throw Error("shuffle plans need equal thread and warp counts in A and B");
  std::uint64_t nlanes = count(tbits + wbits);
  for (const ShuffleRound &round : sp.rounds) {
    if (round.lanes.size() != nlanes)
      throw Error("round " + std::to_string(round.index) + " lists " +
                  std::to_string(round.lanes.size()) + " lanes, expected " +
                  std::to_string(nlanes));
    std::vector<std::vector<std::int64_t>> payload(nlanes);
    std::vector<bool> seen(nlanes, false);
    for (const ShuffleLane &lane : round.lanes) {
      check_range(lane.warp, wbits, "warp");
      check_range(lane.thread, tbits, "thread");
      check_range(lane.src_thread, tbits, "thread");
      std::uint64_t id = lane.warp << tbits | lane.thread;
      if (seen[id])
        throw Error("round " + std::to_string(round.index) + " lists lane (" +
                    std::to_string(lane.warp) + ", " + std::to_string(lane.thread) + ") twice");
      seen[id] = true;
      if (lane.send.size() != lane.recv.size())
        throw Error("round " + std::to_string(round.index) +
                    ": send and receive vectors differ in length");
      for (std::uint64_t r : lane.send) {
        check_range(r, a.in_size("reg"), "A register");
        payload[id].push_back(src[hw_index(a, r, lane.thread, lane.warp)]);
      }
    }
    for (const ShuffleLane &lane : round.lanes) {
      const std::vector<std::int64_t> &got = payload[lane.warp << tbits | lane.src_thread];
      for (size_t k = 0; k < lane.recv.size(); ++k) {
        check_range(lane.recv[k], b.in_size("reg"), "B register");
        dst[hw_index(b, lane.recv[k], lane.thread, lane.warp)] =
            k < got.size() ? got[k] : -1;
      }
    }
  }
  BitVec fill = sp.fill_mask;
  for (std::uint64_t w = 0; w < count(wbits); ++w)
    for (std::uint64_t t = 0; t < count(tbits); ++t)
      for (std::uint64_t r = 0; r < count(b.in_size("reg")); ++r)
        if (r & fill)
          dst[hw_index(b, r, t, w)] = dst[hw_index(b, r & ~fill, t, w)];
  return static_cast<int>(sp.rounds.size());
}

void run_shared(const ConversionPlan &plan, const std::vector<std::int64_t> &src,
                std::vector<std::int64_t> &dst, SimReport &rep) {
  const MemoryLayout &mem = *plan.smem;
  LinearLayout off = mem.offset_layout();
  if (!ll_is_memory(off) || off.outs() != plan.a.outs())
    throw Error("memory layout is not an invertible offset map onto the tensor");
  BitMatrix inv = bm_right_inverse(off.matrix());
  std::vector<std::int64_t> smem(count(off.in_bits()), -1);
  for (BitVec h = 0; h < src.size(); ++h)
    if (src[h] >= 0)
      smem[inv.apply(plan.a.apply_flat(h))] = src[h];
  for (BitVec h = 0; h < dst.size(); ++h)
    dst[h] = smem[inv.apply(plan.b.apply_flat(h))];
  rep.write_wavefronts = sim_bank_count(mem, plan.a).total;
  rep.read_wavefronts = sim_bank_count(mem, plan.b).total;
  rep.smem_bytes = static_cast<std::int64_t>(smem.size()) * plan.elem_bits / 8;
}

} // namespace

SimReport sim_convert(const ConversionPlan &plan) {
  const LinearLayout &a = plan.a, &b = plan.b;
  check_pair(a, b);
  std::vector<std::int64_t> src(count(a.in_bits())), dst(count(b.in_bits()), -1);
  for (BitVec h = 0; h < src.size(); ++h)
    src[h] = static_cast<std::int64_t>(a.apply_flat(h));

  SimReport rep;
  switch (plan.kind) {
  case PlanKind::noop:
    if (a.ins() != b.ins())
      throw Error("noop plan between layouts with different hardware shapes");
    dst = src;
    break;
  case PlanKind::reg_permute:
    run_reg_permute(plan, src, dst);
    break;
  case PlanKind::warp_shuffle:
    if (!plan.shuffle)
      throw Error("warp_shuffle plan without shuffle rounds");
    rep.shuffle_rounds = run_shuffle(plan, src, dst);
    break;
  case PlanKind::shared_memory:
    if (!plan.smem)
      throw Error("shared_memory plan without a memory layout");
    run_shared(plan, src, dst, rep);
    break;
  }

  for (BitVec h = 0; h < dst.size(); ++h) {
    std::int64_t want = static_cast<std::int64_t>(b.apply_flat(h));
    if (dst[h] == want)
      continue;
    ++rep.mismatch_count;
    if (rep.mismatches.size() < kMaxReportedMismatches) {
      HwPoint p = b.unpack_in(h);
      Mismatch m;
      m.reg = p[b.in_index("reg")];
      m.thread = p[b.in_index("thread")];
      m.warp = p[b.in_index("warp")];
      m.expected = want;
      m.got = dst[h];
      rep.mismatches.push_back(m);
    }
  }
  rep.correct = rep.mismatch_count == 0;
  return rep;
}

BankCount sim_bank_count(const MemoryLayout &mem, const LinearLayout &dist) {
  LinearLayout off = mem.offset_layout();
  if (off.outs() != dist.outs())
    throw Error("memory and distributed layouts cover different tensor shapes");
  BitMatrix inv = bm_right_inverse(off.matrix());
  std::vector<int> vregs = vector_registers(mem, dist);
  std::uint64_t vmask = 0;
  for (int r : vregs)
    vmask |= std::uint64_t{1} << r;
  std::int64_t w = mem.elem_bits / 8;
  std::int64_t vbytes = (std::int64_t{1} << vregs.size()) * w;
  int tbits = dist.in_size("thread");
  int g = std::min(bank_group_bits(mem.cfg.banks, mem.cfg.bank_bytes, vbytes), tbits);
  std::int64_t bb = mem.cfg.bank_bytes, row = mem.cfg.row_bytes();

  BankCount out;
  out.min_per_instruction = -1;
  for (std::uint64_t wp = 0; wp < count(dist.in_size("warp")); ++wp)
    for (std::uint64_t r = 0; r < count(dist.in_size("reg")); ++r) {
      if (r & vmask)
        continue;
      int per_instr = 0;
      for (std::uint64_t q = 0; q < count(tbits - g); ++q) {
        std::map<std::int64_t, std::set<std::int64_t>> rows_per_bank;
        for (std::uint64_t lo = 0; lo < count(g); ++lo) {
          std::uint64_t t = q << g | lo;
          for (std::uint64_t e = 0; e < count(static_cast<int>(vregs.size())); ++e) {
            std::uint64_t reg = r;
            for (size_t k = 0; k < vregs.size(); ++k)
              if (e >> k & 1)
                reg |= std::uint64_t{1} << vregs[k];
            BitVec x = dist.apply_flat(hw_index(dist, reg, t, wp));
            std::int64_t byte = static_cast<std::int64_t>(inv.apply(x)) * w;
            for (std::int64_t k = byte / bb; k <= (byte + w - 1) / bb; ++k)
              rows_per_bank[k % mem.cfg.banks].insert(k * bb / row);
          }
        }
        size_t worst = 1;
        for (auto &[bank, rows] : rows_per_bank)
          worst = std::max(worst, rows.size());
        per_instr += static_cast<int>(worst);
        ++out.transactions;
      }
      out.total += per_instr;
      out.max_per_instruction = std::max(out.max_per_instruction, per_instr);
      if (out.min_per_instruction < 0 || per_instr < out.min_per_instruction)
        out.min_per_instruction = per_instr;
    }
  return out;
}

std::vector<std::uint64_t> sim_gather(const GatherPlan &plan, const LinearLayout &l,
                                      const std::vector<std::uint64_t> &src,
                                      const std::vector<std::uint64_t> &idx) {
  if (!plan.feasible)
    throw Error("gather plan is infeasible: " + plan.reason);
  check_distributed(l, "L");
  std::uint64_t n = count(l.out_bits());
  if (src.size() != n || idx.size() != n)
    throw Error("gather inputs must have one entry per tensor element");
  const DimLabel &dim = l.outs()[plan.axis];
  int shift = l.out_offset(dim.name);
  BitVec axis_mask = low_mask(dim.bits) << shift;
  DistInverse inv(l);

  int rbits = l.in_size("reg"), tbits = l.in_size("thread"), wbits = l.in_size("warp");
  std::vector<std::uint64_t> regs(count(l.in_bits()));
  std::vector<bool> filled(regs.size(), false);
  for (std::uint64_t mask : plan.masks) {
    for (std::uint64_t w = 0; w < count(wbits); ++w)
      for (std::uint64_t t = 0; t < count(tbits); ++t)
        for (std::uint64_t r = 0; r < count(rbits); ++r) {
          BitVec h = hw_index(l, r, t, w);
          BitVec pos = l.apply_flat(h);
          std::uint64_t j = idx[pos];
          if (j >= count(dim.bits))
            throw Error("gather index " + std::to_string(j) + " out of range for an axis of " +
                        std::to_string(count(dim.bits)));
          BitVec want = (pos & ~axis_mask) | j << shift;
          HwPoint delta = l.unpack_in(inv.hw(pos ^ want));
          if (delta[l.in_index("thread")] != mask)
            continue;
          std::uint64_t sr = r ^ delta[l.in_index("reg")];
          regs[h] = src[l.apply_flat(hw_index(l, sr, t ^ mask, w))];
          filled[h] = true;
        }
  }
  std::vector<std::uint64_t> out(n);
  for (BitVec h = 0; h < regs.size(); ++h) {
    if (!filled[h])
      throw Error("gather left a register empty; the plan misses a round");
    out[l.apply_flat(h)] = regs[h];
  }
  return out;
}

bool sim_shape_op(const ShapeOp &op, const LinearLayout &in, const LinearLayout &out) {
  int it = in.in_index("thread"), iw = in.in_index("warp");
  int ot = out.in_index("thread"), ow = out.in_index("warp");
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::set<BitVec>> held;
  for (BitVec h = 0; h < count(in.in_bits()); ++h) {
    HwPoint p = in.unpack_in(h);
    held[{p[it], p[iw]}].insert(in.apply_flat(h));
  }
  for (BitVec h = 0; h < count(out.in_bits()); ++h) {
    HwPoint p = out.unpack_in(h);
    TensorPoint y = out.unpack_out(out.apply_flat(h));
    for (const TensorPoint &x : op.sources(y))
      if (!held[{p[ot], p[ow]}].count(in.pack_out(x)))
        return false;
  }
  return true;
}

} // namespace linlayout
