#include "linlayout/planner.hpp"

#include "planner_util.hpp"

#include <cstdlib>
#include <sstream>

namespace linlayout {

using namespace detail;

namespace {

BitVec combo(const std::vector<BitVec> &basis, std::uint64_t k) {
  BitVec x = 0;
  for (size_t i = 0; i < basis.size(); ++i)
    if (k >> i & 1)
      x ^= basis[i];
  return x;
}

// Empty when a warp shuffle can realize a -> b.
std::string shuffle_blocker(const LinearLayout &a, const LinearLayout &b) {
  if (a.columns_of("warp") != b.columns_of("warp"))
    return "warp columns differ, data must cross warps";
  if (ll_broadcast_mask(a, "thread") || ll_broadcast_mask(b, "thread"))
    return "a layout repeats data across threads";
  if (a.in_size("thread") != b.in_size("thread"))
    return "thread counts differ";
  BitVec sa = span_mask(a.columns_of("reg")) | span_mask(a.columns_of("thread"));
  BitVec sb = span_mask(b.columns_of("reg")) | span_mask(b.columns_of("thread"));
  if (sa != sb)
    return "registers and threads of A and B cover different tensor bits";
  return "";
}

} // namespace

BankConfig BankConfig::parse(std::string_view text) {
  std::string s(text);
  size_t x = s.find('x');
  BankConfig c;
  try {
    if (x == std::string::npos)
      throw std::invalid_argument(s);
    size_t used = 0;
    c.banks = std::stoi(s.substr(0, x), &used);
    if (used != x)
      throw std::invalid_argument(s);
    c.bank_bytes = std::stoi(s.substr(x + 1), &used);
    if (used != s.size() - x - 1)
      throw std::invalid_argument(s);
  } catch (const std::exception &) {
    throw Error("bank config '" + s + "' must look like 32x4 (banks x bytes per bank)");
  }
  auto pow2 = [](int v) { return v >= 1 && (v & (v - 1)) == 0; };
  if (!pow2(c.banks) || !pow2(c.bank_bytes))
    throw Error("bank config '" + s + "': both numbers must be powers of two");
  return c;
}

BankConfig BankConfig::from_env() {
  const char *env = std::getenv("LINLAYOUT_BANKS");
  return env && *env ? parse(env) : BankConfig{};
}

std::string BankConfig::to_string() const {
  return std::to_string(banks) + "x" + std::to_string(bank_bytes);
}

const char *to_string(PlanKind k) {
  switch (k) {
  case PlanKind::noop:
    return "noop";
  case PlanKind::reg_permute:
    return "reg_permute";
  case PlanKind::warp_shuffle:
    return "warp_shuffle";
  case PlanKind::shared_memory:
    return "shared_memory";
  }
  return "?";
}

PlanKind plan_kind(std::string_view name) {
  for (PlanKind k : {PlanKind::noop, PlanKind::reg_permute, PlanKind::warp_shuffle,
                     PlanKind::shared_memory})
    if (name == to_string(k))
      return k;
  throw Error("unknown plan kind '" + std::string(name) + "'");
}

LinearLayout quotient_layout(const LinearLayout &a, const LinearLayout &b) {
  if (a.outs() != b.outs())
    throw Error("layouts A and B cover different tensor shapes");
  BitMatrix x = bm_solve_min_weight(b.matrix(), a.matrix());
  std::vector<DimLabel> outs(b.ins().rbegin(), b.ins().rend());
  return LinearLayout(a.ins(), outs, x);
}

ShufflePlan plan_shuffle(const LinearLayout &a, const LinearLayout &b, int elem_bits,
                         int payload_bits) {
  check_pair(a, b);
  check_elem_bits(elem_bits);
  if (payload_bits < 8 || (payload_bits & (payload_bits - 1)))
    throw Error("shuffle payload must be a power of two of at least 8 bits, got " +
                std::to_string(payload_bits));
  std::string why = shuffle_blocker(a, b);
  if (!why.empty())
    throw Error("warp shuffle does not apply: " + why);

  ShufflePlan p;
  p.d = a.out_bits();
  p.payload_bits = payload_bits;
  std::vector<BitVec> a_reg = nonzero(a.columns_of("reg"));
  std::vector<BitVec> b_reg = nonzero(b.columns_of("reg"));
  std::vector<BitVec> a_thr = a.columns_of("thread");
  std::vector<BitVec> b_thr = b.columns_of("thread");

  // Elements wider than the payload travel as several shuffles of one element.
  int vmax = std::max(0, log2_floor(payload_bits / elem_bits));
  for (BitVec x : sorted(a_reg))
    if (contains(b_reg, x) && static_cast<int>(p.V.size()) < vmax)
      p.V.push_back(x);
  for (BitVec x : sorted(a_thr))
    (contains(b_thr, x) ? p.I : p.E).push_back(x);
  for (BitVec x : sorted(b_thr))
    if (!contains(p.I, x))
      p.F.push_back(x);
  for (size_t i = 0; i < p.E.size(); ++i)
    p.G.push_back(p.E[i] ^ p.F[i]);

  SpanBuilder sb(p.d);
  for (const auto *set : {&p.V, &p.I, &p.G})
    for (BitVec x : *set)
      sb.insert(x);
  std::vector<BitVec> pool = a_reg;
  pool.insert(pool.end(), a_thr.begin(), a_thr.end());
  for (BitVec u : sorted(pool))
    if (sb.insert(u))
      p.R.push_back(u);
  p.fill_mask = ll_broadcast_mask(b, "reg");

  DistInverse ia(a), ib(b);
  int ireg = a.in_index("reg"), ithr = a.in_index("thread");
  int jreg = b.in_index("reg"), jthr = b.in_index("thread");
  std::uint64_t nthreads = std::uint64_t{1} << a.in_size("thread");
  std::uint64_t nwarps = std::uint64_t{1} << a.in_size("warp");
  int woff = a.in_offset("warp");
  std::vector<BitVec> ig = p.I;
  ig.insert(ig.end(), p.G.begin(), p.G.end());
  std::uint64_t nvec = std::uint64_t{1} << p.V.size();

  for (std::uint64_t r = 0; r < (std::uint64_t{1} << p.R.size()); ++r) {
    ShuffleRound round;
    round.index = static_cast<int>(r);
    round.offset = combo(p.R, r);
    round.lanes.resize(nwarps * nthreads);
    for (std::uint64_t w = 0; w < nwarps; ++w) {
      BitVec wx = a.apply_flat(w << woff);
      for (std::uint64_t k = 0; k < (std::uint64_t{1} << ig.size()); ++k) {
        BitVec x = round.offset ^ combo(ig, k) ^ wx;
        std::uint64_t ta = ia.point(x)[ithr], tb = ib.point(x)[jthr];
        ShuffleLane &snd = round.lanes[w * nthreads + ta];
        ShuffleLane &rcv = round.lanes[w * nthreads + tb];
        snd.warp = rcv.warp = w;
        snd.thread = ta;
        rcv.thread = tb;
        rcv.src_thread = ta;
        snd.send.clear();
        rcv.recv.clear();
        for (std::uint64_t e = 0; e < nvec; ++e) {
          BitVec y = x ^ combo(p.V, e);
          snd.send.push_back(ia.point(y)[ireg]);
          rcv.recv.push_back(ib.point(y)[jreg]);
        }
      }
    }
    p.rounds.push_back(std::move(round));
  }
  return p;
}

ConversionPlan plan_convert(const LinearLayout &a, const LinearLayout &b, int elem_bits,
                            BankConfig cfg, int payload_bits) {
  check_pair(a, b);
  check_elem_bits(elem_bits);
  ConversionPlan plan;
  plan.elem_bits = elem_bits;
  plan.a = a;
  plan.b = b;
  plan.quotient = quotient_layout(a, b);

  if (a == b) {
    plan.kind = PlanKind::noop;
    return plan;
  }

  BitVec a_regs = span_mask(a.columns_of("reg"));
  BitVec b_regs = span_mask(b.columns_of("reg"));
  bool same_lanes = a.columns_of("thread") == b.columns_of("thread") &&
                    a.columns_of("warp") == b.columns_of("warp");
  if (same_lanes && (b_regs & ~a_regs) == 0) {
    plan.kind = PlanKind::reg_permute;
    std::vector<BitVec> ar = a.columns_of("reg"), br = b.columns_of("reg");
    for (std::uint64_t r = 0; r < (std::uint64_t{1} << br.size()); ++r) {
      BitVec y = combo(br, r);
      std::uint64_t src = 0;
      for (size_t i = 0; i < ar.size(); ++i)
        if (ar[i] & y)
          src |= std::uint64_t{1} << i;
      plan.reg_table.push_back(src);
    }
    return plan;
  }
  plan.reason = same_lanes ? "no register permutation: B registers hold bits A keeps in other lanes"
                           : "no register permutation: threads or warps differ";

  std::string why = shuffle_blocker(a, b);
  if (why.empty()) {
    plan.kind = PlanKind::warp_shuffle;
    plan.shuffle = plan_shuffle(a, b, elem_bits, payload_bits);
    plan.stats.shuffle_rounds = static_cast<int>(plan.shuffle->rounds.size());
    return plan;
  }
  plan.reason = why;
  plan.kind = PlanKind::shared_memory;
  plan.smem = plan_swizzle(a, b, elem_bits, cfg);
  plan.stats.write_wavefronts = predict_wavefronts(*plan.smem, a).total;
  plan.stats.read_wavefronts = predict_wavefronts(*plan.smem, b).total;
  plan.stats.smem_bytes = (std::int64_t{1} << a.out_bits()) * elem_bits / 8;
  return plan;
}

} // namespace linlayout
