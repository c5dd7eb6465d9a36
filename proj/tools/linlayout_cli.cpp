#include "linlayout/constructors.hpp"
#include "linlayout/error.hpp"
#include "linlayout/plan_json.hpp"
#include "linlayout/planner.hpp"
#include "linlayout/shape_ops.hpp"
#include "linlayout/simulator.hpp"
#include "linlayout/text_format.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace linlayout;

namespace {

// Exit codes: 0 ok, 1 a checked plan is wrong, 2 bad input.
constexpr int kPlanWrong = 1;
constexpr int kBadInput = 2;

std::string read_text(const std::string &path) {
  if (path == "-") {
    std::stringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// FILE or FILE:NAME; "-" reads stdin.
NamedLayout load_layout(const std::string &spec) {
  std::string path = spec, name;
  size_t colon = spec.rfind(':');
  if (colon != std::string::npos && colon > 0) {
    path = spec.substr(0, colon);
    name = spec.substr(colon + 1);
  }
  std::vector<NamedLayout> all;
  try {
    all = parse_layouts(read_text(path));
  } catch (const Error &e) {
    throw Error(path + ": " + e.what());
  }
  if (all.empty())
    throw Error(path + " defines no layout");
  if (name.empty()) {
    if (all.size() > 1) {
      std::string names;
      for (const NamedLayout &l : all)
        names += " " + l.name;
      throw Error(path + " defines several layouts; pick one with " + path + ":NAME (" +
                  names.substr(1) + ")");
    }
    return all[0];
  }
  for (const NamedLayout &l : all)
    if (l.name == name)
      return l;
  throw Error(path + " has no layout named '" + name + "'");
}

int log2_exact(const std::string &flag, int v) {
  if (v < 1 || (v & (v - 1)))
    throw Error(flag + " values must be powers of two, got " + std::to_string(v));
  int k = 0;
  while ((1 << k) < v)
    ++k;
  return k;
}

std::vector<int> log2_all(const std::string &flag, const std::vector<int> &v) {
  std::vector<int> out;
  for (int x : v)
    out.push_back(log2_exact(flag, x));
  return out;
}

void print_built(const std::string &name, const LinearLayout &l) {
  std::cout << print_layout(name, l) << print_matrix_comment(l);
}

const char *yes(bool b) { return b ? "yes" : "no"; }

struct BlockedArgs {
  std::vector<int> shape, reg, threads, warps, order;
  std::string name = "blocked";
};

struct MmaArgs {
  std::string kind = "mma", operand = "out", name = "mma";
  int bitwidth = 16;
  std::vector<int> warps{1, 1}, order{1, 0};
};

struct SwizzleArgs {
  SwizzleSpec spec;
  std::string name = "swizzle";
};

struct UnswizzledArgs {
  std::vector<int> shape, order;
  std::string name = "unswizzled";
};

struct ConvertArgs {
  std::string a, b, emit, banks;
  int elem_bits = 16;
  int payload = 32;
  bool json = false;
};

struct CheckArgs {
  std::string plan;
  bool json = false;
};

struct GatherArgs {
  std::string layout;
  int axis = 0;
};

void add_blocked(CLI::App &build, BlockedArgs &a) {
  CLI::App *c = build.add_subcommand("blocked", "Blocked register/thread/warp layout (element counts)");
  c->add_option("--shape", a.shape, "tensor shape, e.g. 16,16")->required()->delimiter(',');
  c->add_option("--reg", a.reg, "elements per thread per dim")->required()->delimiter(',');
  c->add_option("--threads", a.threads, "threads per warp per dim")->required()->delimiter(',');
  c->add_option("--warps", a.warps, "warps per dim")->required()->delimiter(',');
  c->add_option("--order", a.order, "dims fastest first")->required()->delimiter(',');
  c->add_option("--name", a.name, "layout name");
  c->callback([&a] {
    BlockedSpec s{log2_all("--shape", a.shape), log2_all("--reg", a.reg),
                  log2_all("--threads", a.threads), log2_all("--warps", a.warps), a.order};
    print_built(a.name, blocked(s));
  });
}

void add_mma(CLI::App &build, MmaArgs &a) {
  CLI::App *c = build.add_subcommand("mma", "mma / wgmma operand or accumulator layout");
  c->add_option("--kind", a.kind, "mma or wgmma")->check(CLI::IsMember({"mma", "wgmma"}));
  c->add_option("--operand", a.operand, "lhs, rhs or out")
      ->check(CLI::IsMember({"lhs", "rhs", "out"}));
  c->add_option("--bitwidth", a.bitwidth, "element bits");
  c->add_option("--warps", a.warps, "warps along M,N")->delimiter(',');
  c->add_option("--order", a.order, "warp order, fastest first")->delimiter(',');
  c->add_option("--name", a.name, "layout name");
  c->callback([&a] {
    MmaSpec s;
    s.kind = a.kind == "mma" ? MmaKind::mma : MmaKind::wgmma;
    s.operand = a.operand == "lhs" ? MmaOperand::lhs
                : a.operand == "rhs" ? MmaOperand::rhs
                                     : MmaOperand::out;
    s.bitwidth = a.bitwidth;
    s.warps = log2_all("--warps", a.warps);
    s.order = a.order;
    print_built(a.name, mma_tile(s));
  });
}

void add_swizzle(CLI::App &build, SwizzleArgs &a) {
  CLI::App *c = build.add_subcommand("swizzle", "xor-swizzled memory layout of a 2^m x 2^n tile");
  c->add_option("--m", a.spec.m, "log2 rows")->required();
  c->add_option("--n", a.spec.n, "log2 columns")->required();
  c->add_option("--vec", a.spec.vec, "vector width in elements");
  c->add_option("--per-phase", a.spec.per_phase, "rows per phase");
  c->add_option("--max-phase", a.spec.max_phase, "number of phases");
  c->add_option("--name", a.name, "layout name");
  c->callback([&a] { print_built(a.name, mma_swizzle(a.spec)); });
}

void add_unswizzled(CLI::App &build, UnswizzledArgs &a) {
  CLI::App *c = build.add_subcommand("unswizzled", "Plain memory layout (element counts)");
  c->add_option("--shape", a.shape, "tensor shape")->required()->delimiter(',');
  c->add_option("--order", a.order, "dims fastest first (default row-major)")->delimiter(',');
  c->add_option("--name", a.name, "layout name");
  c->callback([&a] { print_built(a.name, unswizzled(log2_all("--shape", a.shape), a.order)); });
}

void run_props(const std::string &spec) {
  NamedLayout n = load_layout(spec);
  const LinearLayout &l = n.layout;
  std::cout << print_layout(n.name, l);
  std::cout << "injective=" << yes(l.is_injective()) << "\n";
  std::cout << "surjective=" << yes(l.is_surjective()) << "\n";
  std::cout << "distributed=" << yes(ll_is_distributed(l)) << "\n";
  std::cout << "memory=" << yes(ll_is_memory(l)) << "\n";
  std::cout << "contiguous=" << (std::uint64_t{1} << ll_contiguous_log2(l)) << "\n";
  for (const DimLabel &in : l.ins())
    std::cout << "broadcast." << in.name << "=" << to_bitstring(ll_broadcast_mask(l, in.name), in.bits)
              << "\n";
}

void run_convert(const ConvertArgs &a) {
  NamedLayout la = load_layout(a.a), lb = load_layout(a.b);
  BankConfig cfg = a.banks.empty() ? BankConfig::from_env() : BankConfig::parse(a.banks);
  ConversionPlan p = plan_convert(la.layout, lb.layout, a.elem_bits, cfg, a.payload);
  std::string text = plan_to_json(p);
  if (!a.emit.empty()) {
    std::ofstream out(a.emit);
    if (!out)
      throw Error("cannot write '" + a.emit + "'");
    out << text << "\n";
  }
  if (a.json) {
    std::cout << text << "\n";
    return;
  }
  std::cout << "kind=" << to_string(p.kind) << "\n";
  if (p.kind != PlanKind::noop && !p.reason.empty())
    std::cout << "reason=" << p.reason << "\n";
  std::cout << print_layout("quotient", p.quotient);
  int d = p.a.out_bits();
  auto list = [d](const std::vector<BitVec> &v) {
    std::string s;
    for (BitVec x : v)
      s += " " + to_bitstring(x, d);
    return s.empty() ? std::string(" -") : s;
  };
  if (p.kind == PlanKind::reg_permute) {
    std::cout << "reg_table=";
    for (size_t i = 0; i < p.reg_table.size(); ++i)
      std::cout << (i ? "," : "") << p.reg_table[i];
    std::cout << "\n";
  }
  if (p.shuffle) {
    const ShufflePlan &s = *p.shuffle;
    std::cout << "V:" << list(s.V) << "\nI:" << list(s.I) << "\nE:" << list(s.E)
              << "\nF:" << list(s.F) << "\nG:" << list(s.G) << "\nR:" << list(s.R) << "\n";
  }
  if (p.smem) {
    const MemoryLayout &m = *p.smem;
    std::cout << "banks=" << m.cfg.to_string() << " v=" << m.v << " b=" << m.b << " s=" << m.s
              << " conflict_free_dim=" << m.conflict_free_dim() << "\n";
    std::cout << print_layout("smem", m.layout);
  }
  std::cout << "shuffle_rounds=" << p.stats.shuffle_rounds
            << " write_wavefronts=" << p.stats.write_wavefronts
            << " read_wavefronts=" << p.stats.read_wavefronts
            << " smem_bytes=" << p.stats.smem_bytes << "\n";
}

int run_check(const CheckArgs &a) {
  ConversionPlan p = plan_from_json(read_text(a.plan));
  SimReport r = sim_convert(p);
  if (a.json) {
    std::cout << sim_report_to_json(r) << "\n";
  } else {
    std::cout << "correct=" << yes(r.correct) << "\n";
    std::cout << "shuffle_rounds=" << r.shuffle_rounds
              << " write_wavefronts=" << r.write_wavefronts
              << " read_wavefronts=" << r.read_wavefronts << " smem_bytes=" << r.smem_bytes
              << "\n";
    for (const Mismatch &m : r.mismatches)
      std::cout << "mismatch warp=" << m.warp << " thread=" << m.thread << " reg=" << m.reg
                << " expected=" << m.expected << " got=" << m.got << "\n";
    if (r.mismatch_count > static_cast<std::int64_t>(r.mismatches.size()))
      std::cout << "... " << r.mismatch_count - r.mismatches.size() << " more\n";
  }
  return r.correct ? 0 : kPlanWrong;
}

void run_gather(const GatherArgs &a) {
  NamedLayout n = load_layout(a.layout);
  GatherPlan g = plan_gather(n.layout, a.axis);
  std::cout << "feasible=" << yes(g.feasible) << "\n";
  if (!g.feasible) {
    std::cout << "reason=" << g.reason << "\n";
    return;
  }
  std::cout << "rounds=" << g.rounds() << "\nthread_masks=";
  for (size_t i = 0; i < g.masks.size(); ++i)
    std::cout << (i ? "," : "") << g.masks[i];
  std::cout << "\n";
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Linear layout toolkit: build, inspect and convert GPU tensor layouts"};
  app.require_subcommand(1);

  CLI::App *build = app.add_subcommand("build", "Print a layout from a constructor");
  build->require_subcommand(1);
  BlockedArgs blocked_args;
  MmaArgs mma_args;
  SwizzleArgs swizzle_args;
  UnswizzledArgs unswizzled_args;
  add_blocked(*build, blocked_args);
  add_mma(*build, mma_args);
  add_swizzle(*build, swizzle_args);
  add_unswizzled(*build, unswizzled_args);

  std::string props_spec;
  CLI::App *props = app.add_subcommand("props", "Predicates, contiguity and broadcast masks");
  props->add_option("layout", props_spec, "FILE[:NAME] or - for stdin")->required();
  props->callback([&] { run_props(props_spec); });

  std::string parse_spec;
  CLI::App *parse = app.add_subcommand("parse", "Validate a layout file and print it canonically");
  parse->add_option("file", parse_spec, "FILE or - for stdin")->required();
  parse->callback([&] {
    for (const NamedLayout &l : parse_layouts(read_text(parse_spec)))
      std::cout << print_layout(l.name, l.layout);
  });

  ConvertArgs convert_args;
  CLI::App *convert = app.add_subcommand("convert", "Plan a layout conversion from A to B");
  convert->add_option("a", convert_args.a, "FILE[:NAME]")->required();
  convert->add_option("b", convert_args.b, "FILE[:NAME]")->required();
  convert->add_option("--elem-bits", convert_args.elem_bits, "element width: 8, 16, 32 or 64");
  convert->add_option("--banks", convert_args.banks,
                      "bank config BANKSxBYTES (default LINLAYOUT_BANKS or 32x4)");
  convert->add_option("--payload", convert_args.payload, "shuffle payload bits");
  convert->add_option("--emit", convert_args.emit, "write the plan JSON here");
  convert->add_flag("--json", convert_args.json, "print the plan JSON instead of a summary");
  convert->callback([&] { run_convert(convert_args); });

  CheckArgs check_args;
  CLI::App *check = app.add_subcommand("check", "Simulate a plan JSON; exit 1 if it is wrong");
  check->add_option("plan", check_args.plan, "plan JSON file or -")->required();
  check->add_flag("--json", check_args.json, "print the report as JSON");
  int check_status = 0;
  check->callback([&] { check_status = run_check(check_args); });

  std::string graph_path;
  CLI::App *prop = app.add_subcommand("propagate", "Assign layouts to every value of an op graph");
  prop->add_option("graph", graph_path, "graph file or -")->required();
  prop->callback([&] {
    OpGraph g = parse_graph(read_text(graph_path));
    std::cout << propagation_to_json(g, propagate(g)) << "\n";
  });

  GatherArgs gather_args;
  CLI::App *gather = app.add_subcommand("gather", "Plan an in-warp gather along one axis");
  gather->add_option("layout", gather_args.layout, "FILE[:NAME]")->required();
  gather->add_option("--axis", gather_args.axis, "tensor dim index")->required();
  gather->callback([&] { run_gather(gather_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kBadInput;
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  }
  return check_status;
}
