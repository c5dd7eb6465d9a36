#include "linlayout/constructors.hpp"
#include "linlayout/error.hpp"
#include "linlayout/plan_json.hpp"
#include "linlayout/planner.hpp"
#include "linlayout/shape_ops.hpp"
#include "linlayout/simulator.hpp"
#include "linlayout/text_format.hpp"

#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace linlayout;

namespace {

int log2_count(const char *what, int v) {
  if (v < 1 || (v & (v - 1)))
    throw Error(std::string(what) + " values must be powers of two, got " + std::to_string(v));
  int k = 0;
  while ((1 << k) < v)
    ++k;
  return k;
}

std::vector<int> log2_counts(const char *what, const std::vector<int> &v) {
  std::vector<int> out;
  for (int x : v)
    out.push_back(log2_count(what, x));
  return out;
}

std::vector<std::pair<std::string, int>> labels(const std::vector<DimLabel> &dims) {
  std::vector<std::pair<std::string, int>> out;
  for (const DimLabel &d : dims)
    out.emplace_back(d.name, d.bits);
  return out;
}

MmaKind mma_kind(const std::string &s) {
  if (s == "mma")
    return MmaKind::mma;
  if (s == "wgmma")
    return MmaKind::wgmma;
  throw Error("mma kind must be 'mma' or 'wgmma', got '" + s + "'");
}

MmaOperand mma_operand(const std::string &s) {
  if (s == "lhs")
    return MmaOperand::lhs;
  if (s == "rhs")
    return MmaOperand::rhs;
  if (s == "out")
    return MmaOperand::out;
  throw Error("mma operand must be 'lhs', 'rhs' or 'out', got '" + s + "'");
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Linear layouts over GF(2): construction, analysis and conversion planning";
  py::register_exception<Error>(m, "LayoutError", PyExc_ValueError);

  py::class_<LinearLayout>(m, "Layout")
      .def_static(
          "parse", [](const std::string &text) { return parse_layout(text).layout; },
          py::arg("text"), "Parse exactly one layout in the text format.")
      .def("to_text", [](const LinearLayout &l, const std::string &name) { return print_layout(name, l); },
           py::arg("name") = "L")
      .def_property_readonly("ins", [](const LinearLayout &l) { return labels(l.ins()); })
      .def_property_readonly("outs", [](const LinearLayout &l) { return labels(l.outs()); })
      .def_property_readonly("columns",
                             [](const LinearLayout &l) {
                               auto c = l.matrix().columns();
                               return std::vector<BitVec>(c.begin(), c.end());
                             })
      .def("__call__", [](const LinearLayout &l, const HwPoint &p) { return ll_apply(l, p); },
           py::arg("point"), "Tensor coordinates of a hardware point (one entry per input).")
      .def("is_injective", &LinearLayout::is_injective)
      .def("is_surjective", &LinearLayout::is_surjective)
      .def("is_distributed", [](const LinearLayout &l) { return ll_is_distributed(l); })
      .def("is_memory", [](const LinearLayout &l) { return ll_is_memory(l); })
      .def("contiguous_elements",
           [](const LinearLayout &l) { return std::uint64_t{1} << ll_contiguous_log2(l); })
      .def("broadcast_mask",
           [](const LinearLayout &l, const std::string &in) { return ll_broadcast_mask(l, in); },
           py::arg("input"))
      .def("compose", [](const LinearLayout &outer, const LinearLayout &inner) {
             return ll_compose(outer, inner);
           })
      .def("product", [](const LinearLayout &a, const LinearLayout &b) { return ll_product(a, b); })
      .def("right_inverse", [](const LinearLayout &l) { return ll_right_inverse(l); })
      .def("left_divide", [](const LinearLayout &l, const LinearLayout &t) { return ll_left_divide(l, t); })
      .def(py::self == py::self)
      .def("__repr__", [](const LinearLayout &l) { return print_layout("L", l); });

  m.def(
      "blocked",
      [](const std::vector<int> &shape, const std::vector<int> &reg, const std::vector<int> &threads,
         const std::vector<int> &warps, const std::vector<int> &order) {
        return blocked({log2_counts("shape", shape), log2_counts("reg", reg),
                        log2_counts("threads", threads), log2_counts("warps", warps), order});
      },
      py::arg("shape"), py::arg("reg"), py::arg("threads"), py::arg("warps"), py::arg("order"),
      "Blocked layout; all sizes are element counts.");
  m.def(
      "mma",
      [](const std::string &kind, const std::string &operand, int bitwidth,
         const std::vector<int> &warps, const std::vector<int> &order) {
        MmaSpec s;
        s.kind = mma_kind(kind);
        s.operand = mma_operand(operand);
        s.bitwidth = bitwidth;
        s.warps = log2_counts("warps", warps);
        s.order = order;
        return mma_tile(s);
      },
      py::arg("kind") = "mma", py::arg("operand") = "out", py::arg("bitwidth") = 16,
      py::arg("warps") = std::vector<int>{1, 1}, py::arg("order") = std::vector<int>{1, 0});
  m.def(
      "swizzle",
      [](int m_bits, int n_bits, int vec, int per_phase, int max_phase) {
        return mma_swizzle({m_bits, n_bits, vec, per_phase, max_phase});
      },
      py::arg("m"), py::arg("n"), py::arg("vec") = 1, py::arg("per_phase") = 1,
      py::arg("max_phase") = 1, "Swizzled 2^m x 2^n memory layout.");

  m.def(
      "plan_convert_json",
      [](const LinearLayout &a, const LinearLayout &b, int elem_bits, const std::string &banks,
         int payload) {
        BankConfig cfg = banks.empty() ? BankConfig::from_env() : BankConfig::parse(banks);
        return plan_to_json(plan_convert(a, b, elem_bits, cfg, payload));
      },
      py::arg("a"), py::arg("b"), py::arg("elem_bits") = 16, py::arg("banks") = "",
      py::arg("payload") = 32);
  m.def(
      "check_plan_json",
      [](const std::string &plan) { return sim_report_to_json(sim_convert(plan_from_json(plan))); },
      py::arg("plan"));
  m.def(
      "propagate_json",
      [](const std::string &graph) {
        OpGraph g = parse_graph(graph);
        return propagation_to_json(g, propagate(g));
      },
      py::arg("graph"));
}
