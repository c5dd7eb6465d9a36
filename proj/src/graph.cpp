#include "linlayout/error.hpp"
#include "linlayout/shape_ops.hpp"
#include "linlayout/text_format.hpp"

#include <bit>
#include <fstream>
#include <functional>
#include <optional>
#include <regex>
#include <set>
#include <sstream>

namespace linlayout {

namespace {

const std::set<std::string, std::less<>> kSources = {"load", "constant", "arg", "splat",
                                                     "make_range", "full"};
const std::set<std::string, std::less<>> kElementwise = {
    "add", "sub", "mul", "div", "max", "min", "exp",  "exp2", "log",   "neg",
    "abs", "cast", "select", "where", "fma", "and", "or", "xor", "scale", "to_fp"};

std::string trim(std::string s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos)
    return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<int> parse_int_list(const std::string &body, int line) {
  std::vector<int> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty())
      continue;
    try {
      size_t used = 0;
      long long v = std::stoll(item, &used);
      if (used != item.size())
        throw std::invalid_argument(item);
      out.push_back(static_cast<int>(v));
    } catch (const std::exception &) {
      throw Error("line " + std::to_string(line) + ": '" + item + "' is not an integer");
    }
  }
  return out;
}

ShapeOp node_shape_op(const OpGraph &g, const OpNode &n) {
  ShapeOp op;
  op.kind = shape_op_kind(n.op);
  op.in_shape = g.nodes[n.args.at(0)].shape;
  switch (op.kind) {
  case ShapeOpKind::trans:
  case ShapeOpKind::expand_dims:
    op.params = n.attr;
    break;
  case ShapeOpKind::reshape:
  case ShapeOpKind::broadcast:
    op.params = n.shape;
    break;
  case ShapeOpKind::join:
  case ShapeOpKind::split:
    break;
  }
  return op;
}

void check_node(const OpGraph &g, const OpNode &n) {
  auto fail = [&](const std::string &msg) {
    throw Error("line " + std::to_string(n.line) + " (" + n.id + "): " + msg);
  };
  if (is_shape_op(n.op)) {
    size_t want = n.op == "join" ? 2 : 1;
    if (n.args.size() != want)
      fail(n.op + " takes " + std::to_string(want) + " operand(s)");
    for (int a : n.args)
      if (g.nodes[a].shape != g.nodes[n.args[0]].shape)
        fail("operand shapes differ");
    try {
      if (node_shape_op(g, n).out_shape() != n.shape)
        fail("declared shape does not match the result of " + n.op);
    } catch (const Error &e) {
      if (std::string(e.what()).rfind("line ", 0) == 0)
        throw;
      fail(e.what());
    }
  } else if (kElementwise.count(n.op)) {
    if (n.args.empty())
      fail(n.op + " needs operands");
    for (int a : n.args)
      if (g.nodes[a].shape != n.shape)
        fail("elementwise operand " + g.nodes[a].id + " has a different shape");
  }
}

} // namespace

int OpGraph::find(std::string_view id) const {
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id == id)
      return static_cast<int>(i);
  return -1;
}

OpGraph parse_graph(std::string_view text) {
  static const std::regex node_re(
      R"(^(%[A-Za-z0-9_.]+)\s*=\s*([A-Za-z_][A-Za-z0-9_]*)\s*\(([^)]*)\)\s*(.*)$)");
  static const std::regex anchor_re(R"(^anchor\s+(%[A-Za-z0-9_.]+)\s+([A-Za-z0-9_.\-]+)$)");
  static const std::regex kv_re(R"(([a-z]+)\s*=\s*\[([^\]]*)\])");

  OpGraph g;
  std::string layout_text;
  std::vector<std::pair<int, std::string>> anchors;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    bool graph_line = !line.empty() && (line[0] == '%' || line.rfind("anchor", 0) == 0);
    layout_text += (graph_line ? "" : raw) + "\n";
    if (!graph_line)
      continue;
    std::smatch m;
    if (std::regex_match(line, m, anchor_re)) {
      anchors.emplace_back(lineno, line);
      continue;
    }
    if (!std::regex_match(line, m, node_re))
      throw Error("line " + std::to_string(lineno) +
                  ": expected '%id = op(%args) shape=[...]' or 'anchor %id name'");
    OpNode n;
    n.id = m[1];
    n.op = m[2];
    n.line = lineno;
    if (g.find(n.id) >= 0)
      throw Error("line " + std::to_string(lineno) + ": value " + n.id + " is defined twice");
    std::stringstream args(m[3].str());
    std::string a;
    while (std::getline(args, a, ',')) {
      a = trim(a);
      if (a.empty())
        continue;
      int idx = g.find(a);
      if (idx < 0)
        throw Error("line " + std::to_string(lineno) + ": " + a + " is used before it is defined");
      n.args.push_back(idx);
    }
    std::string rest = m[4];
    bool has_shape = false;
    for (auto it = std::sregex_iterator(rest.begin(), rest.end(), kv_re);
         it != std::sregex_iterator(); ++it) {
      std::string key = (*it)[1];
      std::vector<int> vals = parse_int_list((*it)[2], lineno);
      if (key == "shape") {
        for (int v : vals) {
          if (v < 1 || !std::has_single_bit(static_cast<unsigned>(v)))
            throw Error("line " + std::to_string(lineno) + ": shape entries must be powers of two");
          n.shape.push_back(std::countr_zero(static_cast<unsigned>(v)));
        }
        has_shape = true;
      } else if (key == "attr") {
        n.attr = vals;
      } else {
        throw Error("line " + std::to_string(lineno) + ": unknown field '" + key + "'");
      }
    }
    if (!has_shape)
      throw Error("line " + std::to_string(lineno) + ": missing shape=[...]");
    g.nodes.push_back(std::move(n));
    check_node(g, g.nodes.back());
  }

  for (NamedLayout &nl : parse_layouts(layout_text)) {
    if (g.layouts.count(nl.name))
      throw Error("layout " + nl.name + " is defined twice");
    g.layouts.emplace(nl.name, nl.layout);
  }
  for (auto &[line, text_line] : anchors) {
    std::smatch m;
    std::regex_match(text_line, m, anchor_re);
    int idx = g.find(m[1].str());
    if (idx < 0)
      throw Error("line " + std::to_string(line) + ": anchor on unknown value " + m[1].str());
    if (g.anchors.count(idx))
      throw Error("line " + std::to_string(line) + ": " + m[1].str() + " is anchored twice");
    g.anchors[idx] = m[2];
  }
  return g;
}

OpGraph read_graph_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open graph file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_graph(ss.str());
}

Propagation propagate(const OpGraph &g) {
  size_t n = g.nodes.size();
  std::vector<std::optional<LinearLayout>> lay(n);
  std::vector<std::vector<std::pair<int, int>>> users(n); // (user, operand position)
  for (size_t i = 0; i < n; ++i)
    for (size_t p = 0; p < g.nodes[i].args.size(); ++p)
      users[g.nodes[i].args[p]].emplace_back(static_cast<int>(i), static_cast<int>(p));

  for (auto &[idx, name] : g.anchors) {
    auto it = g.layouts.find(name);
    if (it == g.layouts.end())
      throw Error("anchor " + g.nodes[idx].id + " names unknown layout '" + name + "'");
    std::vector<int> bits;
    for (const DimLabel &d : it->second.outs())
      bits.push_back(d.bits);
    if (bits != g.nodes[idx].shape)
      throw Error("anchor layout '" + name + "' does not match the shape of " + g.nodes[idx].id);
    lay[idx] = it->second;
  }

  auto is_shape = [&](int i) { return is_shape_op(g.nodes[i].op); };
  auto is_elem = [&](int i) { return kElementwise.count(g.nodes[i].op) > 0; };

  // Layout user `u` needs for its operands, if it constrains them.
  auto demand = [&](int u, const LinearLayout &lu) -> std::optional<LinearLayout> {
    if (is_elem(u))
      return lu;
    if (is_shape(u))
      return transfer_backward(node_shape_op(g, g.nodes[u]), lu);
    return std::nullopt;
  };

  auto preferred = [&](const std::vector<int> &ops) -> std::optional<int> {
    std::optional<int> best;
    int best_c = -1;
    for (int a : ops) {
      if (!lay[a])
        continue;
      int c = ll_contiguous_log2(*lay[a]);
      if (c > best_c || (c == best_c && a < *best)) {
        best = a;
        best_c = c;
      }
    }
    return best;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < n; ++i) {
      if (lay[i] || g.anchors.count(static_cast<int>(i)))
        continue;
      if (!is_shape(i) && !is_elem(i))
        continue;
      std::optional<int> src = preferred(g.nodes[i].args);
      if (!src)
        continue;
      if (is_elem(i)) {
        lay[i] = *lay[*src];
      } else {
        try {
          lay[i] = transfer_forward(node_shape_op(g, g.nodes[i]), *lay[*src]);
        } catch (const Error &) {
          continue;
        }
      }
      changed = true;
    }
    for (size_t i = n; i-- > 0;) {
      if (lay[i])
        continue;
      for (auto [u, p] : users[i]) {
        if (!lay[u])
          continue;
        std::optional<LinearLayout> need;
        try {
          need = demand(u, *lay[u]);
        } catch (const Error &) {
        }
        if (need) {
          lay[i] = *need;
          changed = true;
          break;
        }
      }
    }
  }

  Propagation out;
  for (size_t i = 0; i < n; ++i) {
    if (!lay[i])
      throw Error("value " + g.nodes[i].id + " (line " + std::to_string(g.nodes[i].line) +
                  ") has no layout: no anchor reaches it");
    out.layouts.push_back(*lay[i]);
  }

  // Recomputes value v in layout l; fails at anchors and opaque ops.
  std::function<bool(int, const LinearLayout &, std::vector<std::pair<int, LinearLayout>> &)>
      remat = [&](int v, const LinearLayout &l, auto &acc) -> bool {
    if (out.layouts[v] == l)
      return true;
    if (g.anchors.count(v))
      return false;
    const OpNode &node = g.nodes[v];
    if (kSources.count(node.op)) {
      acc.emplace_back(v, l);
      return true;
    }
    std::optional<LinearLayout> need;
    try {
      need = demand(v, l);
    } catch (const Error &) {
      return false;
    }
    if (!need)
      return false;
    for (int a : node.args)
      if (!remat(a, *need, acc))
        return false;
    acc.emplace_back(v, l);
    return true;
  };

  for (size_t u = 0; u < n; ++u) {
    const OpNode &node = g.nodes[u];
    std::optional<LinearLayout> need;
    try {
      need = demand(static_cast<int>(u), out.layouts[u]);
    } catch (const Error &e) {
      throw Error("value " + node.id + ": " + e.what());
    }
    if (!need)
      continue;
    for (int a : node.args) {
      if (out.layouts[a] == *need)
        continue;
      std::vector<std::pair<int, LinearLayout>> acc;
      if (remat(a, *need, acc)) {
        for (auto &[v, l] : acc)
          out.rematerialized.push_back({v, static_cast<int>(u), l});
      } else {
        out.conversions.push_back({a, static_cast<int>(u), out.layouts[a], *need});
      }
    }
  }
  return out;
}

} // namespace linlayout
