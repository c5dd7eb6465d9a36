#include "linlayout/plan_json.hpp"

#include "linlayout/error.hpp"
#include "linlayout/text_format.hpp"

#include <json.hpp>

namespace linlayout {

namespace {

using json = nlohmann::ordered_json;

json bits(const std::vector<BitVec> &v, int d) {
  json out = json::array();
  for (BitVec x : v)
    out.push_back(to_bitstring(x, d));
  return out;
}

std::vector<BitVec> bits_from(const json &j) {
  std::vector<BitVec> out;
  for (const json &x : j)
    out.push_back(from_bitstring(x.get<std::string>()));
  return out;
}

std::string layout_text(const char *name, const LinearLayout &l) { return print_layout(name, l); }

LinearLayout layout_from(const json &j, const char *field) {
  try {
    return parse_layout(j.at(field).get<std::string>()).layout;
  } catch (const Error &e) {
    throw Error(std::string("field '") + field + "': " + e.what());
  }
}

json stats_json(const PlanStats &s) {
  return {{"shuffle_rounds", s.shuffle_rounds},
          {"read_wavefronts", s.read_wavefronts},
          {"write_wavefronts", s.write_wavefronts},
          {"smem_bytes", s.smem_bytes}};
}

json shuffle_json(const ShufflePlan &s) {
  json rounds = json::array();
  for (const ShuffleRound &r : s.rounds) {
    json lanes = json::array();
    for (const ShuffleLane &l : r.lanes)
      lanes.push_back({{"warp", l.warp},
                       {"thread", l.thread},
                       {"src_thread", l.src_thread},
                       {"send", l.send},
                       {"recv", l.recv}});
    rounds.push_back({{"index", r.index}, {"offset", to_bitstring(r.offset, s.d)}, {"lanes", lanes}});
  }
  return {{"d", s.d},
          {"payload_bits", s.payload_bits},
          {"V", bits(s.V, s.d)},
          {"I", bits(s.I, s.d)},
          {"E", bits(s.E, s.d)},
          {"F", bits(s.F, s.d)},
          {"G", bits(s.G, s.d)},
          {"R", bits(s.R, s.d)},
          {"fill_mask", s.fill_mask},
          {"rounds", rounds}};
}

ShufflePlan shuffle_from(const json &j) {
  ShufflePlan s;
  s.d = j.at("d");
  s.payload_bits = j.at("payload_bits");
  s.V = bits_from(j.at("V"));
  s.I = bits_from(j.at("I"));
  s.E = bits_from(j.at("E"));
  s.F = bits_from(j.at("F"));
  s.G = bits_from(j.at("G"));
  s.R = bits_from(j.at("R"));
  s.fill_mask = j.at("fill_mask");
  for (const json &r : j.at("rounds")) {
    ShuffleRound round;
    round.index = r.at("index");
    round.offset = from_bitstring(r.at("offset").get<std::string>());
    for (const json &l : r.at("lanes")) {
      ShuffleLane lane;
      lane.warp = l.at("warp");
      lane.thread = l.at("thread");
      lane.src_thread = l.at("src_thread");
      lane.send = l.at("send").get<std::vector<std::uint64_t>>();
      lane.recv = l.at("recv").get<std::vector<std::uint64_t>>();
      round.lanes.push_back(std::move(lane));
    }
    s.rounds.push_back(std::move(round));
  }
  return s;
}

json smem_json(const MemoryLayout &m) {
  int d = m.layout.out_bits();
  return {{"layout", layout_text("smem", m.layout)},
          {"v", m.v},
          {"b", m.b},
          {"s", m.s},
          {"H", bits(m.H, d)},
          {"C", bits(m.C, d)},
          {"padding", m.padding},
          {"conflict_free_dim", m.conflict_free_dim()},
          {"elem_bits", m.elem_bits},
          {"banks", m.cfg.to_string()}};
}

MemoryLayout smem_from(const json &j) {
  MemoryLayout m;
  m.layout = layout_from(j, "layout");
  m.v = j.at("v");
  m.b = j.at("b");
  m.s = j.at("s");
  m.H = bits_from(j.at("H"));
  m.C = bits_from(j.at("C"));
  m.padding = j.at("padding");
  m.elem_bits = j.at("elem_bits");
  m.cfg = BankConfig::parse(j.at("banks").get<std::string>());
  return m;
}

} // namespace

std::string plan_to_json(const ConversionPlan &plan, int indent) {
  json j;
  j["schema"] = kPlanSchema;
  j["kind"] = to_string(plan.kind);
  j["elem_bits"] = plan.elem_bits;
  if (!plan.reason.empty())
    j["reason"] = plan.reason;
  j["a"] = layout_text("a", plan.a);
  j["b"] = layout_text("b", plan.b);
  j["quotient"] = layout_text("quotient", plan.quotient);
  if (plan.kind == PlanKind::reg_permute)
    j["reg_table"] = plan.reg_table;
  if (plan.shuffle)
    j["shuffle"] = shuffle_json(*plan.shuffle);
  if (plan.smem)
    j["smem"] = smem_json(*plan.smem);
  j["stats"] = stats_json(plan.stats);
  return j.dump(indent);
}

ConversionPlan plan_from_json(std::string_view text) {
  try {
    json j = json::parse(text);
    if (!j.contains("schema") || j["schema"] != kPlanSchema)
      throw Error(std::string("expected schema ") + kPlanSchema);
    ConversionPlan p;
    p.kind = plan_kind(j.at("kind").get<std::string>());
    p.elem_bits = j.at("elem_bits");
    p.reason = j.value("reason", "");
    p.a = layout_from(j, "a");
    p.b = layout_from(j, "b");
    p.quotient = layout_from(j, "quotient");
    if (j.contains("reg_table"))
      p.reg_table = j["reg_table"].get<std::vector<std::uint64_t>>();
    if (j.contains("shuffle"))
      p.shuffle = shuffle_from(j["shuffle"]);
    if (j.contains("smem"))
      p.smem = smem_from(j["smem"]);
    const json &s = j.at("stats");
    p.stats.shuffle_rounds = s.at("shuffle_rounds");
    p.stats.read_wavefronts = s.at("read_wavefronts");
    p.stats.write_wavefronts = s.at("write_wavefronts");
    p.stats.smem_bytes = s.at("smem_bytes");
    return p;
  } catch (const json::exception &e) {
    throw Error(std::string("plan JSON: ") + e.what());
  } catch (const Error &e) {
    throw Error(std::string("plan JSON: ") + e.what());
  }
}

std::string sim_report_to_json(const SimReport &r, int indent) {
  json mism = json::array();
  for (const Mismatch &m : r.mismatches)
    mism.push_back({{"warp", m.warp},
                    {"thread", m.thread},
                    {"reg", m.reg},
                    {"expected", m.expected},
                    {"got", m.got}});
  json j = {{"correct", r.correct},
            {"shuffle_rounds", r.shuffle_rounds},
            {"read_wavefronts", r.read_wavefronts},
            {"write_wavefronts", r.write_wavefronts},
            {"smem_bytes", r.smem_bytes},
            {"mismatch_count", r.mismatch_count},
            {"mismatches", mism}};
  return j.dump(indent);
}

std::string propagation_to_json(const OpGraph &g, const Propagation &p, int indent) {
  json layouts = json::object();
  std::vector<std::pair<std::string, LinearLayout>> named(g.layouts.begin(), g.layouts.end());
  int fresh = 0;
  auto name_of = [&](const LinearLayout &l) {
    for (const auto &[name, known] : named)
      if (known == l) {
        if (!layouts.contains(name))
          layouts[name] = print_layout(name, l);
        return name;
      }
    std::string name = "L" + std::to_string(fresh++);
    while (g.layouts.count(name))
      name = "L" + std::to_string(fresh++);
    named.emplace_back(name, l);
    layouts[name] = print_layout(name, l);
    return name;
  };

  json values = json::array();
  for (size_t i = 0; i < g.nodes.size(); ++i)
    values.push_back({{"id", g.nodes[i].id},
                      {"op", g.nodes[i].op},
                      {"layout", name_of(p.layouts[i])}});
  json conv = json::array();
  for (const Conversion &c : p.conversions)
    conv.push_back({{"value", g.nodes[c.value].id},
                    {"user", g.nodes[c.user].id},
                    {"from", name_of(c.from)},
                    {"to", name_of(c.to)}});
  json remat = json::array();
  for (const Rematerialization &r : p.rematerialized)
    remat.push_back({{"value", g.nodes[r.value].id},
                     {"user", g.nodes[r.user].id},
                     {"layout", name_of(r.layout)}});
  json j = {{"schema", "linlayout.propagation/1"},
            {"values", values},
            {"conversions", conv},
            {"rematerialized", remat},
            {"layouts", layouts}};
  return j.dump(indent);
}

} // namespace linlayout
