#pragma once

#include "linlayout/planner.hpp"
#include "linlayout/shape_ops.hpp"
#include "linlayout/simulator.hpp"

#include <string>
#include <string_view>

namespace linlayout {

/// Schema tag written into every plan document.
inline constexpr const char *kPlanSchema = "linlayout.plan/1";

/// Plan as JSON. Layouts are embedded in the text format; tensor vectors are
/// LSB-first bit strings of the tensor width.
std::string plan_to_json(const ConversionPlan &plan, int indent = 2);
/// Inverse of plan_to_json. Throws on a wrong schema tag or missing fields.
ConversionPlan plan_from_json(std::string_view text);

std::string sim_report_to_json(const SimReport &report, int indent = 2);

/// Per-value layouts, conversions and rematerializations. Layouts equal to a
/// named layout of the graph keep that name; others are named L0, L1, ...
std::string propagation_to_json(const OpGraph &g, const Propagation &p, int indent = 2);

} // namespace linlayout
