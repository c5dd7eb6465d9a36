#pragma once

#include "linlayout/layout.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace linlayout {

struct NamedLayout {
  std::string name;
  LinearLayout layout;
};

// Canonical text form:
//
//   layout A in(reg:2,thread:5,warp:1) out(dim0:4,dim1:4)
//   reg: (0,1) (1,0)
//   thread: (0,2) (0,4) (0,8) (2,0) (4,0)
//   warp: (8,0)
//
// One line per input label, listing the image of each input bit LSB-first as
// an output-coordinate tuple, or `0` for a zero column. Lines starting with
// `#` and blank lines are ignored by the parser.

std::string print_layout(std::string_view name, const LinearLayout &l);

/// The bit matrix with label headers, as `#` comment lines.
std::string print_matrix_comment(const LinearLayout &l);

std::vector<NamedLayout> parse_layouts(std::string_view text);
/// Exactly one layout; throws otherwise.
NamedLayout parse_layout(std::string_view text);

std::vector<NamedLayout> read_layout_file(const std::string &path);

} // namespace linlayout
