#pragma once

#include <stdexcept>
#include <string>

namespace linlayout {

/// Raised for every contract violation in the library: shape mismatches,
/// unsolvable systems, malformed text or JSON, invalid constructor specs.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string &what) : std::runtime_error(what) {}
};

} // namespace linlayout
