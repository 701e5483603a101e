#pragma once

#include <stdexcept>
#include <string>

namespace xsm {

/// Host-side failure of a tool (bad image, unreadable file, compile error).
/// Machine-level faults never throw this; they are delivered as traps.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace xsm
