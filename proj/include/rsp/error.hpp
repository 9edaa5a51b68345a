#pragma once

#include <stdexcept>
#include <string>

namespace rsp {

// Thrown for precondition violations, malformed inputs and storage failures.
// Validation-style operations report problems instead of throwing; see
// block_store::validate_manifest.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rsp
