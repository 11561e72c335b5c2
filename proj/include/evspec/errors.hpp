#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace evspec {

enum class ErrorKind {
  schema,                 // malformed input or invalid construction argument
  version,                // unsupported input schema version
  duplicate_id,
  unknown_label,
  frame_mismatch,
  invalid_proposition,
  range,
  lookup,
  coverage,               // partition does not cover the evidence set
  repartition_forbidden,  // minimize called on a discounted store
  total_conflict,
  degenerate_conflict,
  no_membership,
  everywhere_excluded,
  infeasible_assignment,
  resource_cap,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  // Process exit code used by the CLI: 2 input, 3 conflict, 4 resource.
  int exit_code() const noexcept {
    switch (kind_) {
      case ErrorKind::total_conflict:
      case ErrorKind::degenerate_conflict:
      case ErrorKind::no_membership:
      case ErrorKind::everywhere_excluded:
      case ErrorKind::infeasible_assignment:
        return 3;
      case ErrorKind::resource_cap:
        return 4;
      default:
        return 2;
    }
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace evspec
