#pragma once

#include <stdexcept>
#include <string>

namespace ordmed {

/// Broad failure class; the CLI maps each one to a distinct exit code.
enum class ErrorCategory {
  kUsage,      // bad arguments or options
  kIo,         // file missing or unreadable
  kData,       // dataset or configuration violates an invariant
  kNumeric,    // non-convergence, boundary solutions, singular systems
  kSolver,     // optimizer limits or internal solver failures
};

inline const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kUsage: return "usage";
    case ErrorCategory::kIo: return "io";
    case ErrorCategory::kData: return "data";
    case ErrorCategory::kNumeric: return "numeric";
    case ErrorCategory::kSolver: return "solver";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] inline void fail(ErrorCategory c, const std::string& msg) {
  throw Error(c, msg);
}

inline void require(bool cond, ErrorCategory c, const std::string& msg) {
  if (!cond) fail(c, msg);
}

}  // namespace ordmed
