#pragma once

#include <stdexcept>
#include <string>

namespace ioda {

/// Failure categories, surfaced by the CLI as distinct exit codes.
enum class ErrorCategory {
  kUsage = 2,
  kIo = 3,
  kFormat = 4,
  kInvariant = 5,
  kConfig = 6,
  kSession = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

const char* to_string(ErrorCategory category);

}  // namespace ioda
