#include "ioda/error.hpp"

namespace ioda {

const char* to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kUsage: return "usage";
    case ErrorCategory::kIo: return "io";
    case ErrorCategory::kFormat: return "format";
    case ErrorCategory::kInvariant: return "invariant";
    case ErrorCategory::kConfig: return "config";
    case ErrorCategory::kSession: return "session";
  }
  return "unknown";
}

}  // namespace ioda
