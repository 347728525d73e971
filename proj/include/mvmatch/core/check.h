#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace mvm {
namespace internal {

[[noreturn]] inline void ThrowCheck(const char* file, int line,
                                    const char* expr, const std::string& msg) {
  std::ostringstream os;
  os << file << ":" << line << ": check failed: " << expr;
  if (!msg.empty()) os << " (" << msg << ")";
  throw std::invalid_argument(os.str());
}

}  // namespace internal
}  // namespace mvm

// Throws std::invalid_argument when a precondition does not hold.
#define MVM_CHECK(cond, msg)                                          \
  do {                                                                \
    if (!(cond)) {                                                    \
      ::mvm::internal::ThrowCheck(__FILE__, __LINE__, #cond, (msg)); \
    }                                                                 \
  } while (0)
