#include "mhc/error.hpp"

namespace mhc {

Error::Error(ErrorKind kind, std::string module, std::string operation, std::string cause)
    : std::runtime_error(module + "::" + operation + ": " + cause),
      kind_(kind),
      module_(std::move(module)),
      operation_(std::move(operation)),
      cause_(std::move(cause)) {}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config: return 2;
    case ErrorKind::input: return 3;
    case ErrorKind::infeasible: return 4;
    case ErrorKind::internal: return 5;
  }
  return 5;
}

}  // namespace mhc
