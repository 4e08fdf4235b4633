#pragma once

#include <stdexcept>
#include <string>

namespace mhc {

// Maps onto the CLI exit codes: config 2, input 3, infeasible 4, internal 5.
enum class ErrorKind { config, input, infeasible, internal };

/// Error raised by every module. Carries where it happened (module and
/// operation) next to the cause so the CLI can print a structured message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, std::string operation, std::string cause);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }
  const std::string& operation() const noexcept { return operation_; }
  const std::string& cause() const noexcept { return cause_; }

 private:
  ErrorKind kind_;
  std::string module_;
  std::string operation_;
  std::string cause_;
};

/// Decoding failure for images, label maps, hierarchies and LP files.
class FormatError : public Error {
 public:
  FormatError(std::string module, std::string operation, std::string cause)
      : Error(ErrorKind::input, std::move(module), std::move(operation), std::move(cause)) {}
};

int exit_code(ErrorKind kind) noexcept;

}  // namespace mhc
