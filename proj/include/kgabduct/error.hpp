#pragma once

#include <stdexcept>
#include <string>

namespace kgabduct {

enum class ErrorKind {
  kIo,
  kParse,
  kInvalidArgument,
  kForeignSymbol,
  kUnsatisfiable,
  kTooLarge,
};

const char* to_string(ErrorKind kind) noexcept;

// Every failure raised by the core library carries a kind so the C API can map
// it onto a status code without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace kgabduct
