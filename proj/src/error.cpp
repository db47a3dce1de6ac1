#include "kgabduct/error.hpp"

namespace kgabduct {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kIo: return "io";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kForeignSymbol: return "foreign_symbol";
    case ErrorKind::kUnsatisfiable: return "unsatisfiable";
    case ErrorKind::kTooLarge: return "too_large";
  }
  return "unknown";
}

}  // namespace kgabduct
