#pragma once

#include <stdexcept>
#include <string>

namespace psb {

enum class ErrorCode {
    invalid_argument,
    parse,
    model,
    geometry,
    element,
    solver,
    verify,
    io,
    internal,
};

const char* error_code_name(ErrorCode code);

// Library-wide exception carrying a coarse error category and, for input
// processing, a 1-based source line (-1 when not applicable).
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message, int line = -1)
        : std::runtime_error(line >= 0 ? message + " (line " + std::to_string(line) + ")"
                                       : message),
          code_(code),
          line_(line) {}

    ErrorCode code() const { return code_; }
    int line() const { return line_; }

  private:
    ErrorCode code_;
    int line_;
};

}  // namespace psb
