#pragma once

#include <stdexcept>
#include <string>

namespace oec {

// One exception type for the whole core; the code maps 1:1 onto the C API
// status values and the CLI exit codes.
class Error : public std::runtime_error {
 public:
  enum class Code {
    invariant,    // input or result violates a documented invariant
    bad_input,    // malformed or unusable input (parse failure, bad flag)
    unsupported,  // valid request outside this build's limits (exact cap, ...)
    internal
  };

  Error(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

inline Error invariant_error(const std::string& what) { return Error(Error::Code::invariant, what); }
inline Error bad_input_error(const std::string& what) { return Error(Error::Code::bad_input, what); }
inline Error unsupported_error(const std::string& what) { return Error(Error::Code::unsupported, what); }

}  // namespace oec
