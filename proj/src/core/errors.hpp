#ifndef MTC_CORE_ERRORS_HPP
#define MTC_CORE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mtc {

enum class ErrorCode {
  invalid_argument,
  invalid_token,
  invalid_probability,
  unknown_word,
  truncated_stream,
  decode_integrity,
  calibration,
  certification,
  replay_underrun,
  domain,
  optimizer,
  io,
  bad_format,
  model_mismatch,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace mtc

#endif
