#ifndef FLATLAB_ERROR_HPP
#define FLATLAB_ERROR_HPP

#include <sstream>
#include <stdexcept>
#include <string>

namespace flatlab {

enum class ErrorCode {
  dimension_mismatch,
  degree_error,
  arity_error,
  invalid_group_element,
  invalid_gauge_field,
  non_commuting,
  non_closed_form,
  non_flat_connection,
  open_loop,
  bidegree_error,
  config_error,
  io_error,
  internal,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

#define FLATLAB_REQUIRE(cond, code, msg)                                        \
  do {                                                                          \
    if (!(cond)) {                                                              \
      std::ostringstream oss_;                                                  \
      oss_ << msg;                                                              \
      ::flatlab::fail(code, oss_.str());                                        \
    }                                                                           \
  } while (0)

}  // namespace flatlab

#endif
