#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spl {

enum class Errc {
  InvalidParameter,
  NegativeLoss,
  EmptyGrid,
  InvalidSpec,
  DimensionMismatch,
  InvalidLabel,
  SingularSystem,
  DuplicateId,
  UnknownId,
  InvalidRank,
  UnsupportedRegularizer,
  NotPositiveSemidefinite,
  Parse,
  Io,
};

std::string_view to_string(Errc code);

// Every library failure surfaces as this exception; code() identifies the
// failure class so callers and tests can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace spl
