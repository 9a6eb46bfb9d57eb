#include "spl/error.hpp"

namespace spl {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::InvalidParameter: return "invalid parameter";
    case Errc::NegativeLoss: return "negative loss";
    case Errc::EmptyGrid: return "empty grid";
    case Errc::InvalidSpec: return "invalid spec";
    case Errc::DimensionMismatch: return "dimension mismatch";
    case Errc::InvalidLabel: return "invalid label";
    case Errc::SingularSystem: return "singular system";
    case Errc::DuplicateId: return "duplicate id";
    case Errc::UnknownId: return "unknown id";
    case Errc::InvalidRank: return "invalid rank map";
    case Errc::UnsupportedRegularizer: return "unsupported regularizer";
    case Errc::NotPositiveSemidefinite: return "not positive semidefinite";
    case Errc::Parse: return "parse error";
    case Errc::Io: return "i/o error";
  }
  return "unknown error";
}

}  // namespace spl
