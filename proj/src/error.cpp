#include "shelfwise/error.hpp"

namespace shelfwise {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::UnknownObject: return "UnknownObject";
    case ErrorCode::UnknownQuantityClass: return "UnknownQuantityClass";
    case ErrorCode::CapacityTooSmall: return "CapacityTooSmall";
    case ErrorCode::NoRates: return "NoRates";
    case ErrorCode::BatchExceedsCapacity: return "BatchExceedsCapacity";
    case ErrorCode::NotIrreducible: return "NotIrreducible";
    case ErrorCode::SolverFailure: return "SolverFailure";
  }
  return "Unknown";
}

}  // namespace shelfwise
