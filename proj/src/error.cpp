#include "scc/error.hpp"

namespace scc {

std::string_view error_class(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::DimensionMismatch: return "DIMENSION_MISMATCH";
        case ErrorKind::InvalidArgument: return "INVALID_ARGUMENT";
        case ErrorKind::EmptyInterior: return "EMPTY_INTERIOR";
        case ErrorKind::Unsupported: return "UNSUPPORTED";
        case ErrorKind::InfeasibleGeometry: return "INFEASIBLE_GEOMETRY";
        case ErrorKind::DirectionNotInterior: return "DIRECTION_NOT_INTERIOR";
        case ErrorKind::InitialStateOutsideCone: return "INITIAL_STATE_OUTSIDE_CONE";
        case ErrorKind::HorizonExhausted: return "HORIZON_EXHAUSTED";
        case ErrorKind::InvalidPath: return "INVALID_PATH";
        case ErrorKind::NotAdmissible: return "NOT_ADMISSIBLE";
        case ErrorKind::RankDeficient: return "RANK_DEFICIENT";
        case ErrorKind::NonnegativeBasisNotFound: return "NONNEGATIVE_BASIS_NOT_FOUND";
        case ErrorKind::NotFactorizable: return "NOT_FACTORIZABLE";
        case ErrorKind::LinearProgramFailed: return "LINEAR_PROGRAM_FAILED";
        case ErrorKind::ConfigNotFound: return "CONFIG_NOT_FOUND";
        case ErrorKind::ConfigInvalid: return "CONFIG_INVALID";
    }
    return "UNKNOWN";
}

}  // namespace scc
