#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scc {

enum class ErrorKind {
    DimensionMismatch,
    InvalidArgument,
    EmptyInterior,
    Unsupported,
    InfeasibleGeometry,
    DirectionNotInterior,
    InitialStateOutsideCone,
    HorizonExhausted,
    InvalidPath,
    NotAdmissible,
    RankDeficient,
    NonnegativeBasisNotFound,
    NotFactorizable,
    LinearProgramFailed,
    ConfigNotFound,
    ConfigInvalid,
};

/// Machine-parsable class name, e.g. "HORIZON_EXHAUSTED".
std::string_view error_class(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace scc
