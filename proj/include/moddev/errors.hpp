#ifndef MODDEV_ERRORS_HPP
#define MODDEV_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace moddev {

/// Failure classes surfaced by the library. Validation/configuration
/// problems map to CLI exit code 2, numerical failures to exit code 3.
enum class Errc {
    NotSymmetric,
    NotPositiveDefinite,
    DimensionMismatch,
    EmptyPolytope,
    InvalidSet,
    InvalidAxis,
    NoConvergence,
    TooLarge,
    CovarianceMismatch,
    SupportViolation,
    DegenerateG2,
    InvalidConfig,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::NotSymmetric: return "NotSymmetric";
        case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::EmptyPolytope: return "EmptyPolytope";
        case Errc::InvalidSet: return "InvalidSet";
        case Errc::InvalidAxis: return "InvalidAxis";
        case Errc::NoConvergence: return "NoConvergence";
        case Errc::TooLarge: return "TooLarge";
        case Errc::CovarianceMismatch: return "CovarianceMismatch";
        case Errc::SupportViolation: return "SupportViolation";
        case Errc::DegenerateG2: return "DegenerateG2";
        case Errc::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

/// True for failures of the numerics (solver did not converge, etc.) as
/// opposed to rejected input.
inline bool is_numerical_failure(Errc c) {
    return c == Errc::NoConvergence || c == Errc::DegenerateG2 ||
           c == Errc::SupportViolation;
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what),
          code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
    throw Error(code, what);
}

}  // namespace moddev

#endif
