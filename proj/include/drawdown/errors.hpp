// Error hierarchy shared by every module.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace drawdown {

enum class ErrorKind {
    DegenerateDiffusion,
    DomainError,
    RegimeError,
    OverflowGuard,
    BracketError,
    StepCollapse,
    NoSignChange,
    MultipleSignChanges,
    SingularCoefficient,
    ConstraintDrift,
    QueryBelowTruncation,
    InadmissibleRate,
    InvariantViolation,
};

inline const char* kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::DegenerateDiffusion: return "DegenerateDiffusion";
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::RegimeError: return "RegimeError";
        case ErrorKind::OverflowGuard: return "OverflowGuard";
        case ErrorKind::BracketError: return "BracketError";
        case ErrorKind::StepCollapse: return "StepCollapse";
        case ErrorKind::NoSignChange: return "NoSignChange";
        case ErrorKind::MultipleSignChanges: return "MultipleSignChanges";
        case ErrorKind::SingularCoefficient: return "SingularCoefficient";
        case ErrorKind::ConstraintDrift: return "ConstraintDrift";
        case ErrorKind::QueryBelowTruncation: return "QueryBelowTruncation";
        case ErrorKind::InadmissibleRate: return "InadmissibleRate";
        case ErrorKind::InvariantViolation: return "InvariantViolation";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(std::string(kind_name(kind)) + ": " + msg), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Scan evidence attached to root-finding failures: (abscissa, value) pairs.
class ScanError : public Error {
public:
    ScanError(ErrorKind kind, const std::string& msg,
              std::vector<std::pair<double, double>> trace)
        : Error(kind, msg), trace_(std::move(trace)) {}

    const std::vector<std::pair<double, double>>& trace() const noexcept { return trace_; }

private:
    std::vector<std::pair<double, double>> trace_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
    throw Error(kind, msg);
}

}  // namespace drawdown
