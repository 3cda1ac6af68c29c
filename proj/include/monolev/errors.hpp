#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace monolev {

enum class Errc {
    // input validation
    NegativeMass,
    EmptyMeasure,
    OrderTooHigh,
    DomainMismatch,
    NotProbability,
    LowerHalfPlane,
    DerivativeUnavailable,
    SchemaViolation,
    InvalidArgument,
    DimensionCap,
    // numerical failures
    EvaluatorUndefined,
    MassDeficit,
    NegativeDensityExcess,
    NodeBudgetExceeded,
    StepFailure,
    OutsideDomain,
    RadiusTooSmall,
    MomentBreakdown,
    NotCompressible,
    SingularResolvent,
    NoWitnessFound,
};

constexpr std::string_view errc_name(Errc c) {
    switch (c) {
        case Errc::NegativeMass: return "NegativeMass";
        case Errc::EmptyMeasure: return "EmptyMeasure";
        case Errc::OrderTooHigh: return "OrderTooHigh";
        case Errc::DomainMismatch: return "DomainMismatch";
        case Errc::NotProbability: return "NotProbability";
        case Errc::LowerHalfPlane: return "LowerHalfPlane";
        case Errc::DerivativeUnavailable: return "DerivativeUnavailable";
        case Errc::SchemaViolation: return "SchemaViolation";
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::DimensionCap: return "DimensionCap";
        case Errc::EvaluatorUndefined: return "EvaluatorUndefined";
        case Errc::MassDeficit: return "MassDeficit";
        case Errc::NegativeDensityExcess: return "NegativeDensityExcess";
        case Errc::NodeBudgetExceeded: return "NodeBudgetExceeded";
        case Errc::StepFailure: return "StepFailure";
        case Errc::OutsideDomain: return "OutsideDomain";
        case Errc::RadiusTooSmall: return "RadiusTooSmall";
        case Errc::MomentBreakdown: return "MomentBreakdown";
        case Errc::NotCompressible: return "NotCompressible";
        case Errc::SingularResolvent: return "SingularResolvent";
        case Errc::NoWitnessFound: return "NoWitnessFound";
    }
    return "Unknown";
}

/// True for failures of a numerical procedure (flow, inversion, recursion),
/// false for rejected inputs.
constexpr bool is_numerical(Errc c) { return c >= Errc::EvaluatorUndefined; }

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what) {
    if (!cond) fail(code, what);
}

}  // namespace monolev
