#include "hlsvd/errors.hpp"

namespace hlsvd
{

const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidShape: return "InvalidShape";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidK: return "InvalidK";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::ZeroPole: return "ZeroPole";
    case ErrorKind::ImaginaryResidualExceeded: return "ImaginaryResidualExceeded";
    case ErrorKind::NoTransition: return "NoTransition";
    case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::BadCoefficients: return "BadCoefficients";
    case ErrorKind::NegativeIntensity: return "NegativeIntensity";
    case ErrorKind::ZeroSignal: return "ZeroSignal";
    case ErrorKind::PerfectFilter: return "PerfectFilter";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::NonUniformGrid: return "NonUniformGrid";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace hlsvd
