#pragma once

#include <stdexcept>
#include <string>

namespace hlsvd
{

/// Failure categories raised by the library. The CLI maps these onto exit
/// codes (usage 2, data 3, numerical 4).
enum class ErrorKind
{
    InvalidArgument,
    InvalidShape,
    DimensionMismatch,
    InvalidK,
    NoConvergence,
    RankDeficient,
    TooLarge,
    ZeroPole,
    ImaginaryResidualExceeded,
    NoTransition,
    DegenerateDenominator,
    Unsupported,
    BadCoefficients,
    NegativeIntensity,
    ZeroSignal,
    PerfectFilter,
    ParseError,
    NonUniformGrid,
    IoError,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

    /// True for failures of the numerical pipeline rather than of the input.
    bool numerical() const noexcept
    {
        return kind_ == ErrorKind::NoConvergence || kind_ == ErrorKind::RankDeficient ||
               kind_ == ErrorKind::ImaginaryResidualExceeded || kind_ == ErrorKind::ZeroPole;
    }

private:
    ErrorKind kind_;
};

} // namespace hlsvd
