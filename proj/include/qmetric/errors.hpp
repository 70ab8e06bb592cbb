#pragma once

#include <stdexcept>
#include <string>

namespace qmetric {

// Base class for every error thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonHermitian : Error { using Error::Error; };
struct NumericalFailure : Error { using Error::Error; };
struct DomainViolation : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct SingularBlock : Error { using Error::Error; };
struct NotStrictlyPositive : Error { using Error::Error; };
struct NotCptni : Error { using Error::Error; };
struct NonConvergence : Error { using Error::Error; };
struct DimCapExceeded : Error { using Error::Error; };
struct NotUnitTrace : Error { using Error::Error; };
struct TraceBoundExceeded : Error { using Error::Error; };
struct SpecViolation : Error { using Error::Error; };
struct DemoFailure : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };

} // namespace qmetric
