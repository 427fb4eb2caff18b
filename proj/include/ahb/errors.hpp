#pragma once

#include <stdexcept>
#include <string>

namespace ahb {

// All failures surface as typed exceptions. UserError covers bad inputs
// (maps to CLI exit 3), NumericError covers breakdown during a run (exit 4).

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct UserError : Error {
  using Error::Error;
};
struct NumericError : Error {
  using Error::Error;
};

struct InvalidDimension : UserError { using UserError::UserError; };
struct InvalidBounds : UserError { using UserError::UserError; };
struct InvalidRadius : UserError { using UserError::UserError; };
struct InvalidData : UserError { using UserError::UserError; };
struct InvalidParameter : UserError { using UserError::UserError; };
struct DimensionMismatch : UserError { using UserError::UserError; };
struct OutOfRange : UserError { using UserError::UserError; };
struct OutsideDomain : UserError { using UserError::UserError; };
struct InfeasibleStart : UserError { using UserError::UserError; };

struct IllConditionedMetric : NumericError { using NumericError::NumericError; };
struct RankDeficient : NumericError { using NumericError::NumericError; };
struct IllConditionedKKT : NumericError { using NumericError::NumericError; };
struct FactorizationFailure : NumericError { using NumericError::NumericError; };
struct NoConvergence : NumericError { using NumericError::NumericError; };
struct InnerLoopExceeded : NumericError { using NumericError::NumericError; };
struct NonFiniteValue : NumericError { using NumericError::NumericError; };
struct InvariantViolation : NumericError { using NumericError::NumericError; };

} // namespace ahb
