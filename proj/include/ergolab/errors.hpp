#pragma once

#include <stdexcept>
#include <string>

namespace ergolab {

/// Error taxonomy shared by all modules. The CLI maps Schema/Argument to
/// exit code 2 (bad config) and everything else to exit code 1.
enum class ErrorCode {
    ShapeMismatch,      // representation incompatibility between functions
    Conversion,         // unsupported representation conversion pair
    Resolution,         // target resolution cannot hold the data (K > M/2-1)
    WindowCap,          // cylinder window would exceed the table-size bound
    Kind,               // operation applied to the wrong system kind
    ExponentOverflow,   // Koopman exponent not representable
    UnsupportedOperator,// operator variant not defined on this representation
    DegenerateProbe,    // probe parameters make the probe meaningless
    Applicability,      // predictor preconditions not met
    Strategy,           // averaging strategy preconditions not met
    Argument,           // bad argument to a library call
    Schema,             // malformed config / fixture file
    Budget,             // run would exceed a configured cost ceiling
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

const char* error_code_name(ErrorCode code) noexcept;

} // namespace ergolab
