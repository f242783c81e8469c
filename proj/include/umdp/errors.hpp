#pragma once

#include <stdexcept>
#include <string>

namespace umdp {

/// Stable error codes surfaced by the CLI.
enum class ErrorCode {
    RegionNotGridAligned,
    CapacityExceeded,
    OutOfDomain,
    CellOutsideSupport,
    SyntaxError,
    UnknownAtom,
    StateExplosion,
    EmptyTrace,
    ReachOutsideDomain,
    InfeasibleIntervals,
    SupportTooLarge,
    InstanceTooLarge,
    ConfigInvalid,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace umdp
