#include "umdp/errors.hpp"

namespace umdp {

const char* error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::RegionNotGridAligned: return "RegionNotGridAligned";
    case ErrorCode::CapacityExceeded: return "CapacityExceeded";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::CellOutsideSupport: return "CellOutsideSupport";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownAtom: return "UnknownAtom";
    case ErrorCode::StateExplosion: return "StateExplosion";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::ReachOutsideDomain: return "ReachOutsideDomain";
    case ErrorCode::InfeasibleIntervals: return "InfeasibleIntervals";
    case ErrorCode::SupportTooLarge: return "SupportTooLarge";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    }
    return "UnknownError";
}

} // namespace umdp
