#include "psbfem/errors.hpp"

namespace psb {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::parse: return "parse";
        case ErrorCode::model: return "model";
        case ErrorCode::geometry: return "geometry";
        case ErrorCode::element: return "element";
        case ErrorCode::solver: return "solver";
        case ErrorCode::verify: return "verify";
        case ErrorCode::io: return "io";
        case ErrorCode::internal: return "internal";
    }
    return "unknown";
}

}  // namespace psb
