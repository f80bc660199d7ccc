#include "fb/error.hpp"

namespace fb {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::NonManifold: return "NonManifold";
        case ErrorCode::InconsistentOrientation: return "InconsistentOrientation";
        case ErrorCode::DegenerateFace: return "DegenerateFace";
        case ErrorCode::DegenerateInput: return "DegenerateInput";
        case ErrorCode::DegenerateExtent: return "DegenerateExtent";
        case ErrorCode::EmptyMesh: return "EmptyMesh";
        case ErrorCode::EmptyCloud: return "EmptyCloud";
        case ErrorCode::EmptyFile: return "EmptyFile";
        case ErrorCode::Parse: return "ParseError";
        case ErrorCode::Io: return "IoFailure";
        case ErrorCode::NonFiniteForce: return "NonFiniteForce";
        case ErrorCode::OnAxisRay: return "OnAxisRay";
        case ErrorCode::RayParallelToPlane: return "RayParallelToPlane";
        case ErrorCode::InvalidBracket: return "InvalidBracket";
        case ErrorCode::Internal: return "Internal";
    }
    return "Unknown";
}

} // namespace fb
