#pragma once

#include <stdexcept>
#include <string>

namespace fb {

// One code per failure class; the C API maps these 1:1 onto fb_status values.
enum class ErrorCode {
    InvalidArgument,
    NonManifold,
    InconsistentOrientation,
    DegenerateFace,
    DegenerateInput,
    DegenerateExtent,
    EmptyMesh,
    EmptyCloud,
    EmptyFile,
    Parse,
    Io,
    NonFiniteForce,
    OnAxisRay,
    RayParallelToPlane,
    InvalidBracket,
    Internal,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace fb
