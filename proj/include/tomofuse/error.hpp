#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tomofuse {

enum class ErrorCode {
    ConstantVolume,
    BadMagic,
    ShapeOverflow,
    TruncatedFile,
    InvalidTensor,
    InvalidSpec,
    InvalidDepth,
    ShapeUnsupported,
    ShapeMismatch,
    LengthMismatch,
    MissingClass,
    NonSquareRotation,
    DegenerateLabels,
    InvalidConfig,
    Io,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::ConstantVolume: return "ConstantVolume";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::ShapeOverflow: return "ShapeOverflow";
        case ErrorCode::TruncatedFile: return "TruncatedFile";
        case ErrorCode::InvalidTensor: return "InvalidTensor";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::InvalidDepth: return "InvalidDepth";
        case ErrorCode::ShapeUnsupported: return "ShapeUnsupported";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::MissingClass: return "MissingClass";
        case ErrorCode::NonSquareRotation: return "NonSquareRotation";
        case ErrorCode::DegenerateLabels: return "DegenerateLabels";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace tomofuse
