#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dkgraph {

enum class ErrorCode {
    SumMismatch,
    NotSorted,
    NegativeEntry,
    InvalidParameter,
    TupleMismatch,
    TooLarge,
    UnknownVertex,
    Disconnected,
    NotALeaf,
    DuplicateLabel,
    SurplusMismatch,
    ShapeMismatch,
    InsufficientLeaves,
    OddSum,
    VertexCollision,
    CutsNotIncreasing,
    AnchorOutOfRange,
    UnknownMark,
    InsufficientMarks,
    IndexOutOfRange,
    FourPointViolation,
    NegativeLength,
    ParseError,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::SumMismatch: return "SumMismatch";
    case ErrorCode::NotSorted: return "NotSorted";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::TupleMismatch: return "TupleMismatch";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::UnknownVertex: return "UnknownVertex";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::NotALeaf: return "NotALeaf";
    case ErrorCode::DuplicateLabel: return "DuplicateLabel";
    case ErrorCode::SurplusMismatch: return "SurplusMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InsufficientLeaves: return "InsufficientLeaves";
    case ErrorCode::OddSum: return "OddSum";
    case ErrorCode::VertexCollision: return "VertexCollision";
    case ErrorCode::CutsNotIncreasing: return "CutsNotIncreasing";
    case ErrorCode::AnchorOutOfRange: return "AnchorOutOfRange";
    case ErrorCode::UnknownMark: return "UnknownMark";
    case ErrorCode::InsufficientMarks: return "InsufficientMarks";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::FourPointViolation: return "FourPointViolation";
    case ErrorCode::NegativeLength: return "NegativeLength";
    case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above; the
/// CLI maps them onto exit statuses.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

} // namespace dkgraph
