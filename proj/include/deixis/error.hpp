#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace deixis {

/// Every failure raised by the pipeline carries one of these codes. Tests and
/// the harness classify errors by code, never by message text.
enum class ErrorCode {
    // scene geometry
    NonPositiveDepth,
    DegenerateBBox,
    BBoxOutsideImage,
    LowConfidence,
    DegenerateForearm,
    DegenerateRay,
    NoMatchingClass,
    OutOfRange,
    // command grammar
    MalformedMetric,
    InvalidLexicon,
    // fusion
    OutOfOrderEvent,
    PronounBeforeClass,
    NoRecentRay,
    ObjectBindingFailed,
    IncompleteIntention,
    TooManySubcommands,
    // planner
    UnknownAction,
    PreconditionViolated,
    Unreachable,
    Timeout,
    TransportFailure,
    EmptyResponse,
    CannotReach,
    SyntaxError,
    UnknownPrimitive,
    ArgumentSchemaMismatch,
    UnknownApiCall,
    CollisionPredicted,
    // workcell
    GraspMissed,
    ReleaseOverVoid,
    // gateway / harness
    UnknownScenePreset,
    SessionClosed,
    MalformedMessage,
    InvalidConfig,
    InvalidEpisode,
};

std::string_view to_string(ErrorCode code);
std::optional<ErrorCode> error_code_from_string(std::string_view name);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

    // Optional context, filled in by the stage that knows it.
    std::optional<std::size_t> step;       // index into an ActionSequence
    std::optional<std::size_t> line;       // 1-based line in parsed text
    std::optional<std::string> object_id;  // offending scene object
    std::optional<ErrorCode> cause;        // wrapped error, e.g. for ObjectBindingFailed

    Error& at_step(std::size_t index) { step = index; return *this; }
    Error& at_line(std::size_t n) { line = n; return *this; }
    Error& with_object(std::string id) { object_id = std::move(id); return *this; }
    Error& caused_by(ErrorCode c) { cause = c; return *this; }

private:
    ErrorCode code_;
};

}  // namespace deixis
