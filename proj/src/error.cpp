#include "deixis/error.hpp"

#include <array>
#include <utility>

namespace deixis {

namespace {

constexpr std::array<std::pair<ErrorCode, std::string_view>, 35> kNames{{
    {ErrorCode::NonPositiveDepth, "NonPositiveDepth"},
    {ErrorCode::DegenerateBBox, "DegenerateBBox"},
    {ErrorCode::BBoxOutsideImage, "BBoxOutsideImage"},
    {ErrorCode::LowConfidence, "LowConfidence"},
    {ErrorCode::DegenerateForearm, "DegenerateForearm"},
    {ErrorCode::DegenerateRay, "DegenerateRay"},
    {ErrorCode::NoMatchingClass, "NoMatchingClass"},
    {ErrorCode::OutOfRange, "OutOfRange"},
    {ErrorCode::MalformedMetric, "MalformedMetric"},
    {ErrorCode::InvalidLexicon, "InvalidLexicon"},
    {ErrorCode::OutOfOrderEvent, "OutOfOrderEvent"},
    {ErrorCode::PronounBeforeClass, "PronounBeforeClass"},
    {ErrorCode::NoRecentRay, "NoRecentRay"},
    {ErrorCode::ObjectBindingFailed, "ObjectBindingFailed"},
    {ErrorCode::IncompleteIntention, "IncompleteIntention"},
    {ErrorCode::TooManySubcommands, "TooManySubcommands"},
    {ErrorCode::UnknownAction, "UnknownAction"},
    {ErrorCode::PreconditionViolated, "PreconditionViolated"},
    {ErrorCode::Unreachable, "Unreachable"},
    {ErrorCode::Timeout, "Timeout"},
    {ErrorCode::TransportFailure, "TransportFailure"},
    {ErrorCode::EmptyResponse, "EmptyResponse"},
    {ErrorCode::CannotReach, "CannotReach"},
    {ErrorCode::SyntaxError, "SyntaxError"},
    {ErrorCode::UnknownPrimitive, "UnknownPrimitive"},
    {ErrorCode::ArgumentSchemaMismatch, "ArgumentSchemaMismatch"},
    {ErrorCode::UnknownApiCall, "UnknownApiCall"},
    {ErrorCode::CollisionPredicted, "CollisionPredicted"},
    {ErrorCode::GraspMissed, "GraspMissed"},
    {ErrorCode::ReleaseOverVoid, "ReleaseOverVoid"},
    {ErrorCode::UnknownScenePreset, "UnknownScenePreset"},
    {ErrorCode::SessionClosed, "SessionClosed"},
    {ErrorCode::MalformedMessage, "MalformedMessage"},
    {ErrorCode::InvalidConfig, "InvalidConfig"},
    {ErrorCode::InvalidEpisode, "InvalidEpisode"},
}};

}  // namespace

std::string_view to_string(ErrorCode code) {
    for (const auto& [c, name] : kNames) {
        if (c == code) return name;
    }
    return "Unknown";
}

std::optional<ErrorCode> error_code_from_string(std::string_view name) {
    for (const auto& [c, n] : kNames) {
        if (n == name) return c;
    }
    return std::nullopt;
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace deixis
