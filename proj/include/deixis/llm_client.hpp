#pragma once

#include "deixis/error.hpp"
#include "deixis/planner.hpp"

#include <chrono>
#include <memory>
#include <string>

namespace deixis {

/// A chat-completion endpoint. Implementations throw Timeout,
/// TransportFailure, EmptyResponse or CannotReach.
class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual std::string complete(const std::string& system, const std::string& user) = 0;
    virtual std::string model_id() const = 0;
};

struct LlmConfig {
    std::string base_url;  // e.g. https://host/v1
    std::string model;
    std::string api_key;
    std::chrono::milliseconds timeout{20000};
    int retries = 2;
    std::chrono::milliseconds backoff{500};  // doubled after each failed attempt
    bool offline = false;
    double temperature = 0.0;

    /// Fills base_url, model and api_key from HRI_LLM_BASE_URL,
    /// HRI_LLM_MODEL and HRI_LLM_API_KEY where set.
    static LlmConfig from_environment(LlmConfig defaults);
};

/// OpenAI-style /chat/completions over HTTP(S). Requests and responses are
/// written to the "llm.audit" logger with the key redacted.
class HttpChatClient final : public ChatClient {
public:
    explicit HttpChatClient(LlmConfig config);

    std::string complete(const std::string& system, const std::string& user) override;
    std::string model_id() const override { return config_.model; }

private:
    std::string attempt(const std::string& body);

    LlmConfig config_;
};

/// Sends the bundle and returns the raw reply text.
std::string plan_llm(const PromptBundle& bundle, ChatClient& client);

/// plan_llm, then parse_plan, then validate_sequence. Provenance is llm(model).
ActionSequence plan_with_llm(const PromptBundle& bundle, ChatClient& client, const Scene& scene,
                             const RobotState& robot, const ApiSpec& api, const WorkcellConfig& cell);

/// Replaces every occurrence of `secret` with "***".
std::string redact(std::string text, const std::string& secret);

}  // namespace deixis
