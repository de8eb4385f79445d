#include "deixis/llm_client.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>
#include <spdlog/sinks/null_sink.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <thread>

namespace deixis {

namespace {

std::shared_ptr<spdlog::logger> audit_log() {
    auto log = spdlog::get("llm.audit");
    if (!log) {
        log = std::make_shared<spdlog::logger>("llm.audit", std::make_shared<spdlog::sinks::null_sink_mt>());
        spdlog::register_logger(log);
    }
    return log;
}

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;    // prefix, no trailing slash
};

Endpoint split_url(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw Error(ErrorCode::InvalidConfig, "LLM base URL needs a scheme: " + url);
    const auto slash = url.find('/', scheme + 3);
    Endpoint e{url.substr(0, slash), slash == std::string::npos ? "" : url.substr(slash)};
    while (!e.path.empty() && e.path.back() == '/') e.path.pop_back();
    return e;
}

}  // namespace

std::string redact(std::string text, const std::string& secret) {
    if (secret.empty()) return text;
    for (auto pos = text.find(secret); pos != std::string::npos; pos = text.find(secret, pos + 3)) {
        text.replace(pos, secret.size(), "***");
    }
    return text;
}

LlmConfig LlmConfig::from_environment(LlmConfig c) {
    if (const char* v = std::getenv("HRI_LLM_BASE_URL")) c.base_url = v;
    if (const char* v = std::getenv("HRI_LLM_MODEL")) c.model = v;
    if (const char* v = std::getenv("HRI_LLM_API_KEY")) c.api_key = v;
    return c;
}

HttpChatClient::HttpChatClient(LlmConfig config) : config_(std::move(config)) {}

std::string HttpChatClient::attempt(const std::string& body) {
    const Endpoint ep = split_url(config_.base_url);
    httplib::Client cli(ep.origin);
    cli.set_connection_timeout(config_.timeout);
    cli.set_read_timeout(config_.timeout);
    cli.set_write_timeout(config_.timeout);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    auto res = cli.Post(ep.path + "/chat/completions", headers, body, "application/json");
    if (!res) {
        const auto err = res.error();
        if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) {
            throw Error(ErrorCode::Timeout, "LLM request timed out (" + httplib::to_string(err) + ")");
        }
        throw Error(ErrorCode::TransportFailure, "LLM request failed: " + httplib::to_string(err));
    }
    audit_log()->info("response status={} body={}", res->status, redact(res->body, config_.api_key));
    if (res->status != 200) {
        throw Error(ErrorCode::TransportFailure, "LLM endpoint returned HTTP " + std::to_string(res->status));
    }
    std::string content;
    try {
        const auto j = nlohmann::json::parse(res->body);
        const auto& msg = j.at("choices").at(0).at("message").at("content");
        if (msg.is_string()) content = msg.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::TransportFailure, std::string("unreadable LLM response: ") + e.what());
    }
    if (content.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw Error(ErrorCode::EmptyResponse, "LLM returned no content");
    }
    return content;
}

std::string HttpChatClient::complete(const std::string& system, const std::string& user) {
    if (config_.offline) throw Error(ErrorCode::CannotReach, "LLM client is in offline mode");
    if (config_.base_url.empty() || config_.model.empty()) {
        throw Error(ErrorCode::CannotReach, "no LLM endpoint configured (HRI_LLM_BASE_URL, HRI_LLM_MODEL)");
    }
    const nlohmann::json request = {
        {"model", config_.model},
        {"temperature", config_.temperature},
        {"messages", {{{"role", "system"}, {"content", system}}, {{"role", "user"}, {"content", user}}}},
    };
    const std::string body = request.dump();
    audit_log()->info("request url={} body={}", config_.base_url, redact(body, config_.api_key));

    auto wait = config_.backoff;
    for (int tries = 0;; ++tries) {
        try {
            return attempt(body);
        } catch (const Error& e) {
            const bool transient = e.code() == ErrorCode::Timeout || e.code() == ErrorCode::TransportFailure;
            audit_log()->warn("attempt {} failed: {}", tries + 1, redact(e.what(), config_.api_key));
            if (!transient || tries >= config_.retries) throw;
        }
        std::this_thread::sleep_for(wait);
        wait *= 2;
    }
}

std::string plan_llm(const PromptBundle& bundle, ChatClient& client) {
    std::string text = client.complete(bundle.system_text(), bundle.intention_payload);
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw Error(ErrorCode::EmptyResponse, "planner model returned no text");
    }
    return text;
}

ActionSequence plan_with_llm(const PromptBundle& bundle, ChatClient& client, const Scene& scene,
                             const RobotState& robot, const ApiSpec& api, const WorkcellConfig& cell) {
    ActionSequence seq = parse_plan(plan_llm(bundle, client), api);
    seq.provenance = Provenance{Provenance::Source::Llm, client.model_id()};
    validate_sequence(seq, scene, robot, api, cell);
    return seq;
}

}  // namespace deixis
