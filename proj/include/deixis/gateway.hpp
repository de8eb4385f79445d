#pragma once

#include "deixis/config.hpp"
#include "deixis/fusion.hpp"
#include "deixis/harness.hpp"
#include "deixis/llm_client.hpp"
#include "deixis/workcell.hpp"

#include <json.hpp>

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace deixis {

inline constexpr int kProtocolVersion = 1;

/// One wire message. Inbound kinds: word, ray, touch, scene_request.
/// Outbound kinds: state_update, selection_feedback, intention_emitted, plan,
/// verdict, trajectory_frame, error. Outbound messages carry the timestamp
/// and seq of the inbound message they answer (`reply_to`).
struct Envelope {
    std::string kind;
    std::string session_id;
    double timestamp = 0.0;
    std::uint64_t seq = 0;
    std::optional<std::uint64_t> reply_to;
    nlohmann::json payload = nlohmann::json::object();

    bool operator==(const Envelope&) const = default;
};

void to_json(nlohmann::json& j, const Envelope& e);

/// Throws MalformedMessage unless `text` is a v1 envelope of a known kind.
Envelope parse_envelope(const std::string& text);

bool is_inbound(const std::string& kind);

/// Live pipeline state for one operator. Not synchronised; SessionManager
/// serialises calls per session.
class Session {
public:
    Session(std::string id, const Config& config, WorkcellState initial, ChatClient* llm = nullptr);

    /// Outbound messages for one inbound word, ray or touch, in pipeline
    /// order. Payload and pipeline errors come back as `error` messages; the
    /// session stays usable.
    std::vector<Envelope> handle(const Envelope& in);

    /// state_update describing the scene, robot and protocol phase.
    Envelope snapshot(const Envelope& in);

    const std::string& id() const { return id_; }
    const WorkcellState& state() const { return state_; }
    const FusionEngine& fusion() const { return fusion_; }

private:
    Envelope reply(const Envelope& in, std::string kind, nlohmann::json payload);
    Envelope error_reply(const Envelope& in, const Error& e, const std::string& stage);
    void on_word(const Envelope& in, std::vector<Envelope>& out);
    void on_pointing(const Envelope& in, const DeicticRay& ray, std::vector<Envelope>& out);
    void run_pipeline(const Envelope& in, const Intention& intent, std::vector<Envelope>& out);
    nlohmann::json fusion_json() const;

    std::string id_;
    Config config_;
    ChatClient* llm_;
    FusionEngine fusion_;
    CommandStream words_;
    WorkcellState state_;
    std::optional<double> last_hover_t_;
    std::uint64_t seq_ = 0;
};

/// Owns the sessions of a gateway. Thread safe; calls for one session are
/// serialised, different sessions proceed independently.
class SessionManager {
public:
    explicit SessionManager(Config config, ChatClient* llm = nullptr);

    /// Throws UnknownScenePreset.
    std::string open_session(const std::string& preset);

    /// Seeds the scene from the first detection frame of an episode and the
    /// robot from its initial position and held object.
    std::string open_session(const Episode& seed);

    void close_session(const std::string& id);
    bool is_open(const std::string& id) const;
    std::size_t size() const;

    /// Routes one text frame. A scene_request without session_id opens a
    /// session (payload preset or episode); with one it returns the current
    /// state, or closes the session when payload.close is true. When `owned`
    /// is given, only sessions in it may be addressed and opened ids are added.
    std::vector<Envelope> handle_text(const std::string& text, std::set<std::string>* owned = nullptr);

private:
    struct Slot {
        std::mutex mutex;
        std::unique_ptr<Session> session;
    };

    std::string add(WorkcellState initial);
    std::shared_ptr<Slot> slot(const std::string& id) const;
    std::vector<Envelope> scene_request(const Envelope& in, std::set<std::string>* owned);

    Config config_;
    ChatClient* llm_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Slot>> sessions_;
    std::uint64_t next_id_ = 1;
};

/// Per-connection send queue. Past capacity the oldest trajectory_frame is
/// dropped; other kinds are never dropped, so the queue can exceed capacity
/// when it holds no frames.
class OutboundQueue {
public:
    explicit OutboundQueue(std::size_t capacity) : capacity_(capacity) {}

    void push(const Envelope& e);
    std::optional<std::string> pop();

    std::size_t size() const { return items_.size(); }
    std::size_t dropped() const { return dropped_; }

private:
    struct Item {
        std::string text;
        bool droppable = false;
    };

    std::size_t capacity_;
    std::deque<Item> items_;
    std::size_t dropped_ = 0;
};

/// Inbound messages reproducing an episode's pointing, touch and word
/// streams in replay order. Skeleton frames become ray messages carrying
/// elbow and wrist.
std::vector<Envelope> episode_messages(const Episode& episode, const std::string& session_id);

/// Websocket server speaking the envelope protocol, one text frame per
/// message.
class GatewayServer {
public:
    explicit GatewayServer(Config config, ChatClient* llm = nullptr);
    ~GatewayServer();

    GatewayServer(const GatewayServer&) = delete;
    GatewayServer& operator=(const GatewayServer&) = delete;

    /// Binds and starts serving on a background thread; returns the port.
    unsigned short start();

    /// Binds and serves on the calling thread until stop().
    void run();
    void stop();

    SessionManager& sessions();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Runs the gateway on config.gateway.host:port until interrupted.
int serve(const Config& config);

}  // namespace deixis
