#pragma once

#include "remi/engine.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace remi {

using ClientId = std::uint64_t;

/// A serialized frame addressed to one client.
struct Delivery {
    ClientId client;
    std::string text;
};

/// Client bookkeeping around an Engine: subscriptions, per-client sequence
/// numbers, the single controller role, and JSON framing. Single-threaded;
/// ServiceLoop owns one and is the only caller.
class Service {
  public:
    explicit Service(const EngineConfig& config);

    void connect(ClientId id);
    /// Releases the controller role if this client held it. The session itself persists.
    void disconnect(ClientId id);

    /// Handles one inbound text frame. Returns the ack or error for the
    /// sender, preceded by any telemetry it caused and followed by
    /// param_echo broadcasts to other subscribers.
    std::vector<Delivery> on_text(ClientId id, std::string_view text);
    std::vector<Delivery> on_tick();
    std::vector<Delivery> on_flush();

    Engine& engine() noexcept { return engine_; }
    const Engine& engine() const noexcept { return engine_; }
    std::optional<ClientId> controller() const noexcept { return controller_; }

  private:
    struct Client {
        std::set<std::string> kinds = protocol::telemetry_kinds;
        std::uint64_t seq = 0;
    };

    std::string frame_text(ClientId id, const protocol::TelemetryFrame& frame,
                           std::optional<nlohmann::json> reply_to = std::nullopt);
    void fan_out(const std::vector<protocol::TelemetryFrame>& frames, std::vector<Delivery>& out);
    void error_to(ClientId id, const std::string& code, const std::string& detail,
                  std::optional<nlohmann::json> reply_to, std::vector<Delivery>& out);

    Engine engine_;
    std::map<ClientId, Client> clients_;
    std::optional<ClientId> controller_;
};

/// Runs a Service on its own thread. On a wall clock it ticks at the
/// engine's tick rate and flushes LFO batches at least every 50 ms; on a
/// manual clock it only advances on step messages. Inbound events are queued
/// and drained at tick boundaries, so no message is ever applied mid-tick.
class ServiceLoop {
  public:
    /// Called on the loop thread for every outbound frame.
    using Sink = std::function<void(const Delivery&)>;

    ServiceLoop(const EngineConfig& config, Sink sink);
    ~ServiceLoop();
    ServiceLoop(const ServiceLoop&) = delete;
    ServiceLoop& operator=(const ServiceLoop&) = delete;

    void start();
    void stop();

    ClientId connect();
    void disconnect(ClientId id);
    void post(ClientId id, std::string text);

    /// Copy of the session log, taken between ticks.
    SessionLog session_log();

  private:
    struct Event {
        enum class Kind { connect, disconnect, text, log_request } kind;
        ClientId client = 0;
        std::string text;
        std::shared_ptr<std::promise<SessionLog>> reply;
    };

    void run();
    void push(Event e);
    void deliver(const std::vector<Delivery>& out);

    Service service_;
    Sink sink_;
    std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<Event> inbox_;
    bool stopping_ = false;
    bool running_ = false;
    bool accepting_ = false;
    std::thread thread_;
    std::atomic<ClientId> next_id_{1};
};

} // namespace remi
