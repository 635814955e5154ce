#pragma once

#include "remi/service.hpp"

#include <cstdint>
#include <memory>
#include <string>

namespace remi {

struct ServerOptions {
    std::string address = "127.0.0.1";
    std::uint16_t port = 7421; // 0 picks a free port
    bool handle_signals = false; // SIGINT/SIGTERM release wait()
};

/// WebSocket front end for a ServiceLoop: text frames, one JSON object each.
/// Network I/O runs on its own thread and talks to the engine loop only
/// through the loop's queue.
class WebSocketServer {
  public:
    WebSocketServer(const EngineConfig& config, const ServerOptions& options);
    ~WebSocketServer();
    WebSocketServer(const WebSocketServer&) = delete;
    WebSocketServer& operator=(const WebSocketServer&) = delete;

    /// Binds, then starts the engine loop and the I/O thread. Throws std::system_error on bind failure.
    void start();
    void stop();
    /// Blocks until stop() is called from another thread or a signal handler.
    void wait();

    std::uint16_t port() const;
    SessionLog session_log();

    struct Impl; // opaque, defined with the transport

  private:
    std::unique_ptr<Impl> impl_;
};

} // namespace remi
