#pragma once

// One live session: an LFO and an arpeggiator sharing seed, size and scales,
// one of them active. The engine is the only thing that mutates session
// state; every control message is applied between two ticks, and each
// applied mutation is logged with the tick it preceded so a session can be
// replayed offline.

#include "remi/arp.hpp"
#include "remi/lfo.hpp"
#include "remi/protocol.hpp"

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <vector>

namespace remi {

struct EngineConfig {
    std::size_t neurons = 100;
    double density = 1.0;
    std::uint64_t seed = 1;
    std::size_t max_keys = 8;
    std::uint64_t rng_seed = 0;
    Scales scales{};
    double beta = 2.0;
    double tick_rate_hz = 200.0;
    double gate = 0.5;
    int velocity = 100;
    protocol::Mode mode = protocol::Mode::lfo;
    protocol::ClockMode clock = protocol::ClockMode::wall;
    PulseInput pulse{};
    std::size_t lfo_batch = 64;
    std::size_t history_length = 128;
    double viz_rate_hz = 5.0;
};

nlohmann::json to_json(const EngineConfig& c);
EngineConfig engine_config_from_json(const nlohmann::json& j);

struct LogEntry {
    std::uint64_t tick; // applied before this engine tick
    protocol::ControlMessage message;
    bool fault_reset = false;
};

struct SessionLog {
    EngineConfig initial;
    std::vector<LogEntry> entries;
    std::uint64_t ticks = 0; // engine ticks run when the log was taken
};

void write_session_log(std::ostream& out, const SessionLog& log);
SessionLog read_session_log(std::istream& in);

class Engine {
  public:
    /// Throws InvalidConfig.
    explicit Engine(const EngineConfig& config);

    /// Applies one parsed message. Frames produced along the way (telemetry
    /// from Step) are appended to `telemetry`. Returns the acknowledgement,
    /// a ParamEcho of the post-application state. Throws ProtocolError with
    /// the session untouched when the message is rejected.
    protocol::ParamEcho apply(const protocol::ControlMessage& message, std::vector<protocol::TelemetryFrame>& telemetry);

    /// Advances the active engine by one step. An engine fault is reported as
    /// an error frame and followed by an automatic state reset.
    void tick(std::vector<protocol::TelemetryFrame>& telemetry);

    /// Emits any buffered LFO samples as a (possibly short) frame.
    void flush(std::vector<protocol::TelemetryFrame>& telemetry);

    protocol::ParamEcho param_echo() const;
    const SessionLog& log() const noexcept { return log_; }
    std::uint64_t ticks() const noexcept { return ticks_; }
    protocol::Mode mode() const noexcept { return mode_; }
    protocol::ClockMode clock() const noexcept { return config_.clock; }
    double tick_rate_hz() const noexcept { return config_.tick_rate_hz; }
    const LfoSession& lfo() const noexcept { return lfo_; }
    const ArpSession& arp() const noexcept { return arp_; }

    /// Number of ticks between viz frames at the current tick rate.
    std::uint64_t viz_interval() const;

  private:
    void apply_unlogged(const protocol::ControlMessage& message, std::vector<protocol::TelemetryFrame>& telemetry);
    void reset_sessions();
    void record_history(const ReservoirState& state, std::optional<std::size_t> label);
    protocol::VizFrame make_viz_frame() const;

    EngineConfig config_;
    protocol::Mode mode_;
    LfoSession lfo_;
    ArpSession arp_;
    std::uint64_t ticks_ = 0;
    std::optional<protocol::LfoFrame> pending_;
    std::deque<Vector> history_;
    std::deque<std::optional<std::size_t>> history_labels_;
    SessionLog log_;
};

/// What a session streamed: every LFO value and every arpeggiator event, in order.
struct ReplayOutput {
    std::vector<double> lfo_values;
    std::vector<NoteEvent> arp_events;
};

/// Re-runs a logged session offline for `log.ticks` ticks, applying each
/// logged message before the tick it was recorded against.
ReplayOutput replay(const SessionLog& log);

/// Collects the streamed values out of a sequence of telemetry frames.
void collect_stream(const protocol::TelemetryFrame& frame, ReplayOutput& out);

} // namespace remi
