#pragma once

// Wire protocol of the live control service. Every frame in either direction
// is one JSON object carrying {type, schema_version, seq}. docs/protocol.md
// and docs/protocol.schema.json describe the same shapes for clients.

#include "remi/arp.hpp"
#include "remi/reservoir.hpp"
#include "remi/viz.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace remi::protocol {

using nlohmann::json;

inline constexpr int schema_version = 1;

/// Stable error codes carried by error frames.
namespace code {
inline constexpr const char* bad_message = "bad_message";
inline constexpr const char* unsupported_schema = "unsupported_schema";
inline constexpr const char* unknown_type = "unknown_type";
inline constexpr const char* unknown_param = "unknown_param";
inline constexpr const char* out_of_range = "out_of_range";
inline constexpr const char* invalid_config = "invalid_config";
inline constexpr const char* capacity = "capacity";
inline constexpr const char* not_controller = "not_controller";
inline constexpr const char* invalid_state = "invalid_state";
inline constexpr const char* engine_fault = "engine_fault";
} // namespace code

class ProtocolError : public std::runtime_error {
  public:
    ProtocolError(std::string code, const std::string& detail) : std::runtime_error(detail), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

  private:
    std::string code_;
};

enum class Mode { lfo, arp };
enum class ClockMode { wall, manual };

const char* to_string(Mode m);
const char* to_string(ClockMode c);

enum class Param { input_scale, spectral_radius, feedback_scale, bias_scale, leak_rate, beta, tick_rate_hz, gate };

const char* to_string(Param p);
/// Throws ProtocolError(unknown_param).
Param param_from_string(const std::string& name);
/// Throws ProtocolError(out_of_range) when `value` is outside the parameter's range.
void check_param_range(Param p, double value);

inline constexpr double max_tick_rate_hz = 10000.0;
inline constexpr std::size_t max_neurons = 2048;
inline constexpr std::uint64_t max_step_count = 1000000;

struct SetParam {
    Param name;
    double value;
};
struct SetHeldNotes {
    std::vector<int> pitches;
};
struct ResetState {};
struct Reseed {
    std::uint64_t seed;
    std::size_t neurons;
};
struct SetMode {
    Mode mode;
};
struct Subscribe {
    std::set<std::string> kinds;
};
struct SnapshotRequest {};
/// Advance the engine by `count` ticks; only valid on a manual clock.
struct Step {
    std::uint64_t count = 1;
};

using ControlMessage =
    std::variant<SetParam, SetHeldNotes, ResetState, Reseed, SetMode, Subscribe, SnapshotRequest, Step>;

/// True for messages that change session state (and so need the controller role).
bool is_mutating(const ControlMessage& m);

/// Validates the envelope and the payload (ranges included).
/// Throws ProtocolError with the matching code.
ControlMessage parse_control_message(const json& j);
/// Payload plus type; seq and schema_version are added by the sender.
json to_json(const ControlMessage& m);

/// Kinds a client can subscribe to. Acks and errors addressed to a client are always delivered.
inline const std::set<std::string> telemetry_kinds = {"lfo_frame", "arp_event", "viz_frame", "param_echo"};

struct LfoFrame {
    std::uint64_t t0 = 0;
    std::vector<double> values;
};

struct ArpEventFrame {
    NoteEvent event;
};

struct VizFrame {
    std::uint64_t t = 0;
    std::optional<PcaResult> pca;
    std::vector<std::optional<std::size_t>> labels;
    Vector activity;
    ConnectivityGraph graph;
};

struct ParamEcho {
    Mode mode = Mode::lfo;
    ClockMode clock = ClockMode::wall;
    Scales scales;
    double beta = 2.0;
    double tick_rate_hz = 200.0;
    double gate = 0.5;
    std::uint64_t seed = 1;
    std::size_t neurons = 100;
    double density = 1.0;
    std::size_t max_keys = 8;
    std::uint64_t rng_seed = 0;
    std::vector<int> held_notes;
    std::uint64_t tick = 0;
    bool controller = false;
};

struct ErrorFrame {
    std::string code;
    std::string detail;
};

using TelemetryFrame = std::variant<LfoFrame, ArpEventFrame, VizFrame, ParamEcho, ErrorFrame>;

const char* kind_of(const TelemetryFrame& f);
/// Body of the frame with type and schema_version; seq is added per recipient.
json to_json(const TelemetryFrame& f);

} // namespace remi::protocol
