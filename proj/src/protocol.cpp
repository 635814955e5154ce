#include "remi/protocol.hpp"

#include <cmath>

namespace remi::protocol {

namespace {

template <class... Ts> struct overloaded : Ts... {
    using Ts::operator()...;
};

[[noreturn]] void fail(const char* code, const std::string& detail) { throw ProtocolError(code, detail); }

const json& field(const json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end())
        fail(code::bad_message, std::string("missing field '") + name + "'");
    return *it;
}

std::uint64_t unsigned_field(const json& j, const char* name) {
    const json& v = field(j, name);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        fail(code::bad_message, std::string("field '") + name + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
}

} // namespace

const char* to_string(Mode m) { return m == Mode::lfo ? "lfo" : "arp"; }
const char* to_string(ClockMode c) { return c == ClockMode::wall ? "wall" : "manual"; }

const char* to_string(Param p) {
    switch (p) {
    case Param::input_scale: return "input_scale";
    case Param::spectral_radius: return "spectral_radius";
    case Param::feedback_scale: return "feedback_scale";
    case Param::bias_scale: return "bias_scale";
    case Param::leak_rate: return "leak_rate";
    case Param::beta: return "beta";
    case Param::tick_rate_hz: return "tick_rate_hz";
    case Param::gate: return "gate";
    }
    return "?";
}

Param param_from_string(const std::string& name) {
    for (Param p : {Param::input_scale, Param::spectral_radius, Param::feedback_scale, Param::bias_scale,
                    Param::leak_rate, Param::beta, Param::tick_rate_hz, Param::gate})
        if (name == to_string(p))
            return p;
    fail(code::unknown_param, "unknown parameter '" + name + "'");
}

void check_param_range(Param p, double v) {
    bool ok = std::isfinite(v);
    switch (p) {
    case Param::leak_rate: ok = ok && v >= 0.0 && v <= 1.0; break;
    case Param::beta: ok = ok && v >= 0.0 && v <= max_beta; break;
    case Param::tick_rate_hz: ok = ok && v > 0.0 && v <= max_tick_rate_hz; break;
    case Param::gate: ok = ok && v > 0.0 && v <= 1.0; break;
    default: ok = ok && v >= 0.0; break;
    }
    if (!ok)
        fail(code::out_of_range, std::string("value out of range for ") + to_string(p));
}

bool is_mutating(const ControlMessage& m) {
    return !std::holds_alternative<Subscribe>(m) && !std::holds_alternative<SnapshotRequest>(m);
}

ControlMessage parse_control_message(const json& j) {
    if (!j.is_object())
        fail(code::bad_message, "frame is not a JSON object");
    const json& version = field(j, "schema_version");
    if (!version.is_number_integer() || version.get<std::int64_t>() != schema_version)
        fail(code::unsupported_schema, "schema_version must be " + std::to_string(schema_version));
    unsigned_field(j, "seq");
    const json& type_field = field(j, "type");
    if (!type_field.is_string())
        fail(code::bad_message, "type must be a string");
    const auto type = type_field.get<std::string>();

    if (type == "set_param") {
        const json& name = field(j, "name");
        const json& value = field(j, "value");
        if (!name.is_string())
            fail(code::bad_message, "name must be a string");
        if (!value.is_number())
            fail(code::bad_message, "value must be a number");
        const Param p = param_from_string(name.get<std::string>());
        const double v = value.get<double>();
        check_param_range(p, v);
        return SetParam{p, v};
    }
    if (type == "set_held_notes") {
        const json& pitches = field(j, "pitches");
        if (!pitches.is_array())
            fail(code::bad_message, "pitches must be an array");
        SetHeldNotes msg;
        for (const auto& p : pitches) {
            if (!p.is_number_integer())
                fail(code::bad_message, "pitches must be integers");
            const auto v = p.get<std::int64_t>();
            if (v < 0 || v > 127)
                fail(code::out_of_range, "pitch outside [0, 127]");
            msg.pitches.push_back(static_cast<int>(v));
        }
        return msg;
    }
    if (type == "reset_state")
        return ResetState{};
    if (type == "reseed") {
        const auto seed = unsigned_field(j, "seed");
        const auto neurons = unsigned_field(j, "neurons");
        if (neurons == 0)
            fail(code::invalid_config, "neurons must be >= 1");
        if (neurons > max_neurons)
            fail(code::out_of_range, "neurons must be <= " + std::to_string(max_neurons));
        return Reseed{seed, static_cast<std::size_t>(neurons)};
    }
    if (type == "set_mode") {
        const json& mode = field(j, "mode");
        if (mode == "lfo")
            return SetMode{Mode::lfo};
        if (mode == "arp")
            return SetMode{Mode::arp};
        fail(code::out_of_range, "mode must be 'lfo' or 'arp'");
    }
    if (type == "subscribe") {
        const json& kinds = field(j, "kinds");
        if (!kinds.is_array())
            fail(code::bad_message, "kinds must be an array");
        Subscribe msg;
        for (const auto& k : kinds) {
            if (!k.is_string() || !telemetry_kinds.contains(k.get<std::string>()))
                fail(code::bad_message, "unknown telemetry kind");
            msg.kinds.insert(k.get<std::string>());
        }
        return msg;
    }
    if (type == "snapshot_request")
        return SnapshotRequest{};
    if (type == "step") {
        std::uint64_t count = 1;
        if (j.contains("count"))
            count = unsigned_field(j, "count");
        if (count == 0 || count > max_step_count)
            fail(code::out_of_range, "count must be in [1, " + std::to_string(max_step_count) + "]");
        return Step{count};
    }
    fail(code::unknown_type, "unknown message type '" + type + "'");
}

json to_json(const ControlMessage& m) {
    return std::visit(
        overloaded{
            [](const SetParam& s) { return json{{"type", "set_param"}, {"name", to_string(s.name)}, {"value", s.value}}; },
            [](const SetHeldNotes& s) { return json{{"type", "set_held_notes"}, {"pitches", s.pitches}}; },
            [](const ResetState&) { return json{{"type", "reset_state"}}; },
            [](const Reseed& s) { return json{{"type", "reseed"}, {"seed", s.seed}, {"neurons", s.neurons}}; },
            [](const SetMode& s) { return json{{"type", "set_mode"}, {"mode", to_string(s.mode)}}; },
            [](const Subscribe& s) { return json{{"type", "subscribe"}, {"kinds", s.kinds}}; },
            [](const SnapshotRequest&) { return json{{"type", "snapshot_request"}}; },
            [](const Step& s) { return json{{"type", "step"}, {"count", s.count}}; },
        },
        m);
}

const char* kind_of(const TelemetryFrame& f) {
    return std::visit(overloaded{
                          [](const LfoFrame&) { return "lfo_frame"; },
                          [](const ArpEventFrame&) { return "arp_event"; },
                          [](const VizFrame&) { return "viz_frame"; },
                          [](const ParamEcho&) { return "param_echo"; },
                          [](const ErrorFrame&) { return "error"; },
                      },
                      f);
}

json to_json(const TelemetryFrame& f) {
    json j = std::visit(
        overloaded{
            [](const LfoFrame& fr) { return json{{"t0", fr.t0}, {"values", fr.values}}; },
            [](const ArpEventFrame& fr) {
                return json{{"t", fr.event.t},
                            {"index", fr.event.index},
                            {"pitch", fr.event.pitch},
                            {"velocity", fr.event.velocity},
                            {"duration_steps", fr.event.duration_steps}};
            },
            [](const VizFrame& fr) {
                json v{{"t", fr.t}, {"activity", activity_to_json(fr.activity)}, {"graph", to_json(fr.graph)}};
                v["pca"] = fr.pca ? to_json(*fr.pca, fr.labels) : json(nullptr);
                return v;
            },
            [](const ParamEcho& e) {
                json params{{"input_scale", e.scales.input_scale},
                            {"spectral_radius", e.scales.spectral_radius},
                            {"feedback_scale", e.scales.feedback_scale},
                            {"bias_scale", e.scales.bias_scale},
                            {"leak_rate", e.scales.leak_rate},
                            {"beta", e.beta},
                            {"tick_rate_hz", e.tick_rate_hz},
                            {"gate", e.gate}};
                return json{{"mode", to_string(e.mode)},
                            {"clock", to_string(e.clock)},
                            {"params", std::move(params)},
                            {"seed", e.seed},
                            {"neurons", e.neurons},
                            {"density", e.density},
                            {"max_keys", e.max_keys},
                            {"rng_seed", e.rng_seed},
                            {"held_notes", e.held_notes},
                            {"tick", e.tick},
                            {"controller", e.controller}};
            },
            [](const ErrorFrame& e) { return json{{"code", e.code}, {"detail", e.detail}}; },
        },
        f);
    j["type"] = kind_of(f);
    j["schema_version"] = schema_version;
    return j;
}

} // namespace remi::protocol
