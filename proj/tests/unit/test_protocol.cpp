#include "doctest.h"

#include "remi/protocol.hpp"

using namespace remi::protocol;

namespace {

json envelope(json body, int seq = 1) {
    body["schema_version"] = 1;
    body["seq"] = seq;
    return body;
}

std::string error_code(const json& j) {
    try {
        parse_control_message(j);
    } catch (const ProtocolError& e) {
        return e.code();
    }
    return "";
}

} // namespace

TEST_CASE("envelope checks") {
    CHECK(error_code(json::array()) == code::bad_message);
    CHECK(error_code(json{{"type", "reset_state"}, {"seq", 1}}) == code::bad_message);
    CHECK(error_code(json{{"type", "reset_state"}, {"seq", 1}, {"schema_version", 2}}) == code::unsupported_schema);
    CHECK(error_code(json{{"type", "reset_state"}, {"seq", 1}, {"schema_version", "1"}}) == code::unsupported_schema);
    CHECK(error_code(json{{"type", "reset_state"}, {"schema_version", 1}}) == code::bad_message);
    CHECK(error_code(json{{"type", "reset_state"}, {"seq", -1}, {"schema_version", 1}}) == code::bad_message);
    CHECK(error_code(json{{"type", "reset_state"}, {"seq", 1.5}, {"schema_version", 1}}) == code::bad_message);
    CHECK(error_code(envelope({{"type", 3}})) == code::bad_message);
    CHECK(error_code(envelope({{"type", "warp"}})) == code::unknown_type);
    CHECK(error_code(envelope({{"type", "reset_state"}})).empty());
}

TEST_CASE("set_param ranges") {
    auto code_for = [](const char* name, json value) {
        return error_code(envelope({{"type", "set_param"}, {"name", name}, {"value", value}}));
    };
    CHECK(code_for("leak_rate", 0.0).empty());
    CHECK(code_for("leak_rate", 1.0).empty());
    CHECK(code_for("leak_rate", 1.5) == code::out_of_range);
    CHECK(code_for("leak_rate", -0.1) == code::out_of_range);
    CHECK(code_for("beta", 0.0).empty());
    CHECK(code_for("beta", 1e6).empty());
    CHECK(code_for("beta", 2e6) == code::out_of_range);
    CHECK(code_for("tick_rate_hz", 0.0) == code::out_of_range);
    CHECK(code_for("tick_rate_hz", 10000.0).empty());
    CHECK(code_for("tick_rate_hz", 10001.0) == code::out_of_range);
    CHECK(code_for("gate", 0.0) == code::out_of_range);
    CHECK(code_for("gate", 1.0).empty());
    CHECK(code_for("spectral_radius", 7.0).empty());
    CHECK(code_for("spectral_radius", -1.0) == code::out_of_range);
    CHECK(code_for("input_scale", -0.5) == code::out_of_range);
    CHECK(code_for("bias_scale", "big") == code::bad_message);
    CHECK(code_for("warmth", 1.0) == code::unknown_param);

    const auto m = parse_control_message(envelope({{"type", "set_param"}, {"name", "beta"}, {"value", 3}}));
    REQUIRE(std::holds_alternative<SetParam>(m));
    CHECK(std::get<SetParam>(m).name == Param::beta);
    CHECK(std::get<SetParam>(m).value == 3.0);
}

TEST_CASE("payload checks") {
    CHECK(error_code(envelope({{"type", "set_held_notes"}, {"pitches", {60, 64}}})).empty());
    CHECK(error_code(envelope({{"type", "set_held_notes"}, {"pitches", json::array()}})).empty());
    CHECK(error_code(envelope({{"type", "set_held_notes"}, {"pitches", {60, 128}}})) == code::out_of_range);
    CHECK(error_code(envelope({{"type", "set_held_notes"}, {"pitches", {60.5}}})) == code::bad_message);
    CHECK(error_code(envelope({{"type", "set_held_notes"}, {"pitches", 60}})) == code::bad_message);
    CHECK(error_code(envelope({{"type", "reseed"}, {"seed", 4}, {"neurons", 0}})) == code::invalid_config);
    CHECK(error_code(envelope({{"type", "reseed"}, {"seed", 4}, {"neurons", 2049}})) == code::out_of_range);
    CHECK(error_code(envelope({{"type", "reseed"}, {"seed", 4}, {"neurons", 2048}})).empty());
    CHECK(error_code(envelope({{"type", "reseed"}, {"seed", -4}, {"neurons", 20}})) == code::bad_message);
    CHECK(error_code(envelope({{"type", "set_mode"}, {"mode", "drone"}})) == code::out_of_range);
    CHECK(error_code(envelope({{"type", "subscribe"}, {"kinds", {"lfo_frame", "gossip"}}})) == code::bad_message);
    CHECK(error_code(envelope({{"type", "subscribe"}, {"kinds", json::array()}})).empty());
    CHECK(error_code(envelope({{"type", "step"}, {"count", 0}})) == code::out_of_range);
    CHECK(error_code(envelope({{"type", "step"}, {"count", 1000001}})) == code::out_of_range);
    CHECK(std::get<Step>(parse_control_message(envelope({{"type", "step"}}))).count == 1);
}

TEST_CASE("messages survive serialization") {
    const std::vector<ControlMessage> all = {
        SetParam{Param::spectral_radius, 1.25}, SetHeldNotes{{60, 67}}, ResetState{},
        Reseed{77, 32},                         SetMode{Mode::arp},     Subscribe{{"arp_event", "viz_frame"}},
        SnapshotRequest{},                      Step{12}};
    for (const auto& m : all) {
        const auto back = parse_control_message(envelope(to_json(m)));
        CHECK(back.index() == m.index());
        CHECK(to_json(back) == to_json(m));
    }
    CHECK(is_mutating(SetParam{Param::beta, 1.0}));
    CHECK(is_mutating(Step{}));
    CHECK_FALSE(is_mutating(Subscribe{}));
    CHECK_FALSE(is_mutating(SnapshotRequest{}));
}

TEST_CASE("outbound frames") {
    const json lfo = to_json(TelemetryFrame{LfoFrame{10, {0.25, 0.5}}});
    CHECK(lfo == json{{"type", "lfo_frame"}, {"schema_version", 1}, {"t0", 10}, {"values", {0.25, 0.5}}});

    const json arp = to_json(TelemetryFrame{ArpEventFrame{{3, 1, 64, 100, 0.5}}});
    CHECK(arp["type"] == "arp_event");
    CHECK(arp["pitch"] == 64);
    CHECK(arp["duration_steps"] == 0.5);

    ParamEcho echo;
    echo.held_notes = {60};
    const json e = to_json(TelemetryFrame{echo});
    CHECK(e["type"] == "param_echo");
    CHECK(e["params"].size() == 8);
    CHECK(e["params"]["spectral_radius"] == 0.95);
    CHECK(e["mode"] == "lfo");
    CHECK(e["clock"] == "wall");
    CHECK(e["held_notes"] == json{60});

    const json err = to_json(TelemetryFrame{ErrorFrame{code::capacity, "too many"}});
    CHECK(err == json{{"type", "error"}, {"schema_version", 1}, {"code", "capacity"}, {"detail", "too many"}});

    CHECK(std::string(kind_of(TelemetryFrame{VizFrame{}})) == "viz_frame");
}
