#include "doctest.h"

#include "remi/engine.hpp"
#include "remi/error.hpp"

#include <sstream>

using namespace remi;
using namespace remi::protocol;

namespace {

EngineConfig small_config(ClockMode clock = ClockMode::manual) {
    EngineConfig c;
    c.neurons = 24;
    c.seed = 5;
    c.clock = clock;
    return c;
}

template <class T> std::vector<T> frames_of(const std::vector<TelemetryFrame>& frames) {
    std::vector<T> out;
    for (const auto& f : frames)
        if (const auto* p = std::get_if<T>(&f))
            out.push_back(*p);
    return out;
}

std::string rejection(Engine& e, const ControlMessage& m) {
    std::vector<TelemetryFrame> t;
    try {
        e.apply(m, t);
    } catch (const ProtocolError& err) {
        return err.code();
    }
    return "";
}

} // namespace

TEST_CASE("set_param is echoed") {
    Engine e(small_config());
    std::vector<TelemetryFrame> t;
    auto echo = e.apply(SetParam{Param::spectral_radius, 1.1}, t);
    CHECK(echo.scales.spectral_radius == 1.1);
    CHECK(e.lfo().network().scales().spectral_radius == 1.1);
    CHECK(e.arp().network().scales().spectral_radius == 1.1);
    echo = e.apply(SetParam{Param::beta, 7.0}, t);
    CHECK(echo.beta == 7.0);
    echo = e.apply(SetParam{Param::gate, 0.25}, t);
    CHECK(echo.gate == 0.25);
    echo = e.apply(SetParam{Param::tick_rate_hz, 400.0}, t);
    CHECK(echo.tick_rate_hz == 400.0);
    CHECK(e.viz_interval() == 80);
    echo = e.apply(SetParam{Param::leak_rate, 0.0}, t);
    CHECK(echo.scales.leak_rate == 0.0);
    CHECK(t.empty());
    CHECK(e.log().entries.size() == 5);
}

TEST_CASE("rejected messages leave the session untouched") {
    Engine e(small_config());
    std::vector<TelemetryFrame> t;
    e.apply(Step{10}, t);
    const auto before = e.param_echo();
    const auto entries = e.log().entries.size();

    CHECK(rejection(e, SetParam{Param::leak_rate, 2.0}) == code::out_of_range);
    CHECK(rejection(e, SetHeldNotes{{60, 61, 62, 63, 64, 65, 66, 67, 68}}) == code::capacity);
    CHECK(rejection(e, SetHeldNotes{{-1}}) == code::out_of_range);
    CHECK(rejection(e, Reseed{1, 0}) == code::invalid_config);
    CHECK(rejection(e, Reseed{1, 5000}) == code::out_of_range);

    const auto after = e.param_echo();
    CHECK(after.scales == before.scales);
    CHECK(after.held_notes == before.held_notes);
    CHECK(after.neurons == before.neurons);
    CHECK(e.log().entries.size() == entries);
}

TEST_CASE("manual clock: four steps give four notes") {
    EngineConfig c = small_config();
    c.mode = Mode::arp;
    Engine e(c);
    std::vector<TelemetryFrame> t;
    e.apply(SetHeldNotes{{60, 64, 67}}, t);
    e.apply(Step{4}, t);
    const auto notes = frames_of<ArpEventFrame>(t);
    REQUIRE(notes.size() == 4);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(notes[i].event.t == i);
    CHECK(e.ticks() == 4);
}

TEST_CASE("step needs a manual clock") {
    Engine e(small_config(ClockMode::wall));
    CHECK(rejection(e, Step{1}) == code::invalid_state);
}

TEST_CASE("one second at 200 Hz") {
    Engine e(small_config(ClockMode::wall));
    std::vector<TelemetryFrame> t;
    for (int i = 0; i < 200; ++i)
        e.tick(t);
    e.flush(t);
    const auto lfo = frames_of<LfoFrame>(t);
    REQUIRE(lfo.size() == 4);
    CHECK(lfo[0].values.size() == 64);
    CHECK(lfo[3].values.size() == 8);
    std::uint64_t expect_t0 = 0;
    for (const auto& f : lfo) {
        CHECK(f.t0 == expect_t0);
        expect_t0 += f.values.size();
    }
    CHECK(expect_t0 == 200);

    const auto viz = frames_of<VizFrame>(t);
    CHECK(viz.size() == 5);
    REQUIRE(viz[0].pca);
    CHECK(viz[0].pca->projected.rows() == 40);
    CHECK(viz.back().pca->projected.rows() == 128);
    CHECK(viz[0].activity.size() == 24);
    CHECK(!viz[0].graph.edges.empty());
}

TEST_CASE("reset returns to the initial trajectory") {
    Engine e(small_config());
    std::vector<TelemetryFrame> a, b;
    e.apply(Step{100}, a);
    e.apply(ResetState{}, b);
    e.apply(Step{100}, b);
    ReplayOutput ra, rb;
    for (const auto& f : a)
        collect_stream(f, ra);
    for (const auto& f : b)
        collect_stream(f, rb);
    CHECK(ra.lfo_values == rb.lfo_values);
    CHECK(ra.lfo_values.size() == 100);
}

TEST_CASE("reseed and mode switches") {
    Engine e(small_config());
    std::vector<TelemetryFrame> t;
    auto echo = e.apply(Reseed{9, 40}, t);
    CHECK(echo.seed == 9);
    CHECK(echo.neurons == 40);
    CHECK(e.lfo().network().neurons() == 40);
    CHECK(e.arp().network().config().output_dim == 8);

    e.apply(SetMode{Mode::arp}, t);
    e.apply(Step{5}, t);
    CHECK(frames_of<LfoFrame>(t).empty());
    CHECK(frames_of<ArpEventFrame>(t).empty()); // nothing held
    e.apply(SetHeldNotes{{50}}, t);
    e.apply(Step{5}, t);
    CHECK(frames_of<ArpEventFrame>(t).size() == 5);
    e.apply(SetMode{Mode::lfo}, t);
    e.apply(Step{5}, t);
    CHECK(frames_of<LfoFrame>(t).size() == 1);
}

TEST_CASE("offline replay reproduces a scripted session") {
    Engine e(small_config());
    std::vector<TelemetryFrame> t;
    e.apply(Step{30}, t);
    e.apply(SetParam{Param::spectral_radius, 1.2}, t);
    e.apply(Step{17}, t);
    e.apply(SetMode{Mode::arp}, t);
    e.apply(SetHeldNotes{{60, 62, 65, 69}}, t);
    e.apply(Step{40}, t);
    e.apply(SetParam{Param::beta, 0.3}, t);
    e.apply(Reseed{3, 16}, t);
    e.apply(Step{25}, t);
    e.apply(SetMode{Mode::lfo}, t);
    e.apply(ResetState{}, t);
    e.apply(Step{70}, t);
    e.apply(SnapshotRequest{}, t);

    ReplayOutput live;
    for (const auto& f : t)
        collect_stream(f, live);
    CHECK(live.lfo_values.size() == 117);
    CHECK(live.arp_events.size() == 65);

    const ReplayOutput offline = replay(e.log());
    CHECK(offline.lfo_values == live.lfo_values);
    CHECK(offline.arp_events == live.arp_events);

    std::stringstream io;
    write_session_log(io, e.log());
    const SessionLog back = read_session_log(io);
    CHECK(back.ticks == e.log().ticks);
    CHECK(back.entries.size() == e.log().entries.size());
    const ReplayOutput from_file = replay(back);
    CHECK(from_file.lfo_values == live.lfo_values);
    CHECK(from_file.arp_events == live.arp_events);
}

TEST_CASE("engine configuration") {
    EngineConfig c = small_config();
    c.scales.bias_scale = 0.7;
    c.pulse = PulseInput{true, 12, 0.4};
    c.mode = Mode::arp;
    const EngineConfig back = engine_config_from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));

    EngineConfig bad = c;
    bad.neurons = 0;
    CHECK_THROWS_AS(Engine{bad}, InvalidConfig);
    bad = c;
    bad.tick_rate_hz = 20000.0;
    CHECK_THROWS_AS(Engine{bad}, InvalidConfig);
    bad = c;
    bad.scales.leak_rate = -1;
    CHECK_THROWS_AS(Engine{bad}, InvalidConfig);

    std::stringstream empty;
    CHECK_THROWS_AS(read_session_log(empty), InvalidArgument);
}
