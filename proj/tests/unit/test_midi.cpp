#include "doctest.h"

#include "smf_reader.hpp"

#include "remi/arp.hpp"
#include "remi/error.hpp"
#include "remi/midi.hpp"

#include <algorithm>
#include <cmath>

using namespace remi;
using remi::testing::parse_smf;
using remi::testing::SmfEvent;

namespace {

std::vector<SmfEvent> channel_events(const remi::testing::SmfFile& f) {
    std::vector<SmfEvent> out;
    for (const auto& e : f.events)
        if (e.status != 0xFF)
            out.push_back(e);
    return out;
}

SmfEvent ev(std::uint64_t tick, std::uint8_t status, int d1, int d2) {
    SmfEvent e;
    e.tick = tick;
    e.status = status;
    e.data1 = d1;
    e.data2 = d2;
    return e;
}

} // namespace

TEST_CASE("empty file layout") {
    const auto bytes = events_to_smf(std::span<const NoteEvent>{}, 4);
    const std::vector<std::uint8_t> expect = {'M', 'T', 'h', 'd', 0, 0, 0, 6,    0, 0, 0, 1, 0x01, 0xE0,
                                              'M', 'T', 'r', 'k', 0, 0, 0, 4, 0x00, 0xFF, 0x2F, 0x00};
    CHECK(bytes == expect);
}

TEST_CASE("single note bytes") {
    const std::vector<NoteEvent> notes = {{0, 0, 60, 100, 0.5}};
    const auto bytes = events_to_smf(notes, 4);
    const std::vector<std::uint8_t> track(bytes.begin() + 22, bytes.end());
    // 0.5 step at 4 steps per beat is 60 ticks.
    const std::vector<std::uint8_t> expect = {0x00, 0x90, 60, 100, 60, 0x80, 60, 0, 0x00, 0xFF, 0x2F, 0x00};
    CHECK(track == expect);
    CHECK(bytes[21] == expect.size());
}

TEST_CASE("arpeggiator output matches the independent reader") {
    const std::vector<int> pitches = {48, 55, 60, 64, 67, 72};
    for (int spb : {1, 3, 4, 7}) {
        for (double gate : {0.05, 0.5, 1.0}) {
            ArpOptions opt{1.0, 3, 96, gate};
            const auto notes = render_arp(arp_network_config(30, 2, 8), Scales{}, opt, pitches, 200);
            const auto file = parse_smf(events_to_smf(notes, spb, 2));
            CHECK(file.format == 0);
            CHECK(file.tracks == 1);
            CHECK(file.division == 480);
            CHECK(file.saw_end_of_track);

            // A note may only spill into the next onset of its pitch through
            // tick rounding; it is then cut at that onset.
            std::vector<SmfEvent> expect;
            for (std::size_t i = 0; i < notes.size(); ++i) {
                const auto& n = notes[i];
                const auto on = static_cast<std::uint64_t>(std::llround(n.t * 480.0 / spb));
                const auto len = std::max<long long>(1, std::llround(n.duration_steps * 480.0 / spb));
                auto off = on + static_cast<std::uint64_t>(len);
                for (std::size_t k = i + 1; k < notes.size(); ++k)
                    if (notes[k].pitch == n.pitch) {
                        off = std::min(off, static_cast<std::uint64_t>(std::llround(notes[k].t * 480.0 / spb)));
                        break;
                    }
                REQUIRE(off > on);
                expect.push_back(ev(on, 0x92, n.pitch, 96));
                expect.push_back(ev(off, 0x82, n.pitch, 0));
            }
            auto got = channel_events(file);
            std::sort(expect.begin(), expect.end());
            std::sort(got.begin(), got.end());
            CHECK(got == expect);
        }
    }
}

TEST_CASE("large step indices use multi-byte delta times") {
    const std::vector<NoteEvent> notes = {{0, 0, 60, 100, 1.0}, {1000, 0, 62, 100, 1.0}};
    const auto file = parse_smf(events_to_smf(notes, 1));
    const auto got = channel_events(file);
    REQUIRE(got.size() == 4);
    CHECK(got[2].tick == 480000);
    CHECK(got[3].tick == 480480);
}

TEST_CASE("same-pitch overlaps are cut at the next onset") {
    const std::vector<NoteEvent> notes = {{0, 0, 60, 100, 3.0}, {1, 0, 60, 90, 1.0}};
    const auto got = channel_events(parse_smf(events_to_smf(notes, 4)));
    const std::vector<SmfEvent> expect = {ev(0, 0x90, 60, 100), ev(120, 0x80, 60, 0), ev(120, 0x90, 60, 90),
                                          ev(240, 0x80, 60, 0)};
    CHECK(got == expect);

    // Identical onsets leave nothing of the first note.
    const std::vector<NoteEvent> twins = {{2, 0, 64, 100, 1.0}, {2, 0, 64, 50, 1.0}};
    const auto t = channel_events(parse_smf(events_to_smf(twins, 4)));
    const std::vector<SmfEvent> only_second = {ev(240, 0x90, 64, 50), ev(360, 0x80, 64, 0)};
    CHECK(t == only_second);
}

TEST_CASE("messages sharing a tick: off, then control, then on") {
    std::vector<TimedEvent> events = {NoteEvent{0, 0, 60, 100, 1.0}, CcEvent{1, 1, 33}, NoteEvent{1, 0, 62, 100, 1.0}};
    const auto msgs = schedule_messages(events, 4);
    REQUIRE(msgs.size() == 5);
    CHECK(msgs[1].kind == MidiKind::note_off);
    CHECK(msgs[2].kind == MidiKind::control_change);
    CHECK(msgs[3].kind == MidiKind::note_on);
    const auto got = channel_events(parse_smf(events_to_smf(events, 4)));
    CHECK(got[2] == ev(120, 0xB0, 1, 33));
}

TEST_CASE("very short notes last at least one tick") {
    const std::vector<NoteEvent> notes = {{5, 0, 70, 100, 1e-6}};
    const auto got = channel_events(parse_smf(events_to_smf(notes, 4)));
    REQUIRE(got.size() == 2);
    CHECK(got[1].tick - got[0].tick == 1);
}

TEST_CASE("cc stream drops repeated values") {
    std::vector<LfoSample> flat;
    for (std::uint64_t t = 0; t < 100; ++t)
        flat.push_back({t, 0.5, 64});
    CHECK(lfo_to_cc_stream(flat, 0, 1).size() == 1);

    std::vector<LfoSample> ramp;
    for (std::uint64_t t = 0; t < 256; ++t) {
        const double v = static_cast<double>(t) / 255.0;
        ramp.push_back({t, v, value_to_cc(v)});
    }
    const auto msgs = lfo_to_cc_stream(ramp, 3, 74);
    CHECK(msgs.size() == 128);
    CHECK(msgs.front().data2 == 0);
    CHECK(msgs.back().data2 == 127);
    CHECK(msgs.back().channel == 3);
    CHECK(msgs.back().data1 == 74);
    CHECK(encode_live(msgs.back()) == std::vector<std::uint8_t>{0xB3, 74, 127});
    CHECK_THROWS_AS(lfo_to_cc_stream(ramp, 16, 1), InvalidArgument);
    CHECK_THROWS_AS(lfo_to_cc_stream(ramp, 0, 128), InvalidArgument);
}

TEST_CASE("live encoding") {
    CHECK(encode_live({MidiKind::note_on, 9, 36, 127, 0}) == std::vector<std::uint8_t>{0x99, 36, 127});
    CHECK(encode_live({MidiKind::note_off, 0, 36, 0, 0}) == std::vector<std::uint8_t>{0x80, 36, 0});
    CHECK_THROWS_AS(encode_live({MidiKind::note_on, 16, 36, 1, 0}), ContractError);
    CHECK_THROWS_AS(encode_live({MidiKind::note_on, 0, 128, 1, 0}), ContractError);
}

TEST_CASE("writer argument checks") {
    const std::vector<NoteEvent> unsorted = {{3, 0, 60, 100, 0.5}, {1, 0, 60, 100, 0.5}};
    CHECK_THROWS_AS(events_to_smf(unsorted, 4), InvalidArgument);
    const std::vector<NoteEvent> ok = {{0, 0, 60, 100, 0.5}};
    CHECK_THROWS_AS(events_to_smf(ok, 0), InvalidArgument);
    CHECK_THROWS_AS(events_to_smf(ok, 4, 16), InvalidArgument);
    const std::vector<NoteEvent> bad_pitch = {{0, 0, 200, 100, 0.5}};
    CHECK_THROWS_AS(events_to_smf(bad_pitch, 4), ContractError);
    const std::vector<NoteEvent> bad_len = {{0, 0, 60, 100, 0.0}};
    CHECK_THROWS_AS(events_to_smf(bad_len, 4), ContractError);
}
