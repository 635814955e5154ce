#include "remi/midi.hpp"

#include "remi/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace remi {

namespace {

bool in_data_range(int v) { return v >= 0 && v <= 127; }

std::uint64_t step_to_tick(std::uint64_t t, int steps_per_beat) {
    const auto spb = static_cast<std::uint64_t>(steps_per_beat);
    return (2 * t * smf_ticks_per_quarter + spb) / (2 * spb);
}

std::uint64_t event_step(const TimedEvent& e) {
    return std::visit([](const auto& ev) { return ev.t; }, e);
}

// Order of messages sharing a tick: offs first so a clamped note ends before
// its successor starts.
int kind_rank(MidiKind k) {
    switch (k) {
    case MidiKind::note_off: return 0;
    case MidiKind::control_change: return 1;
    case MidiKind::note_on: return 2;
    }
    return 3;
}

void put_vlq(std::vector<std::uint8_t>& out, std::uint64_t value) {
    std::uint8_t buf[10];
    int n = 0;
    buf[n++] = static_cast<std::uint8_t>(value & 0x7F);
    while ((value >>= 7) != 0)
        buf[n++] = static_cast<std::uint8_t>(0x80 | (value & 0x7F));
    while (n > 0)
        out.push_back(buf[--n]);
}

void put_u32be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8)
        out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xFF));
}

struct PendingNote {
    std::uint64_t on;
    std::uint64_t off;
    int pitch;
    int velocity;
    bool dropped = false;
};

} // namespace

std::vector<MidiMessage> schedule_messages(std::span<const TimedEvent> events, int steps_per_beat, int channel) {
    if (steps_per_beat <= 0)
        throw InvalidArgument("steps_per_beat must be >= 1");
    if (channel < 0 || channel > 15)
        throw InvalidArgument("MIDI channel must be in [0, 15]");
    for (std::size_t i = 1; i < events.size(); ++i)
        if (event_step(events[i]) < event_step(events[i - 1]))
            throw InvalidArgument("events must be sorted by step");

    std::vector<PendingNote> notes;
    std::vector<MidiMessage> out;
    std::map<int, std::size_t> last_by_pitch;
    for (const auto& e : events) {
        if (const auto* n = std::get_if<NoteEvent>(&e)) {
            if (!in_data_range(n->pitch) || n->velocity < 1 || n->velocity > 127)
                throw ContractError("note pitch or velocity outside the MIDI range");
            if (!(n->duration_steps > 0.0) || !std::isfinite(n->duration_steps))
                throw ContractError("note duration must be positive");
            const std::uint64_t on = step_to_tick(n->t, steps_per_beat);
            const auto len = static_cast<std::uint64_t>(
                std::llround(n->duration_steps * smf_ticks_per_quarter / steps_per_beat));
            const std::uint64_t off = on + std::max<std::uint64_t>(len, 1);
            if (auto it = last_by_pitch.find(n->pitch); it != last_by_pitch.end()) {
                PendingNote& prev = notes[it->second];
                if (!prev.dropped && prev.off > on) {
                    prev.off = on;
                    prev.dropped = prev.off <= prev.on;
                }
            }
            last_by_pitch[n->pitch] = notes.size();
            notes.push_back({on, off, n->pitch, n->velocity});
        } else {
            const auto& cc = std::get<CcEvent>(e);
            if (!in_data_range(cc.controller) || !in_data_range(cc.value))
                throw ContractError("controller number or value outside the MIDI range");
            out.push_back({MidiKind::control_change, channel, cc.controller, cc.value, step_to_tick(cc.t, steps_per_beat)});
        }
    }
    for (const auto& n : notes) {
        if (n.dropped)
            continue;
        out.push_back({MidiKind::note_on, channel, n.pitch, n.velocity, n.on});
        out.push_back({MidiKind::note_off, channel, n.pitch, 0, n.off});
    }
    std::stable_sort(out.begin(), out.end(), [](const MidiMessage& a, const MidiMessage& b) {
        if (a.tick != b.tick)
            return a.tick < b.tick;
        return kind_rank(a.kind) < kind_rank(b.kind);
    });
    return out;
}

std::vector<std::uint8_t> encode_live(const MidiMessage& m) {
    std::uint8_t status = 0;
    switch (m.kind) {
    case MidiKind::note_on: status = 0x90; break;
    case MidiKind::note_off: status = 0x80; break;
    case MidiKind::control_change: status = 0xB0; break;
    }
    if (m.channel < 0 || m.channel > 15 || !in_data_range(m.data1) || !in_data_range(m.data2))
        throw ContractError("MIDI message field out of range");
    return {static_cast<std::uint8_t>(status | m.channel), static_cast<std::uint8_t>(m.data1),
            static_cast<std::uint8_t>(m.data2)};
}

std::vector<std::uint8_t> events_to_smf(std::span<const TimedEvent> events, int steps_per_beat, int channel) {
    const auto messages = schedule_messages(events, steps_per_beat, channel);

    std::vector<std::uint8_t> track;
    std::uint64_t now = 0;
    for (const auto& m : messages) {
        put_vlq(track, m.tick - now);
        now = m.tick;
        const auto bytes = encode_live(m);
        track.insert(track.end(), bytes.begin(), bytes.end());
    }
    put_vlq(track, 0);
    track.insert(track.end(), {0xFF, 0x2F, 0x00});

    std::vector<std::uint8_t> file = {'M', 'T', 'h', 'd', 0, 0, 0, 6, 0, 0, 0, 1};
    file.push_back(static_cast<std::uint8_t>(smf_ticks_per_quarter >> 8));
    file.push_back(static_cast<std::uint8_t>(smf_ticks_per_quarter & 0xFF));
    file.insert(file.end(), {'M', 'T', 'r', 'k'});
    put_u32be(file, static_cast<std::uint32_t>(track.size()));
    file.insert(file.end(), track.begin(), track.end());
    return file;
}

std::vector<std::uint8_t> events_to_smf(std::span<const NoteEvent> notes, int steps_per_beat, int channel) {
    std::vector<TimedEvent> events(notes.begin(), notes.end());
    return events_to_smf(std::span<const TimedEvent>(events), steps_per_beat, channel);
}

std::vector<MidiMessage> lfo_to_cc_stream(std::span<const LfoSample> samples, int channel, int controller) {
    if (!in_data_range(controller))
        throw InvalidArgument("controller must be in [0, 127]");
    if (channel < 0 || channel > 15)
        throw InvalidArgument("MIDI channel must be in [0, 15]");
    std::vector<MidiMessage> out;
    int last = -1;
    for (const auto& s : samples) {
        if (s.cc == last)
            continue;
        last = s.cc;
        out.push_back({MidiKind::control_change, channel, controller, s.cc, s.t});
    }
    return out;
}

} // namespace remi
