#pragma once

#include "remi/arp.hpp"
#include "remi/lfo.hpp"

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace remi {

inline constexpr int smf_ticks_per_quarter = 480;

enum class MidiKind { note_on, note_off, control_change };

struct MidiMessage {
    MidiKind kind = MidiKind::note_on;
    int channel = 0;
    int data1 = 0; // pitch or controller number
    int data2 = 0; // velocity or controller value
    std::uint64_t tick = 0;

    friend bool operator==(const MidiMessage&, const MidiMessage&) = default;
};

/// A controller value at an engine step.
struct CcEvent {
    std::uint64_t t = 0;
    int controller = 1;
    int value = 0;
};

using TimedEvent = std::variant<NoteEvent, CcEvent>;

/// Format-0 Standard MIDI File, 480 ticks per quarter, one track, no running
/// status. Step t lands on tick round(t * 480 / steps_per_beat); a note lasts
/// round(duration_steps * 480 / steps_per_beat) ticks, at least one. A note
/// whose successor on the same pitch starts before it ends is cut at that
/// start (dropped if that leaves it empty).
///
/// Throws InvalidArgument for events not sorted by step or a bad
/// steps_per_beat / channel, ContractError for out-of-range MIDI data.
std::vector<std::uint8_t> events_to_smf(std::span<const TimedEvent> events, int steps_per_beat, int channel = 0);
std::vector<std::uint8_t> events_to_smf(std::span<const NoteEvent> notes, int steps_per_beat, int channel = 0);

/// Absolute-time message list the SMF writer encodes (after overlap merging), in file order.
std::vector<MidiMessage> schedule_messages(std::span<const TimedEvent> events, int steps_per_beat, int channel = 0);

/// One control change per sample whose cc differs from the last one sent;
/// the first sample is always sent. tick carries the sample's step index.
std::vector<MidiMessage> lfo_to_cc_stream(std::span<const LfoSample> samples, int channel, int controller);

/// Status + data bytes of a live message (no delta time).
std::vector<std::uint8_t> encode_live(const MidiMessage& message);

} // namespace remi
