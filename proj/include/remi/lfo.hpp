#pragma once

#include "remi/reservoir.hpp"

#include <cstddef>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace remi {

/// Optional rhythmic pulse on the single input channel: x = amplitude on
/// every `period`-th tick (starting at tick 0), zero otherwise.
struct PulseInput {
    bool enabled = false;
    std::uint64_t period = 16;
    double amplitude = 1.0;

    double value_at(std::uint64_t t) const noexcept {
        return enabled && period > 0 && t % period == 0 ? amplitude : 0.0;
    }
};

/// 127·value rounded half away from zero, clamped to the MIDI range.
int value_to_cc(double value) noexcept;

struct LfoSample {
    std::uint64_t t = 0;
    double value = 0.5;
    int cc = 64;

    friend bool operator==(const LfoSample&, const LfoSample&) = default;
};

struct LfoOptions {
    double tick_rate_hz = 200.0;
    std::size_t capture_length = 4096;
    PulseInput pulse{};
};

/// NetworkConfig for an LFO: one output, one feedback line, one (pulse) input.
NetworkConfig lfo_network_config(std::size_t neurons, std::uint64_t seed, double density = 1.0);

class LfoSession {
  public:
    explicit LfoSession(Network net, LfoOptions options = {});

    /// One step of the oscillator. Feeds back the previous sigmoid output and
    /// returns the new one. Throws EngineFault on a non-finite state, after
    /// which the session must be reset.
    LfoSample tick();

    /// Zeroes the reservoir state and restores the feedback to sigmoid(0).
    void reset();

    /// Swaps in a new network (same role, e.g. after reseed) and resets the state.
    void replace_network(Network net);

    void set_scales(const Scales& scales) { net_.set_scales(scales); }
    void set_tick_rate(double hz);
    void set_pulse(const PulseInput& pulse) { options_.pulse = pulse; }

    const Network& network() const noexcept { return net_; }
    const ReservoirState& state() const noexcept { return state_; }
    double last_y_prime() const noexcept { return last_y_prime_; }
    double tick_rate_hz() const noexcept { return options_.tick_rate_hz; }
    const PulseInput& pulse() const noexcept { return options_.pulse; }

    /// Copy of the most recent samples, oldest first.
    std::vector<LfoSample> capture_snapshot() const { return {capture_.begin(), capture_.end()}; }

  private:
    Network net_;
    LfoOptions options_;
    ReservoirState state_;
    double last_y_prime_ = 0.5;
    Vector x_;
    Vector fb_;
    Vector y_;
    std::deque<LfoSample> capture_;
};

/// Offline batch of `steps` ticks from the zero state. Throws InvalidArgument for steps = 0.
std::vector<double> render_lfo(const NetworkConfig& config, const Scales& scales, std::size_t steps,
                               const PulseInput& pulse = {});

/// Period in samples of the strongest repetition, from the mean-removed
/// autocorrelation. Each lag is scored with the correlation coefficient of the
/// overlapping segments; the period is the first local maximum in
/// [2, length/2] whose score exceeds 0.9. Returns nullopt for a near-constant
/// signal (variance < 1e-10) or when no lag qualifies. Throws InvalidArgument
/// for fewer than 16 samples.
std::optional<std::size_t> dominant_period(std::span<const double> waveform);

/// One value per line, fixed notation with nine digits after the point.
void write_waveform_csv(std::ostream& out, std::span<const double> waveform);
/// Headerless little-endian IEEE-754 binary64.
void write_waveform_f64le(std::ostream& out, std::span<const double> waveform);
std::vector<double> read_waveform_f64le(std::istream& in);

} // namespace remi
