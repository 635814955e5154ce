#pragma once

#include "remi/lfo.hpp"
#include "remi/reservoir.hpp"
#include "remi/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace remi {

/// Largest confidence accepted; stands in for an infinitely sharp softmax.
inline constexpr double max_beta = 1e6;

struct NoteEvent {
    std::uint64_t t = 0;
    std::size_t index = 0;
    int pitch = 60;
    int velocity = 100;
    double duration_steps = 0.5;

    friend bool operator==(const NoteEvent&, const NoteEvent&) = default;
};

/// p_i = exp(beta*y_i - max_j beta*y_j) / sum. Throws InvalidArgument for an
/// empty vector or beta < 0 / non-finite, ContractError for non-finite logits.
/// Probabilities are strictly positive unless the exponent underflows (very large beta).
std::vector<double> softmax_confidence(std::span<const double> y, double beta);

/// e_index of length m. Throws ContractError when index >= m.
Vector one_hot(std::size_t index, std::size_t m);

/// Inverse-CDF draw from a probability vector using one uniform01() from `rng`.
std::size_t sample_categorical(std::span<const double> p, Rng& rng);

struct ArpOptions {
    double beta = 2.0;
    std::uint64_t rng_seed = 0;
    int velocity = 100;
    double gate = 0.5;
    PulseInput pulse{};
};

/// Arpeggiator network: `max_keys` output rows and one-hot feedback lines, one (pulse) input.
NetworkConfig arp_network_config(std::size_t neurons, std::uint64_t seed, std::size_t max_keys, double density = 1.0);

class ArpSession {
  public:
    /// The network's output_dim fixes the key capacity m; feedback_dim must equal it.
    explicit ArpSession(Network net, ArpOptions options = {});

    /// Sorts and deduplicates `pitches`. The reservoir state is kept; the
    /// one-hot feedback is cleared if it points past the new key count.
    /// Throws InvalidArgument for a pitch outside [0, 127] and CapacityError
    /// for more than m distinct pitches; the session is unchanged on error.
    void set_held_notes(std::span<const int> pitches);

    /// Steps the reservoir and, if any keys are held, draws the next note.
    /// With no keys held the network still steps (zero feedback) and nothing
    /// is returned. Throws EngineFault on a non-finite output.
    std::optional<NoteEvent> tick();

    /// The selection stage on its own: softmax over `logits` with the current
    /// beta, categorical draw from the session RNG, one-hot feedback update.
    /// `logits.size()` must be in [1, held note count].
    std::size_t select(std::span<const double> logits);

    void reset();
    void replace_network(Network net);

    void set_scales(const Scales& scales) { net_.set_scales(scales); }
    /// Clamped to max_beta. Throws InvalidArgument for negative or NaN.
    void set_beta(double beta);
    void set_gate(double gate);
    void set_velocity(int velocity);
    void set_pulse(const PulseInput& pulse) { options_.pulse = pulse; }

    const Network& network() const noexcept { return net_; }
    const ReservoirState& state() const noexcept { return state_; }
    const std::vector<int>& held_notes() const noexcept { return held_; }
    std::size_t capacity() const noexcept { return net_.config().output_dim; }
    const Vector& last_one_hot() const noexcept { return one_hot_; }
    const Vector& last_output() const noexcept { return y_; }
    const std::vector<double>& last_probabilities() const noexcept { return p_; }
    const ArpOptions& options() const noexcept { return options_; }
    const Rng& rng() const noexcept { return rng_; }

  private:
    Network net_;
    ArpOptions options_;
    ReservoirState state_;
    std::vector<int> held_;
    Rng rng_;
    Vector x_;
    Vector one_hot_;
    Vector y_;
    std::vector<double> p_;
};

/// Fresh session, `steps` ticks, collected events. Throws InvalidArgument for steps = 0.
std::vector<NoteEvent> render_arp(const NetworkConfig& config, const Scales& scales, const ArpOptions& options,
                                  std::span<const int> pitches, std::size_t steps);

/// One JSON object per line: t, index, pitch, velocity, duration_steps.
void write_events_jsonl(std::ostream& out, std::span<const NoteEvent> events);
std::vector<NoteEvent> read_events_jsonl(std::istream& in);

} // namespace remi
