#include "remi/lfo.hpp"

#include "remi/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

namespace remi {

namespace {

// Logistic function kept strictly inside (0, 1): for |y| beyond ~37 the exact
// result rounds to 0 or 1 in binary64, so it is pinned to the nearest
// representable interior value instead.
double sigmoid(double y) {
    double v;
    if (y >= 0.0) {
        v = 1.0 / (1.0 + std::exp(-y));
    } else {
        const double e = std::exp(y);
        v = e / (1.0 + e);
    }
    constexpr double lo = std::numeric_limits<double>::denorm_min();
    const double hi = std::nextafter(1.0, 0.0);
    return std::clamp(v, lo, hi);
}

} // namespace

int value_to_cc(double value) noexcept {
    if (!(value > 0.0))
        return 0;
    const long cc = std::lround(127.0 * value);
    return static_cast<int>(std::clamp(cc, 0L, 127L));
}

NetworkConfig lfo_network_config(std::size_t neurons, std::uint64_t seed, double density) {
    NetworkConfig c;
    c.neurons = neurons;
    c.input_dim = 1;
    c.feedback_dim = 1;
    c.output_dim = 1;
    c.recurrent_density = density;
    c.seed = seed;
    return c;
}

LfoSession::LfoSession(Network net, LfoOptions options) : net_(std::move(net)), options_(options) {
    const auto& c = net_.config();
    if (c.output_dim != 1 || c.feedback_dim != 1)
        throw InvalidConfig("LFO network needs output_dim = 1 and feedback_dim = 1");
    if (!(options_.tick_rate_hz > 0.0) || !std::isfinite(options_.tick_rate_hz))
        throw InvalidConfig("tick_rate_hz must be > 0");
    reset();
}

void LfoSession::reset() {
    state_ = reset_state(net_);
    last_y_prime_ = 0.5;
    x_ = Vector::Zero(static_cast<Eigen::Index>(net_.config().input_dim));
    fb_ = Vector::Constant(1, last_y_prime_);
}

void LfoSession::replace_network(Network net) {
    const auto& c = net.config();
    if (c.output_dim != 1 || c.feedback_dim != 1)
        throw InvalidConfig("LFO network needs output_dim = 1 and feedback_dim = 1");
    net_ = std::move(net);
    reset();
}

void LfoSession::set_tick_rate(double hz) {
    if (!(hz > 0.0) || !std::isfinite(hz))
        throw InvalidConfig("tick_rate_hz must be > 0");
    options_.tick_rate_hz = hz;
}

LfoSample LfoSession::tick() {
    const std::uint64_t t = state_.t;
    if (x_.size() > 0)
        x_(0) = options_.pulse.value_at(t);
    fb_(0) = last_y_prime_;
    step_in_place(net_, state_, x_, fb_, y_);
    if (!std::isfinite(y_(0)) || !state_.s.allFinite())
        throw EngineFault("LFO reservoir produced a non-finite value");

    last_y_prime_ = sigmoid(y_(0));
    LfoSample sample{t, last_y_prime_, value_to_cc(last_y_prime_)};
    if (options_.capture_length > 0) {
        if (capture_.size() == options_.capture_length)
            capture_.pop_front();
        capture_.push_back(sample);
    }
    return sample;
}

std::vector<double> render_lfo(const NetworkConfig& config, const Scales& scales, std::size_t steps,
                               const PulseInput& pulse) {
    if (steps == 0)
        throw InvalidArgument("steps must be >= 1");
    LfoOptions options;
    options.capture_length = 0;
    options.pulse = pulse;
    LfoSession session(Network(config, scales), options);
    std::vector<double> out;
    out.reserve(steps);
    for (std::size_t i = 0; i < steps; ++i)
        out.push_back(session.tick().value);
    return out;
}

std::optional<std::size_t> dominant_period(std::span<const double> waveform) {
    const std::size_t n = waveform.size();
    if (n < 16)
        throw InvalidArgument("dominant_period needs at least 16 samples");

    double mean = 0.0;
    for (double v : waveform)
        mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> x(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = waveform[i] - mean;
        var += x[i] * x[i];
    }
    var /= static_cast<double>(n - 1);
    if (var < 1e-10)
        return std::nullopt;

    const std::size_t max_lag = n / 2;
    // score[lag] for lag in [0, max_lag + 1]; score[0] unused.
    std::vector<double> score(max_lag + 2, 0.0);
    for (std::size_t lag = 1; lag <= max_lag + 1 && lag < n; ++lag) {
        double ab = 0.0, aa = 0.0, bb = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) {
            const double a = x[i];
            const double b = x[i + lag];
            ab += a * b;
            aa += a * a;
            bb += b * b;
        }
        const double denom = std::sqrt(aa * bb);
        score[lag] = denom > 0.0 ? ab / denom : 0.0;
    }

    for (std::size_t lag = 2; lag <= max_lag; ++lag) {
        const bool peak = score[lag] > score[lag - 1] && score[lag] >= score[lag + 1];
        if (peak && score[lag] > 0.9)
            return lag;
    }
    return std::nullopt;
}

void write_waveform_csv(std::ostream& out, std::span<const double> waveform) {
    for (double v : waveform)
        out << fmt::format("{:.9f}\n", v);
}

void write_waveform_f64le(std::ostream& out, std::span<const double> waveform) {
    char bytes[8];
    for (double v : waveform) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i)
            bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
        out.write(bytes, 8);
    }
}

std::vector<double> read_waveform_f64le(std::istream& in) {
    std::vector<double> out;
    unsigned char bytes[8];
    while (in.read(reinterpret_cast<char*>(bytes), 8)) {
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i)
            bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
        out.push_back(std::bit_cast<double>(bits));
    }
    return out;
}

} // namespace remi
