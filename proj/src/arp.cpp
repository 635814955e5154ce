#include "remi/arp.hpp"

#include "remi/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

namespace remi {

namespace {

constexpr std::string_view rng_label = "arp_draw";

void check_arp_config(const NetworkConfig& c) {
    if (c.feedback_dim != c.output_dim)
        throw InvalidConfig("arpeggiator network needs feedback_dim = output_dim");
}

} // namespace

std::vector<double> softmax_confidence(std::span<const double> y, double beta) {
    if (y.empty())
        throw InvalidArgument("softmax over an empty vector");
    if (!(beta >= 0.0) || !std::isfinite(beta))
        throw InvalidArgument("beta must be finite and >= 0");
    double top = -std::numeric_limits<double>::infinity();
    for (double v : y) {
        if (!std::isfinite(v))
            throw ContractError("softmax logits must be finite");
        top = std::max(top, beta * v);
    }
    std::vector<double> p(y.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        p[i] = std::exp(beta * y[i] - top);
        sum += p[i];
    }
    for (double& v : p)
        v /= sum;
    return p;
}

Vector one_hot(std::size_t index, std::size_t m) {
    if (index >= m)
        throw ContractError("one_hot index out of range");
    Vector v = Vector::Zero(static_cast<Eigen::Index>(m));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return v;
}

std::size_t sample_categorical(std::span<const double> p, Rng& rng) {
    if (p.empty())
        throw InvalidArgument("categorical over an empty vector");
    const double u = rng.uniform01();
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0)
            last_positive = i;
        cumulative += p[i];
        if (u < cumulative && p[i] > 0.0)
            return i;
    }
    // Only reachable when rounding leaves the cumulative sum a hair below u.
    return last_positive;
}

NetworkConfig arp_network_config(std::size_t neurons, std::uint64_t seed, std::size_t max_keys, double density) {
    NetworkConfig c;
    c.neurons = neurons;
    c.input_dim = 1;
    c.feedback_dim = max_keys;
    c.output_dim = max_keys;
    c.recurrent_density = density;
    c.seed = seed;
    return c;
}

ArpSession::ArpSession(Network net, ArpOptions options)
    : net_(std::move(net)), options_(options), rng_(options.rng_seed, rng_label) {
    check_arp_config(net_.config());
    set_beta(options_.beta);
    set_gate(options_.gate);
    set_velocity(options_.velocity);
    reset();
}

void ArpSession::reset() {
    state_ = reset_state(net_);
    rng_ = Rng(options_.rng_seed, rng_label);
    x_ = Vector::Zero(static_cast<Eigen::Index>(net_.config().input_dim));
    one_hot_ = Vector::Zero(static_cast<Eigen::Index>(capacity()));
    y_ = Vector::Zero(static_cast<Eigen::Index>(capacity()));
    p_.clear();
}

void ArpSession::replace_network(Network net) {
    check_arp_config(net.config());
    if (net.config().output_dim != capacity())
        throw InvalidConfig("replacement network changes the key capacity");
    net_ = std::move(net);
    reset();
}

void ArpSession::set_beta(double beta) {
    if (!(beta >= 0.0))
        throw InvalidArgument("beta must be >= 0");
    options_.beta = std::min(beta, max_beta);
}

void ArpSession::set_gate(double gate) {
    if (!(gate > 0.0 && gate <= 1.0))
        throw InvalidArgument("gate must be in (0, 1]");
    options_.gate = gate;
}

void ArpSession::set_velocity(int velocity) {
    if (velocity < 1 || velocity > 127)
        throw InvalidArgument("velocity must be in [1, 127]");
    options_.velocity = velocity;
}

void ArpSession::set_held_notes(std::span<const int> pitches) {
    std::vector<int> held(pitches.begin(), pitches.end());
    for (int p : held)
        if (p < 0 || p > 127)
            throw InvalidArgument("pitch outside [0, 127]");
    std::sort(held.begin(), held.end());
    held.erase(std::unique(held.begin(), held.end()), held.end());
    if (held.size() > capacity())
        throw CapacityError("more distinct pitches than the arpeggiator's " + std::to_string(capacity()) + " keys");

    held_ = std::move(held);
    Eigen::Index active;
    if (one_hot_.maxCoeff(&active) > 0.0 && static_cast<std::size_t>(active) >= held_.size())
        one_hot_.setZero();
}

std::size_t ArpSession::select(std::span<const double> logits) {
    if (logits.empty() || logits.size() > held_.size())
        throw ContractError("logit count must be in [1, held note count]");
    p_ = softmax_confidence(logits, options_.beta);
    const std::size_t index = sample_categorical(p_, rng_);
    one_hot_.setZero();
    one_hot_(static_cast<Eigen::Index>(index)) = 1.0;
    return index;
}

std::optional<NoteEvent> ArpSession::tick() {
    const std::uint64_t t = state_.t;
    if (x_.size() > 0)
        x_(0) = options_.pulse.value_at(t);
    step_in_place(net_, state_, x_, one_hot_, y_);
    if (!y_.allFinite() || !state_.s.allFinite())
        throw EngineFault("arpeggiator reservoir produced a non-finite value");

    const std::size_t n = held_.size();
    if (n == 0) {
        p_.clear();
        return std::nullopt;
    }
    // Only the first n output rows take part; the rest never reach the softmax.
    const std::size_t index = select(std::span<const double>(y_.data(), n));
    return NoteEvent{t, index, held_[index], options_.velocity, options_.gate};
}

std::vector<NoteEvent> render_arp(const NetworkConfig& config, const Scales& scales, const ArpOptions& options,
                                  std::span<const int> pitches, std::size_t steps) {
    if (steps == 0)
        throw InvalidArgument("steps must be >= 1");
    ArpSession session(Network(config, scales), options);
    session.set_held_notes(pitches);
    std::vector<NoteEvent> events;
    events.reserve(pitches.empty() ? 0 : steps);
    for (std::size_t i = 0; i < steps; ++i)
        if (auto ev = session.tick())
            events.push_back(*ev);
    return events;
}

void write_events_jsonl(std::ostream& out, std::span<const NoteEvent> events) {
    for (const auto& e : events) {
        nlohmann::ordered_json j;
        j["t"] = e.t;
        j["index"] = e.index;
        j["pitch"] = e.pitch;
        j["velocity"] = e.velocity;
        j["duration_steps"] = e.duration_steps;
        out << j.dump() << '\n';
    }
}

std::vector<NoteEvent> read_events_jsonl(std::istream& in) {
    std::vector<NoteEvent> events;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto j = nlohmann::json::parse(line);
        events.push_back(NoteEvent{j.at("t").get<std::uint64_t>(), j.at("index").get<std::size_t>(),
                                   j.at("pitch").get<int>(), j.at("velocity").get<int>(),
                                   j.at("duration_steps").get<double>()});
    }
    return events;
}

} // namespace remi
