#include "remi/engine.hpp"

#include "remi/error.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

namespace remi {

using namespace protocol;

namespace {

template <class... Ts> struct overloaded : Ts... {
    using Ts::operator()...;
};

LfoSession make_lfo(const EngineConfig& c) {
    LfoOptions options;
    options.tick_rate_hz = c.tick_rate_hz;
    options.pulse = c.pulse;
    return LfoSession(Network(lfo_network_config(c.neurons, c.seed, c.density), c.scales), options);
}

ArpSession make_arp(const EngineConfig& c) {
    ArpOptions options;
    options.beta = c.beta;
    options.rng_seed = c.rng_seed;
    options.velocity = c.velocity;
    options.gate = c.gate;
    options.pulse = c.pulse;
    return ArpSession(Network(arp_network_config(c.neurons, c.seed, c.max_keys, c.density), c.scales), options);
}

EngineConfig validated(EngineConfig c) {
    if (c.neurons == 0 || c.neurons > max_neurons)
        throw InvalidConfig("neurons must be in [1, " + std::to_string(max_neurons) + "]");
    if (c.max_keys == 0)
        throw InvalidConfig("max_keys must be >= 1");
    if (c.lfo_batch == 0)
        throw InvalidConfig("lfo_batch must be >= 1");
    if (!(c.viz_rate_hz > 0.0))
        throw InvalidConfig("viz_rate_hz must be > 0");
    try {
        check_param_range(Param::tick_rate_hz, c.tick_rate_hz);
        check_param_range(Param::beta, c.beta);
        check_param_range(Param::gate, c.gate);
    } catch (const ProtocolError& e) {
        throw InvalidConfig(e.what());
    }
    c.scales.validate();
    return c;
}

} // namespace

nlohmann::json to_json(const EngineConfig& c) {
    return {{"neurons", c.neurons},
            {"density", c.density},
            {"seed", c.seed},
            {"max_keys", c.max_keys},
            {"rng_seed", c.rng_seed},
            {"scales",
             {{"input_scale", c.scales.input_scale},
              {"spectral_radius", c.scales.spectral_radius},
              {"feedback_scale", c.scales.feedback_scale},
              {"bias_scale", c.scales.bias_scale},
              {"leak_rate", c.scales.leak_rate}}},
            {"beta", c.beta},
            {"tick_rate_hz", c.tick_rate_hz},
            {"gate", c.gate},
            {"velocity", c.velocity},
            {"mode", to_string(c.mode)},
            {"clock", to_string(c.clock)},
            {"pulse", {{"enabled", c.pulse.enabled}, {"period", c.pulse.period}, {"amplitude", c.pulse.amplitude}}},
            {"lfo_batch", c.lfo_batch},
            {"history_length", c.history_length},
            {"viz_rate_hz", c.viz_rate_hz}};
}

EngineConfig engine_config_from_json(const nlohmann::json& j) {
    EngineConfig c;
    c.neurons = j.at("neurons").get<std::size_t>();
    c.density = j.at("density").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.max_keys = j.at("max_keys").get<std::size_t>();
    c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    const auto& s = j.at("scales");
    c.scales = Scales{s.at("input_scale").get<double>(), s.at("spectral_radius").get<double>(),
                      s.at("feedback_scale").get<double>(), s.at("bias_scale").get<double>(),
                      s.at("leak_rate").get<double>()};
    c.beta = j.at("beta").get<double>();
    c.tick_rate_hz = j.at("tick_rate_hz").get<double>();
    c.gate = j.at("gate").get<double>();
    c.velocity = j.at("velocity").get<int>();
    c.mode = j.at("mode").get<std::string>() == "arp" ? Mode::arp : Mode::lfo;
    c.clock = j.at("clock").get<std::string>() == "manual" ? ClockMode::manual : ClockMode::wall;
    const auto& p = j.at("pulse");
    c.pulse = PulseInput{p.at("enabled").get<bool>(), p.at("period").get<std::uint64_t>(), p.at("amplitude").get<double>()};
    c.lfo_batch = j.at("lfo_batch").get<std::size_t>();
    c.history_length = j.at("history_length").get<std::size_t>();
    c.viz_rate_hz = j.at("viz_rate_hz").get<double>();
    return c;
}

void write_session_log(std::ostream& out, const SessionLog& log) {
    out << nlohmann::json{{"type", "session_start"}, {"schema_version", schema_version}, {"config", to_json(log.initial)}}
               .dump()
        << '\n';
    for (const auto& e : log.entries) {
        auto msg = protocol::to_json(e.message);
        msg["schema_version"] = schema_version;
        msg["seq"] = 0;
        out << nlohmann::json{{"type", "applied"}, {"tick", e.tick}, {"fault_reset", e.fault_reset}, {"message", msg}}
                   .dump()
            << '\n';
    }
    out << nlohmann::json{{"type", "session_end"}, {"ticks", log.ticks}}.dump() << '\n';
}

SessionLog read_session_log(std::istream& in) {
    SessionLog log;
    bool started = false;
    bool ended = false;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto j = nlohmann::json::parse(line);
        const auto type = j.at("type").get<std::string>();
        if (type == "session_start") {
            log.initial = engine_config_from_json(j.at("config"));
            started = true;
        } else if (type == "applied") {
            log.entries.push_back(LogEntry{j.at("tick").get<std::uint64_t>(), parse_control_message(j.at("message")),
                                           j.value("fault_reset", false)});
            log.ticks = std::max(log.ticks, log.entries.back().tick);
        } else if (type == "session_end") {
            log.ticks = j.at("ticks").get<std::uint64_t>();
            ended = true;
        }
    }
    if (!started)
        throw InvalidArgument("session log has no session_start record");
    (void)ended;
    return log;
}

Engine::Engine(const EngineConfig& config)
    : config_(validated(config)), mode_(config_.mode), lfo_(make_lfo(config_)), arp_(make_arp(config_)) {
    log_.initial = config_;
}

std::uint64_t Engine::viz_interval() const {
    const double ticks = std::ceil(config_.tick_rate_hz / config_.viz_rate_hz);
    return ticks < 1.0 ? 1 : static_cast<std::uint64_t>(ticks);
}

ParamEcho Engine::param_echo() const {
    ParamEcho e;
    e.mode = mode_;
    e.clock = config_.clock;
    e.scales = config_.scales;
    e.beta = arp_.options().beta;
    e.tick_rate_hz = config_.tick_rate_hz;
    e.gate = arp_.options().gate;
    e.seed = config_.seed;
    e.neurons = config_.neurons;
    e.density = config_.density;
    e.max_keys = config_.max_keys;
    e.rng_seed = config_.rng_seed;
    e.held_notes = arp_.held_notes();
    e.tick = ticks_;
    return e;
}

void Engine::flush(std::vector<TelemetryFrame>& telemetry) {
    if (pending_ && !pending_->values.empty())
        telemetry.emplace_back(std::move(*pending_));
    pending_.reset();
}

void Engine::reset_sessions() {
    lfo_.reset();
    arp_.reset();
    history_.clear();
    history_labels_.clear();
}

void Engine::record_history(const ReservoirState& state, std::optional<std::size_t> label) {
    if (config_.history_length == 0)
        return;
    if (history_.size() == config_.history_length) {
        history_.pop_front();
        history_labels_.pop_front();
    }
    history_.push_back(state.s);
    history_labels_.push_back(label);
}

VizFrame Engine::make_viz_frame() const {
    const Network& net = mode_ == Mode::lfo ? lfo_.network() : arp_.network();
    const ReservoirState& state = mode_ == Mode::lfo ? lfo_.state() : arp_.state();
    VizFrame frame;
    frame.t = state.t;
    frame.activity = activity_frame(state);
    frame.graph = connectivity_graph(net, state, default_edge_threshold(net));
    if (history_.size() >= 2) {
        StateHistory h;
        h.rows.resize(static_cast<Eigen::Index>(history_.size()), static_cast<Eigen::Index>(net.neurons()));
        for (std::size_t r = 0; r < history_.size(); ++r)
            h.rows.row(static_cast<Eigen::Index>(r)) = history_[r].transpose();
        h.labels.assign(history_labels_.begin(), history_labels_.end());
        const std::size_t k = std::min<std::size_t>({2, history_.size(), net.neurons()});
        frame.pca = pca_project(h, k);
        frame.labels = h.labels;
    }
    return frame;
}

void Engine::tick(std::vector<TelemetryFrame>& telemetry) {
    try {
        if (mode_ == Mode::lfo) {
            const LfoSample sample = lfo_.tick();
            if (!pending_)
                pending_ = LfoFrame{sample.t, {}};
            pending_->values.push_back(sample.value);
            if (pending_->values.size() >= config_.lfo_batch)
                flush(telemetry);
            record_history(lfo_.state(), std::nullopt);
        } else {
            const auto event = arp_.tick();
            if (event)
                telemetry.emplace_back(ArpEventFrame{*event});
            record_history(arp_.state(), event ? std::optional<std::size_t>(event->index) : std::nullopt);
        }
    } catch (const EngineFault& fault) {
        flush(telemetry);
        telemetry.emplace_back(ErrorFrame{code::engine_fault, fault.what()});
        reset_sessions();
        log_.entries.push_back(LogEntry{ticks_ + 1, ResetState{}, true});
    }
    ++ticks_;
    log_.ticks = ticks_;
    if (ticks_ % viz_interval() == 0)
        telemetry.emplace_back(make_viz_frame());
}

ParamEcho Engine::apply(const ControlMessage& message, std::vector<TelemetryFrame>& telemetry) {
    const std::uint64_t at = ticks_;
    apply_unlogged(message, telemetry);
    if (is_mutating(message) && !std::holds_alternative<Step>(message))
        log_.entries.push_back(LogEntry{at, message, false});
    return param_echo();
}

void Engine::apply_unlogged(const ControlMessage& message, std::vector<TelemetryFrame>& telemetry) {
    std::visit(
        overloaded{
            [&](const SetParam& m) {
                check_param_range(m.name, m.value);
                Scales s = config_.scales;
                switch (m.name) {
                case Param::input_scale: s.input_scale = m.value; break;
                case Param::spectral_radius: s.spectral_radius = m.value; break;
                case Param::feedback_scale: s.feedback_scale = m.value; break;
                case Param::bias_scale: s.bias_scale = m.value; break;
                case Param::leak_rate: s.leak_rate = m.value; break;
                case Param::beta:
                    arp_.set_beta(m.value);
                    config_.beta = arp_.options().beta;
                    return;
                case Param::tick_rate_hz:
                    lfo_.set_tick_rate(m.value);
                    config_.tick_rate_hz = m.value;
                    return;
                case Param::gate:
                    arp_.set_gate(m.value);
                    config_.gate = m.value;
                    return;
                }
                lfo_.set_scales(s);
                arp_.set_scales(s);
                config_.scales = s;
            },
            [&](const SetHeldNotes& m) {
                try {
                    arp_.set_held_notes(m.pitches);
                } catch (const CapacityError& e) {
                    throw ProtocolError(code::capacity, e.what());
                } catch (const InvalidArgument& e) {
                    throw ProtocolError(code::out_of_range, e.what());
                }
            },
            [&](const ResetState&) {
                flush(telemetry);
                reset_sessions();
            },
            [&](const Reseed& m) {
                if (m.neurons == 0)
                    throw ProtocolError(code::invalid_config, "neurons must be >= 1");
                if (m.neurons > max_neurons)
                    throw ProtocolError(code::out_of_range, "neurons must be <= " + std::to_string(max_neurons));
                Network lfo_net(lfo_network_config(m.neurons, m.seed, config_.density), config_.scales);
                Network arp_net(arp_network_config(m.neurons, m.seed, config_.max_keys, config_.density),
                                config_.scales);
                flush(telemetry);
                lfo_.replace_network(std::move(lfo_net));
                arp_.replace_network(std::move(arp_net));
                history_.clear();
                history_labels_.clear();
                config_.seed = m.seed;
                config_.neurons = m.neurons;
            },
            [&](const SetMode& m) {
                if (m.mode == mode_)
                    return;
                flush(telemetry);
                history_.clear();
                history_labels_.clear();
                mode_ = m.mode;
            },
            [&](const Subscribe&) {},
            [&](const SnapshotRequest&) {},
            [&](const Step& m) {
                if (config_.clock != ClockMode::manual)
                    throw ProtocolError(code::invalid_state, "step is only accepted on a manual clock");
                for (std::uint64_t i = 0; i < m.count; ++i)
                    tick(telemetry);
                flush(telemetry);
            },
        },
        message);
}

void collect_stream(const TelemetryFrame& frame, ReplayOutput& out) {
    if (const auto* f = std::get_if<LfoFrame>(&frame))
        out.lfo_values.insert(out.lfo_values.end(), f->values.begin(), f->values.end());
    else if (const auto* e = std::get_if<ArpEventFrame>(&frame))
        out.arp_events.push_back(e->event);
}

ReplayOutput replay(const SessionLog& log) {
    EngineConfig config = log.initial;
    config.clock = ClockMode::manual;
    Engine engine(config);
    ReplayOutput out;
    std::vector<TelemetryFrame> frames;
    std::size_t next = 0;
    for (std::uint64_t k = 0; k <= log.ticks; ++k) {
        while (next < log.entries.size() && log.entries[next].tick == k) {
            if (!log.entries[next].fault_reset)
                engine.apply(log.entries[next].message, frames);
            ++next;
        }
        if (k < log.ticks)
            engine.tick(frames);
    }
    engine.flush(frames);
    for (const auto& f : frames)
        collect_stream(f, out);
    return out;
}

} // namespace remi
