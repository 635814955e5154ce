// remi: offline rendering, network inspection and the live control service.
//
// Exit codes: 0 success, 1 I/O failure, 2 usage or validation error.

#include "remi/arp.hpp"
#include "remi/engine.hpp"
#include "remi/error.hpp"
#include "remi/lfo.hpp"
#include "remi/midi.hpp"
#include "remi/reservoir.hpp"
#include "remi/server.hpp"

#include "CLI11.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_io = 1;
constexpr int exit_usage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NetworkFlags {
    std::uint64_t seed = 1;
    std::size_t neurons = 100;
    double density = 1.0;
    remi::Scales scales{};
};

void add_network_flags(CLI::App* cmd, NetworkFlags& f) {
    cmd->add_option("--seed", f.seed, "Weight seed")->capture_default_str();
    cmd->add_option("--neurons", f.neurons, "Reservoir size")
        ->check(CLI::Range(std::size_t{1}, std::size_t{1} << 16))
        ->capture_default_str();
    cmd->add_option("--density", f.density, "Recurrent connection density, in (0, 1]")
        ->check(CLI::Range(std::numeric_limits<double>::min(), 1.0))
        ->capture_default_str();
    cmd->add_option("--spectral-radius", f.scales.spectral_radius)
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--leak-rate", f.scales.leak_rate)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    cmd->add_option("--input-scale", f.scales.input_scale)->check(CLI::NonNegativeNumber)->capture_default_str();
    cmd->add_option("--feedback-scale", f.scales.feedback_scale)->check(CLI::NonNegativeNumber)->capture_default_str();
    cmd->add_option("--bias-scale", f.scales.bias_scale)->check(CLI::NonNegativeNumber)->capture_default_str();
}

// "-" means standard output.
template <class WriteFn> void write_output(const std::string& path, bool binary, WriteFn&& write) {
    if (path == "-") {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    write(out);
    out.close();
    if (!out)
        throw IoError("failed writing '" + path + "'");
}

std::ostream& summary_stream(const std::string& out_path) { return out_path == "-" ? std::cerr : std::cout; }

// --- lfo-render -------------------------------------------------------------

struct LfoFlags {
    NetworkFlags net;
    std::size_t steps = 1024;
    std::string out;
    std::string format = "csv";
    std::uint64_t pulse_period = 0;
    double pulse_amplitude = 1.0;
};

int run_lfo_render(const LfoFlags& f) {
    remi::PulseInput pulse;
    if (f.pulse_period > 0)
        pulse = remi::PulseInput{true, f.pulse_period, f.pulse_amplitude};
    const auto config = remi::lfo_network_config(f.net.neurons, f.net.seed, f.net.density);
    const auto wave = remi::render_lfo(config, f.net.scales, f.steps, pulse);

    write_output(f.out, f.format == "bin", [&](std::ostream& os) {
        if (f.format == "bin")
            remi::write_waveform_f64le(os, wave);
        else
            remi::write_waveform_csv(os, wave);
    });

    const auto [lo, hi] = std::minmax_element(wave.begin(), wave.end());
    std::string period = "none";
    if (wave.size() >= 16)
        if (auto p = remi::dominant_period(wave))
            period = std::to_string(*p);
    summary_stream(f.out) << fmt::format("steps={} min={:.9f} max={:.9f} period={}\n", wave.size(), *lo, *hi, period);
    return exit_ok;
}

// --- arp-render -------------------------------------------------------------

struct ArpFlags {
    NetworkFlags net;
    std::size_t steps = 64;
    std::string notes;
    double beta = 2.0;
    std::uint64_t rng_seed = 0;
    std::size_t max_keys = 8;
    int velocity = 100;
    double gate = 0.5;
    int steps_per_beat = 4;
    int channel = 0;
    std::string out;
    std::string format = "json";
};

std::vector<int> parse_notes(const std::string& text) {
    std::vector<int> notes;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos)
            continue;
        std::size_t used = 0;
        int pitch = -1;
        try {
            pitch = std::stoi(item.substr(first), &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || item.find_first_not_of(" \t", first + used) != std::string::npos)
            throw UsageError("--notes: '" + item + "' is not a MIDI pitch");
        if (pitch < 0 || pitch > 127)
            throw UsageError("--notes: pitch " + std::to_string(pitch) + " outside [0, 127]");
        notes.push_back(pitch);
    }
    if (notes.empty())
        throw UsageError("--notes needs at least one MIDI pitch, e.g. --notes 60,64,67");
    return notes;
}

int run_arp_render(const ArpFlags& f) {
    const std::vector<int> notes = parse_notes(f.notes);
    remi::ArpOptions options;
    options.beta = f.beta;
    options.rng_seed = f.rng_seed;
    options.velocity = f.velocity;
    options.gate = f.gate;
    const auto config = remi::arp_network_config(f.net.neurons, f.net.seed, f.max_keys, f.net.density);

    std::vector<remi::NoteEvent> events;
    try {
        events = remi::render_arp(config, f.net.scales, options, notes, f.steps);
    } catch (const remi::CapacityError& e) {
        throw UsageError(std::string(e.what()) + " (raise --max-keys)");
    } catch (const remi::InvalidArgument& e) {
        throw UsageError(e.what());
    }

    write_output(f.out, f.format == "smf", [&](std::ostream& os) {
        if (f.format == "smf") {
            const auto bytes = remi::events_to_smf(std::span<const remi::NoteEvent>(events), f.steps_per_beat, f.channel);
            os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        } else {
            remi::write_events_jsonl(os, events);
        }
    });

    std::map<int, std::size_t> counts;
    for (int p : notes)
        counts[p] = 0;
    for (const auto& e : events)
        ++counts[e.pitch];
    auto& sum = summary_stream(f.out);
    sum << "steps=" << f.steps << " events=" << events.size();
    for (const auto& [pitch, count] : counts)
        sum << " count_" << pitch << '=' << count;
    sum << '\n';
    return exit_ok;
}

// --- inspect ----------------------------------------------------------------

struct InspectFlags {
    NetworkFlags net;
    std::string mode = "lfo";
    std::size_t max_keys = 8;
};

int run_inspect(const InspectFlags& f) {
    const auto config = f.mode == "arp" ? remi::arp_network_config(f.net.neurons, f.net.seed, f.max_keys, f.net.density)
                                        : remi::lfo_network_config(f.net.neurons, f.net.seed, f.net.density);
    const remi::Network net(config, f.net.scales);
    const auto& eff = net.effective();
    nlohmann::ordered_json report;
    report["neurons"] = config.neurons;
    report["density"] = config.recurrent_density;
    report["seed"] = config.seed;
    report["input_dim"] = config.input_dim;
    report["feedback_dim"] = config.feedback_dim;
    report["output_dim"] = config.output_dim;
    report["base_spectral_radius"] = net.base_spectral_radius();
    report["requested_spectral_radius"] = f.net.scales.spectral_radius;
    report["achieved_spectral_radius"] = remi::estimate_spectral_radius(eff.w);
    report["nonzero_recurrent"] = (eff.w.array() != 0.0).count();
    report["norms"] = {{"w_in", eff.w_in.norm()}, {"w", eff.w.norm()}, {"w_fb", eff.w_fb.norm()},
                       {"w_out", eff.w_out.norm()}, {"b", eff.b.norm()}};
    std::cout << report.dump(2) << '\n';
    return exit_ok;
}

// --- serve ------------------------------------------------------------------

struct ServeFlags {
    NetworkFlags net;
    std::string bind = "127.0.0.1";
    std::uint16_t port = 7421;
    bool manual_clock = false;
    std::string mode = "lfo";
    double tick_rate = 200.0;
    double beta = 2.0;
    std::uint64_t rng_seed = 0;
    std::size_t max_keys = 8;
    std::string session_log;
};

int run_serve(const ServeFlags& f) {
    remi::EngineConfig config;
    config.neurons = f.net.neurons;
    config.density = f.net.density;
    config.seed = f.net.seed;
    config.scales = f.net.scales;
    config.max_keys = f.max_keys;
    config.rng_seed = f.rng_seed;
    config.beta = f.beta;
    config.tick_rate_hz = f.tick_rate;
    config.mode = f.mode == "arp" ? remi::protocol::Mode::arp : remi::protocol::Mode::lfo;
    config.clock = f.manual_clock ? remi::protocol::ClockMode::manual : remi::protocol::ClockMode::wall;

    remi::ServerOptions options;
    options.address = f.bind;
    options.port = f.port;
    options.handle_signals = true;
    remi::WebSocketServer server(config, options);
    try {
        server.start();
    } catch (const std::exception& e) {
        throw IoError(std::string("cannot listen on ") + f.bind + ":" + std::to_string(f.port) + ": " + e.what());
    }
    // Scripts read the bound port from this line (useful with --port 0).
    std::cout << "listening=ws://" << f.bind << ':' << server.port() << std::endl;
    server.wait();
    server.stop();
    if (!f.session_log.empty()) {
        const auto log = server.session_log();
        write_output(f.session_log, false, [&](std::ostream& os) { remi::write_session_log(os, log); });
    }
    return exit_ok;
}

void configure_logging(bool serving) {
    auto logger = spdlog::stderr_color_mt("remi");
    spdlog::set_default_logger(logger);
    spdlog::set_level(serving ? spdlog::level::info : spdlog::level::warn);
    if (const char* level = std::getenv("REMI_LOG"))
        spdlog::set_level(spdlog::level::from_str(level));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Echo state network LFO and arpeggiator"};
    app.require_subcommand(1);

    LfoFlags lfo;
    auto* lfo_cmd = app.add_subcommand("lfo-render", "Render an LFO waveform");
    add_network_flags(lfo_cmd, lfo.net);
    lfo_cmd->add_option("--steps", lfo.steps)
        ->check(CLI::Range(std::size_t{1}, std::size_t{100'000'000}))
        ->capture_default_str();
    lfo_cmd->add_option("--out", lfo.out, "Output path, '-' for stdout")->required();
    lfo_cmd->add_option("--format", lfo.format)->check(CLI::IsMember({"csv", "bin"}))->capture_default_str();
    lfo_cmd->add_option("--pulse-period", lfo.pulse_period, "Pulse input every N ticks (0 = off)");
    lfo_cmd->add_option("--pulse-amplitude", lfo.pulse_amplitude)->capture_default_str();

    ArpFlags arp;
    auto* arp_cmd = app.add_subcommand("arp-render", "Render an arpeggio");
    add_network_flags(arp_cmd, arp.net);
    arp_cmd->add_option("--steps", arp.steps)
        ->check(CLI::Range(std::size_t{1}, std::size_t{100'000'000}))
        ->capture_default_str();
    arp_cmd->add_option("--notes", arp.notes, "Held MIDI pitches, comma separated")->required();
    arp_cmd->add_option("--beta", arp.beta, "Confidence")->check(CLI::Range(0.0, remi::max_beta))->capture_default_str();
    arp_cmd->add_option("--rng-seed", arp.rng_seed)->capture_default_str();
    arp_cmd->add_option("--max-keys", arp.max_keys)
        ->check(CLI::Range(std::size_t{1}, std::size_t{128}))
        ->capture_default_str();
    arp_cmd->add_option("--velocity", arp.velocity)->check(CLI::Range(1, 127))->capture_default_str();
    arp_cmd->add_option("--gate", arp.gate)->check(CLI::Range(std::numeric_limits<double>::min(), 1.0))->capture_default_str();
    arp_cmd->add_option("--steps-per-beat", arp.steps_per_beat)->check(CLI::Range(1, 960))->capture_default_str();
    arp_cmd->add_option("--channel", arp.channel)->check(CLI::Range(0, 15))->capture_default_str();
    arp_cmd->add_option("--out", arp.out, "Output path, '-' for stdout")->required();
    arp_cmd->add_option("--format", arp.format)->check(CLI::IsMember({"json", "smf"}))->capture_default_str();

    InspectFlags inspect;
    auto* inspect_cmd = app.add_subcommand("inspect", "Print a network report as JSON");
    add_network_flags(inspect_cmd, inspect.net);
    inspect_cmd->add_option("--mode", inspect.mode)->check(CLI::IsMember({"lfo", "arp"}))->capture_default_str();
    inspect_cmd->add_option("--max-keys", inspect.max_keys)
        ->check(CLI::Range(std::size_t{1}, std::size_t{128}))
        ->capture_default_str();

    ServeFlags serve;
    auto* serve_cmd = app.add_subcommand("serve", "Run the live control service");
    add_network_flags(serve_cmd, serve.net);
    serve_cmd->add_option("--bind", serve.bind)->capture_default_str();
    serve_cmd->add_option("--port", serve.port)->capture_default_str();
    serve_cmd->add_flag("--manual-clock", serve.manual_clock, "Tick only on step messages");
    serve_cmd->add_option("--mode", serve.mode)->check(CLI::IsMember({"lfo", "arp"}))->capture_default_str();
    serve_cmd->add_option("--tick-rate", serve.tick_rate)
        ->check(CLI::Range(1e-3, remi::protocol::max_tick_rate_hz))
        ->capture_default_str();
    serve_cmd->add_option("--beta", serve.beta)->check(CLI::Range(0.0, remi::max_beta))->capture_default_str();
    serve_cmd->add_option("--rng-seed", serve.rng_seed)->capture_default_str();
    serve_cmd->add_option("--max-keys", serve.max_keys)
        ->check(CLI::Range(std::size_t{1}, std::size_t{128}))
        ->capture_default_str();
    serve_cmd->add_option("--session-log", serve.session_log, "Write the replay log here on shutdown");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    configure_logging(serve_cmd->parsed());
    try {
        if (lfo_cmd->parsed())
            return run_lfo_render(lfo);
        if (arp_cmd->parsed())
            return run_arp_render(arp);
        if (inspect_cmd->parsed())
            return run_inspect(inspect);
        return run_serve(serve);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const remi::InvalidConfig& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const remi::InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_io;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_io;
    }
}
