#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "remi/arp.hpp"
#include "remi/engine.hpp"
#include "remi/error.hpp"
#include "remi/lfo.hpp"
#include "remi/midi.hpp"
#include "remi/protocol.hpp"
#include "remi/reservoir.hpp"
#include "remi/viz.hpp"

#include <sstream>

namespace py = pybind11;
using namespace remi;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

py::dict event_dict(const NoteEvent& e) {
    py::dict d;
    d["t"] = e.t;
    d["index"] = e.index;
    d["pitch"] = e.pitch;
    d["velocity"] = e.velocity;
    d["duration_steps"] = e.duration_steps;
    return d;
}

} // namespace

PYBIND11_MODULE(_remi, m) {
    m.doc() = "Fixed-weight reservoir LFO and arpeggiator engine";

    py::register_exception<InvalidConfig>(m, "InvalidConfig", PyExc_ValueError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<CapacityError>(m, "CapacityError", PyExc_ValueError);
    py::register_exception<ContractError>(m, "ContractError", PyExc_RuntimeError);
    py::register_exception<EngineFault>(m, "EngineFault", PyExc_RuntimeError);

    py::class_<NetworkConfig>(m, "NetworkConfig")
        .def(py::init<>())
        .def_readwrite("neurons", &NetworkConfig::neurons)
        .def_readwrite("input_dim", &NetworkConfig::input_dim)
        .def_readwrite("feedback_dim", &NetworkConfig::feedback_dim)
        .def_readwrite("output_dim", &NetworkConfig::output_dim)
        .def_readwrite("recurrent_density", &NetworkConfig::recurrent_density)
        .def_readwrite("seed", &NetworkConfig::seed);

    py::class_<Scales>(m, "Scales")
        .def(py::init<>())
        .def(py::init([](double input_scale, double spectral_radius, double feedback_scale, double bias_scale,
                         double leak_rate) {
                 return Scales{input_scale, spectral_radius, feedback_scale, bias_scale, leak_rate};
             }),
             py::arg("input_scale") = 0.0, py::arg("spectral_radius") = 0.95, py::arg("feedback_scale") = 1.0,
             py::arg("bias_scale") = 0.2, py::arg("leak_rate") = 0.1)
        .def_readwrite("input_scale", &Scales::input_scale)
        .def_readwrite("spectral_radius", &Scales::spectral_radius)
        .def_readwrite("feedback_scale", &Scales::feedback_scale)
        .def_readwrite("bias_scale", &Scales::bias_scale)
        .def_readwrite("leak_rate", &Scales::leak_rate)
        .def("__repr__", [](const Scales& s) {
            std::ostringstream os;
            os << "Scales(input_scale=" << s.input_scale << ", spectral_radius=" << s.spectral_radius
               << ", feedback_scale=" << s.feedback_scale << ", bias_scale=" << s.bias_scale
               << ", leak_rate=" << s.leak_rate << ")";
            return os.str();
        });

    m.def("lfo_network_config", &lfo_network_config, py::arg("neurons"), py::arg("seed"), py::arg("density") = 1.0);
    m.def("arp_network_config", &arp_network_config, py::arg("neurons"), py::arg("seed"), py::arg("max_keys") = 8,
          py::arg("density") = 1.0);

    py::class_<Network>(m, "Network")
        .def(py::init<const NetworkConfig&, const Scales&>(), py::arg("config"), py::arg("scales") = Scales{})
        .def_property_readonly("config", &Network::config)
        .def_property_readonly("scales", &Network::scales)
        .def_property_readonly("base_spectral_radius", &Network::base_spectral_radius)
        .def("set_scales", &Network::set_scales)
        .def("effective", [](const Network& n) {
            const WeightSet& w = n.effective();
            py::dict d;
            d["w_in"] = w.w_in;
            d["w"] = w.w;
            d["w_fb"] = w.w_fb;
            d["w_out"] = w.w_out;
            d["b"] = w.b;
            return d;
        }, "Effective weight arrays as a dict of numpy arrays.");

    m.def("estimate_spectral_radius",
          [](const Matrix& w) { return estimate_spectral_radius(w); }, py::arg("w"),
          "Largest |eigenvalue| by power iteration.");

    m.def("render_lfo",
          [](const NetworkConfig& c, const Scales& s, std::size_t steps) { return to_array(render_lfo(c, s, steps)); },
          py::arg("config"), py::arg("scales") = Scales{}, py::arg("steps") = 1024);
    m.def("dominant_period", [](const std::vector<double>& w) { return dominant_period(w); }, py::arg("waveform"));
    m.def("value_to_cc", &value_to_cc);

    m.def("softmax_confidence",
          [](const std::vector<double>& y, double beta) { return to_array(softmax_confidence(y, beta)); },
          py::arg("logits"), py::arg("beta"));

    m.def(
        "render_arp",
        [](const NetworkConfig& c, const Scales& s, const std::vector<int>& pitches, std::size_t steps, double beta,
           std::uint64_t rng_seed, int velocity, double gate) {
            ArpOptions opt{beta, rng_seed, velocity, gate};
            py::list out;
            for (const auto& e : render_arp(c, s, opt, pitches, steps))
                out.append(event_dict(e));
            return out;
        },
        py::arg("config"), py::arg("scales") = Scales{}, py::arg("pitches"), py::arg("steps") = 64,
        py::arg("beta") = 2.0, py::arg("rng_seed") = 0, py::arg("velocity") = 100, py::arg("gate") = 0.5);

    m.def(
        "arp_to_smf",
        [](const py::list& events, int steps_per_beat, int channel) {
            std::vector<NoteEvent> notes;
            for (const auto& item : events) {
                const auto d = item.cast<py::dict>();
                notes.push_back(NoteEvent{d["t"].cast<std::uint64_t>(), d["index"].cast<std::size_t>(),
                                          d["pitch"].cast<int>(), d["velocity"].cast<int>(),
                                          d["duration_steps"].cast<double>()});
            }
            const auto bytes = events_to_smf(notes, steps_per_beat, channel);
            return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        },
        py::arg("events"), py::arg("steps_per_beat") = 4, py::arg("channel") = 0);

    py::class_<PcaResult>(m, "PcaResult")
        .def_readonly("components", &PcaResult::components)
        .def_readonly("projected", &PcaResult::projected)
        .def_readonly("explained_variance_ratio", &PcaResult::explained_variance_ratio)
        .def_readonly("degenerate", &PcaResult::degenerate);
    m.def("pca_project", [](const Matrix& rows, std::size_t k) { return pca_project(StateHistory{rows, {}}, k); },
          py::arg("rows"), py::arg("k") = 2);

    m.def(
        "replay_session_log",
        [](const std::string& text) {
            std::istringstream in(text);
            const ReplayOutput out = replay(read_session_log(in));
            py::list events;
            for (const auto& e : out.arp_events)
                events.append(event_dict(e));
            return py::make_tuple(to_array(out.lfo_values), events);
        },
        py::arg("text"), "Re-runs a JSON-lines session log; returns (lfo_values, arp_events).");

    m.attr("schema_version") = protocol::schema_version;
    m.attr("max_beta") = max_beta;
}
