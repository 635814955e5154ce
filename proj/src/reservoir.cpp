#include "remi/reservoir.hpp"

#include "remi/error.hpp"
#include "remi/rng.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace remi {

namespace {

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

// Row-major fill so the draw order does not depend on Eigen's storage order.
Matrix draw_uniform(std::uint64_t seed, std::string_view label, std::size_t rows, std::size_t cols) {
    Rng rng(seed, label);
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            m(i, j) = rng.uniform(-1.0, 1.0);
    return m;
}

WeightSet draw_base(const NetworkConfig& config) {
    const auto n = config.neurons;
    WeightSet base;
    base.w_in = draw_uniform(config.seed, "w_in", n, config.input_dim);
    base.w = draw_uniform(config.seed, "w", n, n);
    base.w_fb = draw_uniform(config.seed, "w_fb", n, config.feedback_dim);
    base.w_out = draw_uniform(config.seed, "w_out", config.output_dim, n);
    base.b = draw_uniform(config.seed, "b", n, 1).col(0);

    // The sparsity mask has its own substream: changing the density never
    // changes the values of the surviving entries.
    Rng mask(config.seed, "w_mask");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (!(mask.uniform01() < config.recurrent_density))
                base.w(i, j) = 0.0;
    return base;
}

double growth_estimate(const std::vector<double>& log_growth) {
    const std::size_t k = log_growth.size();
    const std::size_t half = k / 2;
    double sum = 0.0;
    for (std::size_t i = half; i < k; ++i)
        sum += log_growth[i];
    return std::exp(sum / static_cast<double>(k - half));
}

// Returns false when the iterate is annihilated (nilpotent direction).
bool power_run(const Matrix& m, Vector v, int min_it, int max_it, double rel_tol, double& out) {
    v /= v.norm();
    std::vector<double> log_growth;
    log_growth.reserve(static_cast<std::size_t>(max_it));
    double previous = 0.0;
    for (int it = 0; it < max_it; ++it) {
        Vector w = m * v;
        const double norm = w.norm();
        if (norm == 0.0 || !std::isfinite(norm))
            return false;
        log_growth.push_back(std::log(norm));
        v = w / norm;
        const double estimate = growth_estimate(log_growth);
        if (it + 1 >= min_it && std::abs(estimate - previous) <= rel_tol * estimate) {
            out = estimate;
            return true;
        }
        previous = estimate;
    }
    out = growth_estimate(log_growth);
    return true;
}

void check_dims(const NetworkConfig& c, const WeightSet& w) {
    const auto n = static_cast<Eigen::Index>(c.neurons);
    const bool ok = w.w_in.rows() == n && w.w_in.cols() == static_cast<Eigen::Index>(c.input_dim) &&
                    w.w.rows() == n && w.w.cols() == n && w.w_fb.rows() == n &&
                    w.w_fb.cols() == static_cast<Eigen::Index>(c.feedback_dim) &&
                    w.w_out.rows() == static_cast<Eigen::Index>(c.output_dim) && w.w_out.cols() == n &&
                    w.b.size() == n;
    if (!ok)
        throw InvalidConfig("weight dimensions do not match network config");
}

void require_finite(const Vector& v, const char* what) {
    if (!v.allFinite())
        throw ContractError(std::string(what) + " contains non-finite values");
}

} // namespace

void NetworkConfig::validate() const {
    if (neurons == 0)
        throw InvalidConfig("neurons must be >= 1");
    if (output_dim == 0)
        throw InvalidConfig("output_dim must be >= 1");
    if (feedback_dim == 0)
        throw InvalidConfig("feedback_dim must be >= 1");
    if (!(recurrent_density > 0.0 && recurrent_density <= 1.0))
        throw InvalidConfig("recurrent_density must be in (0, 1]");
}

void Scales::validate() const {
    if (!finite_nonneg(input_scale) || !finite_nonneg(spectral_radius) || !finite_nonneg(feedback_scale) ||
        !finite_nonneg(bias_scale))
        throw InvalidConfig("scale factors must be finite and >= 0");
    if (!(leak_rate >= 0.0 && leak_rate <= 1.0))
        throw InvalidConfig("leak_rate must be in [0, 1]");
}

double estimate_spectral_radius(const Matrix& m, int min_iterations, int max_iterations, double rel_tol) {
    if (m.rows() != m.cols())
        throw ContractError("spectral radius of a non-square matrix");
    if (m.size() == 0 || m.isZero(0.0))
        return 0.0;
    double radius = 0.0;
    if (power_run(m, Vector::Ones(m.rows()), min_iterations, max_iterations, rel_tol, radius))
        return radius;
    // All-ones was annihilated; retry from a start vector with no sign structure.
    Vector alt(m.rows());
    for (Eigen::Index i = 0; i < alt.size(); ++i)
        alt(i) = (i % 2 == 0 ? 1.0 : -1.0) / static_cast<double>(i + 1);
    if (power_run(m, alt, min_iterations, max_iterations, rel_tol, radius))
        return radius;
    return 0.0;
}

WeightSet scale_weights(const WeightSet& base, double base_radius, const Scales& scales) {
    WeightSet eff;
    eff.w_in = scales.input_scale * base.w_in;
    if (base_radius > 0.0)
        eff.w = (scales.spectral_radius / base_radius) * base.w;
    else
        eff.w = Matrix::Zero(base.w.rows(), base.w.cols());
    eff.w_fb = scales.feedback_scale * base.w_fb;
    eff.w_out = base.w_out;
    eff.b = scales.bias_scale * base.b;
    return eff;
}

Network::Network(const NetworkConfig& config, const Scales& scales) : config_(config), scales_(scales) {
    config_.validate();
    scales_.validate();
    base_ = draw_base(config_);
    base_radius_ = estimate_spectral_radius(base_.w);
    effective_ = scale_weights(base_, base_radius_, scales_);
}

Network::Network(const NetworkConfig& config, WeightSet base, const Scales& scales)
    : config_(config), scales_(scales), base_(std::move(base)) {
    config_.validate();
    scales_.validate();
    check_dims(config_, base_);
    base_radius_ = estimate_spectral_radius(base_.w);
    effective_ = scale_weights(base_, base_radius_, scales_);
}

void Network::set_scales(const Scales& scales) {
    scales.validate();
    scales_ = scales;
    effective_ = scale_weights(base_, base_radius_, scales_);
}

Network init_network(const NetworkConfig& config, const Scales& scales) { return Network(config, scales); }

WeightSet effective_matrices(const Network& net) {
    return scale_weights(net.base(), net.base_spectral_radius(), net.scales());
}

ReservoirState reset_state(const Network& net) {
    const auto n = static_cast<Eigen::Index>(net.neurons());
    return ReservoirState{Vector::Zero(n), Vector::Zero(n), 0};
}

void step_in_place(const Network& net, ReservoirState& state, const Vector& x, const Vector& y_fb, Vector& y) {
    const auto& c = net.config();
    const auto& w = net.effective();
    if (x.size() != static_cast<Eigen::Index>(c.input_dim))
        throw ContractError("input vector has wrong dimension");
    if (y_fb.size() != static_cast<Eigen::Index>(c.feedback_dim))
        throw ContractError("feedback vector has wrong dimension");
    if (state.s.size() != static_cast<Eigen::Index>(c.neurons))
        throw ContractError("state vector has wrong dimension");
    require_finite(x, "input");
    require_finite(y_fb, "feedback");
    require_finite(state.s, "state");

    // The recurrence reads s_{t-1}, not h_{t-1}.
    Vector pre = w.w * state.s + w.b;
    if (c.input_dim > 0)
        pre.noalias() += w.w_in * x;
    pre.noalias() += w.w_fb * y_fb;
    state.h = pre.unaryExpr([](double v) { return std::tanh(v); });

    const double a = net.scales().leak_rate;
    state.s = (1.0 - a) * state.s + a * state.h;
    y = w.w_out * state.s;
    ++state.t;
}

StepResult step(const Network& net, const ReservoirState& state, const Vector& x, const Vector& y_fb) {
    StepResult out{state, Vector{}};
    step_in_place(net, out.state, x, y_fb, out.y);
    return out;
}

Network reseed(const Network& net, std::uint64_t new_seed, std::size_t new_neurons) {
    NetworkConfig config = net.config();
    config.seed = new_seed;
    config.neurons = new_neurons;
    return Network(config, net.scales());
}

} // namespace remi
