#pragma once

// Fixed-weight echo state network: construction, live rescaling, stepping.
//
//   h_t = tanh(W_in x_t + W s_{t-1} + W_fb y'_{t-1} + b)
//   s_t = (1 - a) s_{t-1} + a h_t
//   y_t = W_out s_t
//
// All weights are drawn once from the seed and never trained. The user-facing
// knobs are multiplicative scales applied to the immutable base matrices.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>

namespace remi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct NetworkConfig {
    std::size_t neurons = 100;
    std::size_t input_dim = 1;
    std::size_t feedback_dim = 1;
    std::size_t output_dim = 1;
    double recurrent_density = 1.0;
    std::uint64_t seed = 1;

    /// Throws InvalidConfig.
    void validate() const;

    friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

struct Scales {
    double input_scale = 0.0;
    double spectral_radius = 0.95;
    double feedback_scale = 1.0;
    double bias_scale = 0.2;
    double leak_rate = 0.1;

    /// Throws InvalidConfig when a scale is negative or non-finite, or leak_rate is outside [0, 1].
    void validate() const;

    friend bool operator==(const Scales&, const Scales&) = default;
};

/// The five weight arrays of a network. Used both for the immutable base draw
/// and for the scaled copies the step function actually multiplies with.
struct WeightSet {
    Matrix w_in;  // neurons x input_dim
    Matrix w;     // neurons x neurons
    Matrix w_fb;  // neurons x feedback_dim
    Matrix w_out; // output_dim x neurons
    Vector b;     // neurons
};

/// Largest |eigenvalue| of a square matrix, by normalized power iteration.
///
/// Starts from the all-ones vector and reports the geometric mean of the
/// per-iteration growth factors over the second half of the run. Averaging
/// the growth makes the estimate converge when the dominant eigenvalue is a
/// complex pair or a +/- real pair, where the Rayleigh quotient oscillates.
/// Runs at least `min_iterations` and stops once the estimate moves by less
/// than `rel_tol`, or after `max_iterations`.
double estimate_spectral_radius(const Matrix& m, int min_iterations = 200, int max_iterations = 1000,
                                double rel_tol = 1e-9);

/// Scaled weights for a given base and scale setting. Pure; the recurrent
/// matrix is rescaled so its spectral radius equals `scales.spectral_radius`
/// (zero when `base_radius` is zero). W_out is never scaled.
WeightSet scale_weights(const WeightSet& base, double base_radius, const Scales& scales);

class Network {
  public:
    /// Draws every base matrix from `config.seed`. Throws InvalidConfig.
    explicit Network(const NetworkConfig& config, const Scales& scales = {});

    /// Wraps hand-set base matrices (tests, oracles). Dimensions must agree with `config`.
    Network(const NetworkConfig& config, WeightSet base, const Scales& scales);

    const NetworkConfig& config() const noexcept { return config_; }
    const Scales& scales() const noexcept { return scales_; }
    const WeightSet& base() const noexcept { return base_; }
    const WeightSet& effective() const noexcept { return effective_; }
    double base_spectral_radius() const noexcept { return base_radius_; }
    std::size_t neurons() const noexcept { return config_.neurons; }

    /// Replaces the scales and recomputes the effective weights from the base.
    void set_scales(const Scales& scales);

  private:
    NetworkConfig config_;
    Scales scales_;
    WeightSet base_;
    double base_radius_ = 0.0;
    WeightSet effective_;
};

struct ReservoirState {
    Vector s; // leaky-integrated state
    Vector h; // last tanh activation
    std::uint64_t t = 0;
};

struct StepResult {
    ReservoirState state;
    Vector y;
};

Network init_network(const NetworkConfig& config, const Scales& scales = {});

/// Copy of the effective weights (W_in, W, W_fb, W_out, b) for the network's current scales.
WeightSet effective_matrices(const Network& net);

ReservoirState reset_state(const Network& net);

/// One reservoir update. `x` must have input_dim entries and `y_fb` feedback_dim;
/// both and the incoming state must be finite. Throws ContractError otherwise.
StepResult step(const Network& net, const ReservoirState& state, const Vector& x, const Vector& y_fb);

/// In-place variant used by the engines' tick loops. `y` is resized to output_dim.
void step_in_place(const Network& net, ReservoirState& state, const Vector& x, const Vector& y_fb, Vector& y);

/// Same as init_network with the seed and neuron count replaced; scales carry over.
Network reseed(const Network& net, std::uint64_t new_seed, std::size_t new_neurons);

} // namespace remi
