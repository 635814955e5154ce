#pragma once

// Test-only reference implementations. None of this shares code with the
// library paths it checks.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace remi::testing {

using Rows = std::vector<std::vector<double>>;

/// Plain-loop echo state network with a logistic readout, for equation fidelity checks.
struct ScalarEsn {
    Rows w_in, w, w_fb, w_out;
    std::vector<double> b;
    double leak = 1.0;

    std::vector<double> s, h;

    void reset() {
        s.assign(w.size(), 0.0);
        h.assign(w.size(), 0.0);
    }

    /// One update; returns y.
    std::vector<double> step(const std::vector<double>& x, const std::vector<double>& fb) {
        const std::size_t n = w.size();
        std::vector<double> new_h(n);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = b[i];
            for (std::size_t j = 0; j < x.size(); ++j)
                acc += w_in[i][j] * x[j];
            for (std::size_t j = 0; j < n; ++j)
                acc += w[i][j] * s[j];
            for (std::size_t j = 0; j < fb.size(); ++j)
                acc += w_fb[i][j] * fb[j];
            new_h[i] = std::tanh(acc);
        }
        for (std::size_t i = 0; i < n; ++i)
            s[i] = (1.0 - leak) * s[i] + leak * new_h[i];
        h = new_h;
        std::vector<double> y(w_out.size(), 0.0);
        for (std::size_t r = 0; r < w_out.size(); ++r)
            for (std::size_t j = 0; j < n; ++j)
                y[r] += w_out[r][j] * s[j];
        return y;
    }
};

inline double logistic(double y) { return 1.0 / (1.0 + std::exp(-y)); }

inline Eigen::MatrixXd to_matrix(const Rows& rows) {
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = static_cast<Eigen::Index>(rows.empty() ? 0 : rows[0].size());
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j)
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

/// Spectral radius from a full (dense, non-symmetric) eigen-decomposition.
inline double eigensolver_radius(const Eigen::MatrixXd& m) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigensolver failed");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline std::vector<double> sine_wave(std::size_t n, double period, double amplitude = 1.0, double offset = 0.0) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = offset + amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / period);
    return v;
}

inline std::vector<double> square_wave(std::size_t n, std::size_t period) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = (i % period) < period / 2 ? 1.0 : 0.0;
    return v;
}

} // namespace remi::testing
