#include "remi/viz.hpp"

#include "remi/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace remi {

PcaResult pca_project(const StateHistory& history, std::size_t k) {
    const auto t_rows = static_cast<std::size_t>(history.rows.rows());
    const auto n_cols = static_cast<std::size_t>(history.rows.cols());
    if (t_rows < 2)
        throw InvalidArgument("PCA needs at least two history rows");
    if (k == 0 || k > std::min(t_rows, n_cols))
        throw InvalidArgument("k must be in [1, min(T, N)]");
    if (!history.labels.empty() && history.labels.size() != t_rows)
        throw InvalidArgument("label count does not match history rows");

    const auto kk = static_cast<Eigen::Index>(k);
    const Eigen::RowVectorXd mean = history.rows.colwise().mean();
    const Matrix centered = history.rows.rowwise() - mean;

    PcaResult out;
    const double scale = std::max(1.0, history.rows.cwiseAbs().maxCoeff());
    if (centered.cwiseAbs().maxCoeff() <= 1e-12 * scale) {
        out.degenerate = true;
        out.components = Matrix::Identity(kk, static_cast<Eigen::Index>(n_cols));
        out.projected = Matrix::Zero(static_cast<Eigen::Index>(t_rows), kk);
        out.explained_variance_ratio.assign(k, 0.0);
        return out;
    }

    Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
    const Vector& sigma = svd.singularValues();
    const double total = sigma.squaredNorm();

    out.components = svd.matrixV().leftCols(kk).transpose();
    for (Eigen::Index c = 0; c < kk; ++c) {
        Eigen::Index at;
        out.components.row(c).cwiseAbs().maxCoeff(&at);
        if (out.components(c, at) < 0.0)
            out.components.row(c) *= -1.0;
        out.explained_variance_ratio.push_back(sigma(c) * sigma(c) / total);
    }
    out.projected = centered * out.components.transpose();
    return out;
}

Vector activity_frame(const ReservoirState& state) { return state.s; }

ConnectivityGraph connectivity_graph(const Network& net, const ReservoirState& state, double threshold) {
    const Matrix& w = net.effective().w;
    ConnectivityGraph g;
    g.vertices.reserve(net.neurons());
    for (std::size_t i = 0; i < net.neurons(); ++i) {
        const double a = state.s.size() > 0 ? std::abs(state.s(static_cast<Eigen::Index>(i))) : 0.0;
        g.vertices.push_back({i, a});
    }
    for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index j = 0; j < w.cols(); ++j)
            if (std::abs(w(i, j)) > threshold)
                g.edges.push_back({static_cast<std::size_t>(j), static_cast<std::size_t>(i), w(i, j)});
    return g;
}

double default_edge_threshold(const Network& net) {
    const Matrix& w = net.effective().w;
    std::vector<double> mags;
    mags.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index i = 0; i < w.size(); ++i)
        if (w.data()[i] != 0.0)
            mags.push_back(std::abs(w.data()[i]));
    if (mags.empty())
        return 0.0;
    // Nearest-rank percentile.
    const auto rank = static_cast<std::size_t>(std::ceil(0.8 * static_cast<double>(mags.size())));
    const std::size_t idx = rank == 0 ? 0 : rank - 1;
    std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(idx), mags.end());
    return mags[idx];
}

nlohmann::json to_json(const PcaResult& pca, const std::vector<std::optional<std::size_t>>& labels) {
    nlohmann::json j;
    auto points = nlohmann::json::array();
    for (Eigen::Index r = 0; r < pca.projected.rows(); ++r) {
        auto p = nlohmann::json::array();
        for (Eigen::Index c = 0; c < pca.projected.cols(); ++c)
            p.push_back(pca.projected(r, c));
        points.push_back(std::move(p));
    }
    auto comps = nlohmann::json::array();
    for (Eigen::Index r = 0; r < pca.components.rows(); ++r) {
        auto row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < pca.components.cols(); ++c)
            row.push_back(pca.components(r, c));
        comps.push_back(std::move(row));
    }
    auto labs = nlohmann::json::array();
    for (const auto& l : labels)
        labs.push_back(l ? nlohmann::json(*l) : nlohmann::json(nullptr));
    j["points"] = std::move(points);
    j["labels"] = std::move(labs);
    j["components"] = std::move(comps);
    j["explained_variance_ratio"] = pca.explained_variance_ratio;
    j["degenerate"] = pca.degenerate;
    return j;
}

nlohmann::json to_json(const ConnectivityGraph& graph) {
    auto vertices = nlohmann::json::array();
    for (const auto& v : graph.vertices)
        vertices.push_back({{"id", v.id}, {"activity", v.activity}});
    auto edges = nlohmann::json::array();
    for (const auto& e : graph.edges)
        edges.push_back({{"from", e.from}, {"to", e.to}, {"weight", e.weight}});
    return {{"vertices", std::move(vertices)}, {"edges", std::move(edges)}};
}

nlohmann::json activity_to_json(const Vector& activity) {
    return std::vector<double>(activity.data(), activity.data() + activity.size());
}

void write_pca_csv(std::ostream& out, const PcaResult& pca, const std::vector<std::optional<std::size_t>>& labels) {
    for (Eigen::Index c = 0; c < pca.projected.cols(); ++c)
        out << "pc" << (c + 1) << ',';
    out << "label\n";
    for (Eigen::Index r = 0; r < pca.projected.rows(); ++r) {
        for (Eigen::Index c = 0; c < pca.projected.cols(); ++c)
            out << fmt::format("{:.17g},", pca.projected(r, c));
        const auto row = static_cast<std::size_t>(r);
        if (row < labels.size() && labels[row])
            out << *labels[row];
        out << '\n';
    }
}

void write_activity_csv(std::ostream& out, const Vector& activity) {
    out << "neuron,activity\n";
    for (Eigen::Index i = 0; i < activity.size(); ++i)
        out << fmt::format("{},{:.17g}\n", i, activity(i));
}

void write_graph_csv(std::ostream& out, const ConnectivityGraph& graph) {
    out << "from,to,weight\n";
    for (const auto& e : graph.edges)
        out << fmt::format("{},{},{:.17g}\n", e.from, e.to, e.weight);
}

} // namespace remi
