#pragma once

// Data behind the arpeggiator views: PCA of the state trajectory, the raw
// activity frame, and the weighted recurrent graph.

#include "remi/reservoir.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

namespace remi {

struct StateHistory {
    Matrix rows;                                // T x N, one s_t per row
    std::vector<std::optional<std::size_t>> labels; // empty, or one note index per row
};

struct PcaResult {
    Matrix components; // k x N, orthonormal rows
    Matrix projected;  // T x k
    std::vector<double> explained_variance_ratio;
    bool degenerate = false; // zero-variance input; components are then the first k unit vectors
};

/// Top-k principal directions of the mean-centred history via SVD. Each
/// component's largest-magnitude entry is made positive. Throws
/// InvalidArgument when T < 2, k = 0 or k > min(T, N).
PcaResult pca_project(const StateHistory& history, std::size_t k = 2);

/// s, verbatim.
Vector activity_frame(const ReservoirState& state);

struct GraphVertex {
    std::size_t id;
    double activity;
};

struct GraphEdge {
    std::size_t from; // presynaptic neuron j
    std::size_t to;   // postsynaptic neuron i
    double weight;    // effective W(i, j)
};

struct ConnectivityGraph {
    std::vector<GraphVertex> vertices;
    std::vector<GraphEdge> edges;
};

/// Edges for every |W_eff(i, j)| > threshold, vertices sized by |s_i|.
ConnectivityGraph connectivity_graph(const Network& net, const ReservoirState& state,
                                     double threshold = std::numeric_limits<double>::infinity());

/// 80th percentile of |W_eff| over the nonzero entries (0 if there are none).
double default_edge_threshold(const Network& net);

nlohmann::json to_json(const PcaResult& pca, const std::vector<std::optional<std::size_t>>& labels = {});
nlohmann::json to_json(const ConnectivityGraph& graph);
nlohmann::json activity_to_json(const Vector& activity);

void write_pca_csv(std::ostream& out, const PcaResult& pca, const std::vector<std::optional<std::size_t>>& labels = {});
void write_activity_csv(std::ostream& out, const Vector& activity);
void write_graph_csv(std::ostream& out, const ConnectivityGraph& graph);

} // namespace remi
