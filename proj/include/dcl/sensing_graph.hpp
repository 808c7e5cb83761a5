#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dcl/error.hpp"
#include "dcl/geometry.hpp"

namespace dcl {

/// Undirected edge stored with first < second.
struct Edge {
    NodeId first{0};
    NodeId second{0};

    friend constexpr bool operator==(const Edge&, const Edge&) = default;
    friend constexpr auto operator<=>(const Edge&, const Edge&) = default;
};

[[nodiscard]] constexpr Edge make_edge(NodeId a, NodeId b) noexcept {
    return a < b ? Edge{a, b} : Edge{b, a};
}

/// A shadow candidate for some node i: `target` is two hops away through `via`.
struct ShadowCandidate {
    NodeId target{0};
    NodeId via{0};

    friend constexpr bool operator==(const ShadowCandidate&, const ShadowCandidate&) = default;
    friend constexpr auto operator<=>(const ShadowCandidate&, const ShadowCandidate&) = default;
};

/// Immutable undirected sensing graph over nodes 0..n-1, optionally with one emitter
/// node that senses every other node.
class SensingGraph {
public:
    SensingGraph() = default;

    /// Builds a graph from an explicit edge list. Duplicate edges are merged.
    SensingGraph(std::size_t n, double radius, std::span<const Edge> edges,
                 std::optional<NodeId> emitter = std::nullopt)
        : n_(n), radius_(radius), adjacency_(n), emitter_(emitter) {
        for (const auto& e : edges) {
            check_id(e.first);
            check_id(e.second);
            if (e.first == e.second) throw InvalidInput("self-loop on node " + std::to_string(e.first));
            adjacency_[e.first].push_back(e.second);
            adjacency_[e.second].push_back(e.first);
        }
        if (emitter_) check_id(*emitter_);
        for (auto& row : adjacency_) {
            std::sort(row.begin(), row.end());
            row.erase(std::unique(row.begin(), row.end()), row.end());
        }
        for (NodeId i = 0; i < n_; ++i) {
            for (NodeId j : adjacency_[i]) {
                if (i < j) edges_.push_back({i, j});
            }
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] double radius() const noexcept { return radius_; }
    [[nodiscard]] std::optional<NodeId> emitter() const noexcept { return emitter_; }
    [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }

    [[nodiscard]] std::span<const NodeId> neighbors(NodeId i) const {
        check_id(i);
        return adjacency_[i];
    }

    [[nodiscard]] std::size_t degree(NodeId i) const { return neighbors(i).size(); }

    [[nodiscard]] bool has_edge(NodeId i, NodeId j) const {
        const auto row = neighbors(i);
        check_id(j);
        return std::binary_search(row.begin(), row.end(), j);
    }

    /// Position of edge (i,j) in edges(), used to index per-edge data.
    [[nodiscard]] std::optional<std::size_t> edge_index(NodeId i, NodeId j) const {
        if (i >= n_ || j >= n_) return std::nullopt;
        const Edge e = make_edge(i, j);
        const auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
        if (it == edges_.end() || *it != e) return std::nullopt;
        return static_cast<std::size_t>(it - edges_.begin());
    }

    void check_id(NodeId i) const {
        if (i >= n_) {
            throw InvalidInput("node id " + std::to_string(i) + " out of range for graph of size " +
                               std::to_string(n_));
        }
    }

private:
    std::size_t n_{0};
    double radius_{0.0};
    std::vector<std::vector<NodeId>> adjacency_;
    std::vector<Edge> edges_;
    std::optional<NodeId> emitter_;
};

/// Unit-disk rule: an edge joins every pair at distance <= radius.
[[nodiscard]] inline SensingGraph unit_disk_graph(std::span<const Position> positions, double radius) {
    if (positions.empty()) throw InvalidInput("unit_disk_graph: no positions");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidInput("unit_disk_graph: radius must be positive");
    require_finite(positions, "unit_disk_graph");
    std::vector<Edge> edges;
    for (NodeId i = 0; i < positions.size(); ++i) {
        for (NodeId j = i + 1; j < positions.size(); ++j) {
            if (distance(positions[i], positions[j]) <= radius) edges.push_back({i, j});
        }
    }
    return SensingGraph(positions.size(), radius, edges);
}

[[nodiscard]] inline std::vector<NodeId> neighbors(const SensingGraph& graph, NodeId i) {
    const auto row = graph.neighbors(i);
    return {row.begin(), row.end()};
}

/// All (k, via j) with j in N(i), k in N(j), k not in N(i) and k != i. One entry per path.
[[nodiscard]] inline std::vector<ShadowCandidate> two_hop_shadow_candidates(const SensingGraph& graph, NodeId i) {
    std::vector<ShadowCandidate> out;
    for (NodeId j : graph.neighbors(i)) {
        for (NodeId k : graph.neighbors(j)) {
            if (k == i || graph.has_edge(i, k)) continue;
            out.push_back({k, j});
        }
    }
    return out;
}

enum class LogBase { Ten, Natural };

/// Radius above which a unit-disk graph on n uniform points in the unit square is
/// generically globally rigid with high probability: 2*sqrt(2)*sqrt(log(n)/n).
[[nodiscard]] inline double ggr_radius_threshold(std::size_t n, LogBase base = LogBase::Ten) {
    if (n < 2) throw InvalidInput("ggr_radius_threshold: n must be at least 2");
    const double nn = static_cast<double>(n);
    const double lg = base == LogBase::Ten ? std::log10(nn) : std::log(nn);
    return 2.0 * std::sqrt(2.0) * std::sqrt(lg / nn);
}

/// Adds an edge from `e` to every other node and records `e` as the emitter.
[[nodiscard]] inline SensingGraph augment_with_emitter(const SensingGraph& graph, NodeId e) {
    graph.check_id(e);
    std::vector<Edge> edges = graph.edges();
    for (NodeId i = 0; i < graph.size(); ++i) {
        if (i != e) edges.push_back(make_edge(i, e));
    }
    return SensingGraph(graph.size(), graph.radius(), edges, e);
}

[[nodiscard]] inline bool is_connected(const SensingGraph& graph) {
    const std::size_t n = graph.size();
    if (n <= 1) return true;
    std::vector<bool> seen(n, false);
    std::vector<NodeId> stack{0};
    seen[0] = true;
    std::size_t visited = 1;
    while (!stack.empty()) {
        const NodeId u = stack.back();
        stack.pop_back();
        for (NodeId v : graph.neighbors(u)) {
            if (!seen[v]) {
                seen[v] = true;
                ++visited;
                stack.push_back(v);
            }
        }
    }
    return visited == n;
}

}  // namespace dcl
