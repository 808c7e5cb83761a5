#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dcl/error.hpp"
#include "dcl/geometry.hpp"
#include "dcl/sensing_graph.hpp"

namespace dcl {

/// Additive zero-mean Gaussian range noise.
struct NoiseModel {
    double sigma{0.0};
    std::uint64_t seed{0};
};

/// Seeds an engine from a list of 64-bit words so independent streams
/// (init, noise, layout) can be derived from one experiment seed.
[[nodiscard]] inline std::mt19937_64 make_engine(std::initializer_list<std::uint64_t> words) {
    std::vector<std::uint32_t> parts;
    parts.reserve(words.size() * 2);
    for (auto w : words) {
        parts.push_back(static_cast<std::uint32_t>(w & 0xffffffffu));
        parts.push_back(static_cast<std::uint32_t>(w >> 32));
    }
    std::seed_seq seq(parts.begin(), parts.end());
    return std::mt19937_64(seq);
}

namespace stream {
inline constexpr std::uint64_t kNoise = 0x6e6f697365ULL;
inline constexpr std::uint64_t kInit = 0x696e6974ULL;
inline constexpr std::uint64_t kLayout = 0x6c61796f7574ULL;
}  // namespace stream

/// One range reading z per undirected sensing edge for a single round.
class RangeMeasurementSet {
public:
    RangeMeasurementSet() = default;
    RangeMeasurementSet(std::vector<Edge> edges, std::vector<double> values)
        : edges_(std::move(edges)), values_(std::move(values)) {
        if (edges_.size() != values_.size()) throw InvalidInput("RangeMeasurementSet: size mismatch");
        if (!std::is_sorted(edges_.begin(), edges_.end())) throw InvalidInput("RangeMeasurementSet: edges unsorted");
        for (double v : values_) {
            if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidInput("RangeMeasurementSet: negative or non-finite reading");
        }
    }

    [[nodiscard]] std::optional<double> find(NodeId i, NodeId j) const {
        const Edge e = make_edge(i, j);
        const auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
        if (it == edges_.end() || *it != e) return std::nullopt;
        return values_[static_cast<std::size_t>(it - edges_.begin())];
    }

    [[nodiscard]] double at(NodeId i, NodeId j) const {
        if (auto z = find(i, j)) return *z;
        throw InvalidInput("no range measurement for edge (" + std::to_string(i) + "," + std::to_string(j) + ")");
    }

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

    friend bool operator==(const RangeMeasurementSet&, const RangeMeasurementSet&) = default;

private:
    std::vector<Edge> edges_;
    std::vector<double> values_;
};

/// Draws z_ij = max(0, |p_i - p_j| + g), g ~ N(0, sigma^2), independently per edge.
/// The stream is a pure function of (noise.seed, round).
[[nodiscard]] inline RangeMeasurementSet sample_measurements(const SensingGraph& graph, std::span<const Position> truth,
                                                             const NoiseModel& noise, std::uint64_t round) {
    if (truth.size() != graph.size()) {
        throw InvalidInput("sample_measurements: expected " + std::to_string(graph.size()) + " positions, got " +
                           std::to_string(truth.size()));
    }
    if (!(noise.sigma >= 0.0) || !std::isfinite(noise.sigma)) throw InvalidInput("sample_measurements: sigma must be >= 0");
    require_finite(truth, "sample_measurements");

    const auto& edges = graph.edges();
    std::vector<double> values;
    values.reserve(edges.size());
    if (noise.sigma == 0.0) {
        for (const auto& e : edges) values.push_back(distance(truth[e.first], truth[e.second]));
    } else {
        auto engine = make_engine({stream::kNoise, noise.seed, round});
        std::normal_distribution<double> gauss(0.0, noise.sigma);
        for (const auto& e : edges) {
            values.push_back(std::max(0.0, distance(truth[e.first], truth[e.second]) + gauss(engine)));
        }
    }
    return RangeMeasurementSet(edges, std::move(values));
}

/// Bounds on the distance between two nodes joined through a common neighbour.
struct ShadowBounds {
    double lower{0.0};
    double upper{0.0};
};

inline void require_non_negative(double v, const char* what) {
    if (!(v >= 0.0)) throw InvalidInput(std::string(what) + ": negative or NaN length");
}

/// lower = sqrt(d_ij^2 + d_jk^2) (right angle at j), upper = d_ij + d_jk (collinear).
[[nodiscard]] inline ShadowBounds s1_bounds(double d_ij, double d_jk) {
    require_non_negative(d_ij, "s1_bounds");
    require_non_negative(d_jk, "s1_bounds");
    return {std::hypot(d_ij, d_jk), d_ij + d_jk};
}

/// Virtual range for a shadow edge: midpoint of the two bounds built from measured ranges.
[[nodiscard]] inline double s1_estimate(double z_ij, double z_jk) {
    const ShadowBounds b = s1_bounds(z_ij, z_jk);
    return 0.5 * (b.upper + b.lower);
}

/// Inconsistency between estimated squared separation and squared reading.
/// Positive when the estimates sit farther apart than measured.
[[nodiscard]] constexpr double inconsistency(const Position& xi, const Position& xj, double z) noexcept {
    return squared_distance(xi, xj) - z * z;
}

}  // namespace dcl
