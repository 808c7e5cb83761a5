#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dcl/error.hpp"
#include "dcl/geometry.hpp"
#include "dcl/measurement.hpp"

namespace dcl {

/// sqrt(n) x sqrt(n) grid spanning the unit square centred at the origin, row-major
/// from the (-0.5, -0.5) corner.
[[nodiscard]] inline std::vector<Position> generate_square_lattice(std::size_t n) {
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
    if (side * side != n || side < 2) {
        throw InvalidInput("generate_square_lattice: n must be a perfect square >= 4, got " + std::to_string(n));
    }
    const double spacing = 1.0 / static_cast<double>(side - 1);
    std::vector<Position> out;
    out.reserve(n);
    for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t c = 0; c < side; ++c) {
            out.push_back({static_cast<double>(c) * spacing - 0.5, static_cast<double>(r) * spacing - 0.5});
        }
    }
    return out;
}

/// Uniform points in the unit square, each redrawn until it keeps `min_separation`
/// from all earlier points.
[[nodiscard]] inline std::vector<Position> generate_random_config(std::size_t n, std::uint64_t seed, double min_separation,
                                                                  std::size_t attempts_per_point = 10000) {
    if (n < 2) throw InvalidInput("generate_random_config: n must be >= 2");
    if (!(min_separation >= 0.0)) throw InvalidInput("generate_random_config: min_separation must be >= 0");
    auto engine = make_engine({stream::kLayout, seed});
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    std::vector<Position> out;
    out.reserve(n);
    while (out.size() < n) {
        bool placed = false;
        for (std::size_t attempt = 0; attempt < attempts_per_point && !placed; ++attempt) {
            const double x = u(engine);
            const Position p{x, u(engine)};
            bool ok = true;
            for (const auto& q : out) {
                if (distance(p, q) < min_separation) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                out.push_back(p);
                placed = true;
            }
        }
        if (!placed) {
            throw InvalidInput("generate_random_config: could not place " + std::to_string(n) +
                               " points with separation " + std::to_string(min_separation));
        }
    }
    return out;
}

/// Node farthest from the formation centroid (lowest id on ties).
[[nodiscard]] inline NodeId outermost_node(std::span<const Position> positions) {
    const Position c = centroid(positions);
    NodeId best = 0;
    double best_d = -1.0;
    for (NodeId i = 0; i < positions.size(); ++i) {
        const double d = distance(positions[i], c);
        if (d > best_d + 1e-12) {
            best = i;
            best_d = d;
        }
    }
    return best;
}

/// Moves node `e` to `offset` from the formation centroid along the ray through its
/// current position.
inline void relocate_emitter(std::vector<Position>& positions, NodeId e, double offset) {
    if (e >= positions.size()) throw InvalidInput("relocate_emitter: bad node id");
    if (!(offset >= 0.0)) throw InvalidInput("relocate_emitter: offset must be >= 0");
    const Position c = centroid(positions);
    const Position d = positions[e] - c;
    const double len = d.norm();
    if (len == 0.0) throw InvalidInput("relocate_emitter: emitter sits at the centroid, direction undefined");
    positions[e] = c + d * (offset / len);
}

}  // namespace dcl
