#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dcl/error.hpp"

namespace dcl {

using NodeId = std::size_t;

/// 2D point in the arena frame. Used for ground truth and for estimates alike.
struct Position {
    double x{0.0};
    double y{0.0};

    constexpr Position& operator+=(const Position& o) noexcept {
        x += o.x;
        y += o.y;
        return *this;
    }
    constexpr Position& operator-=(const Position& o) noexcept {
        x -= o.x;
        y -= o.y;
        return *this;
    }
    constexpr Position& operator*=(double s) noexcept {
        x *= s;
        y *= s;
        return *this;
    }

    friend constexpr Position operator+(Position a, const Position& b) noexcept { return a += b; }
    friend constexpr Position operator-(Position a, const Position& b) noexcept { return a -= b; }
    friend constexpr Position operator*(Position a, double s) noexcept { return a *= s; }
    friend constexpr Position operator*(double s, Position a) noexcept { return a *= s; }
    friend constexpr bool operator==(const Position&, const Position&) = default;

    [[nodiscard]] constexpr double squared_norm() const noexcept { return x * x + y * y; }
    [[nodiscard]] double norm() const noexcept { return std::hypot(x, y); }
    [[nodiscard]] bool finite() const noexcept { return std::isfinite(x) && std::isfinite(y); }
};

[[nodiscard]] inline double distance(const Position& a, const Position& b) noexcept {
    return (b - a).norm();
}

[[nodiscard]] constexpr double squared_distance(const Position& a, const Position& b) noexcept {
    return (b - a).squared_norm();
}

[[nodiscard]] inline Position centroid(std::span<const Position> points) {
    if (points.empty()) throw InvalidInput("centroid of an empty point set");
    Position c;
    for (const auto& p : points) c += p;
    return c * (1.0 / static_cast<double>(points.size()));
}

inline void require_finite(std::span<const Position> points, const char* what) {
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!points[i].finite()) {
            throw InvalidInput(std::string(what) + ": non-finite coordinate at index " + std::to_string(i));
        }
    }
}

/// Axis-aligned box used to draw random initial estimates.
struct BoundingBox {
    Position min{-0.5, -0.5};
    Position max{0.5, 0.5};

    [[nodiscard]] bool degenerate() const noexcept {
        return !min.finite() || !max.finite() || !(max.x > min.x) || !(max.y > min.y);
    }
    [[nodiscard]] bool contains(const Position& p) const noexcept {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
    }
};

}  // namespace dcl
