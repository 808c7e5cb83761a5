#pragma once

#include <cmath>
#include <span>
#include <string>

#include "dcl/error.hpp"
#include "dcl/geometry.hpp"

namespace dcl {

/// Accumulated localization error: sum over ordered pairs (i != j) of
/// | |x_i - x_j| - |xhat_i - xhat_j| |. Every unordered pair counts twice.
[[nodiscard]] inline double ale(std::span<const Position> truth, std::span<const Position> estimates) {
    if (truth.size() != estimates.size()) {
        throw InvalidInput("ale: " + std::to_string(truth.size()) + " truth positions vs " +
                           std::to_string(estimates.size()) + " estimates");
    }
    if (truth.size() < 2) throw InvalidInput("ale: need at least two nodes");
    double sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        for (std::size_t j = i + 1; j < truth.size(); ++j) {
            sum += std::abs(distance(truth[i], truth[j]) - distance(estimates[i], estimates[j]));
        }
    }
    return 2.0 * sum;
}

}  // namespace dcl
