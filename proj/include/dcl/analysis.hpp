#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dcl/error.hpp"
#include "dcl/geometry.hpp"
#include "dcl/measurement.hpp"
#include "dcl/metrics.hpp"
#include "dcl/protocol.hpp"
#include "dcl/sensing_graph.hpp"

namespace dcl {

/// Noise terms entering the shadow-gain bounds.
struct NoiseEstimates {
    double eta{0.05};
    double epsilon{1e-6};
};

// ---------------------------------------------------------------------------
// Alignment and flip detection
// ---------------------------------------------------------------------------

/// Rigid map x -> rotation * x + translation taking estimates onto truth.
struct AlignmentResult {
    Eigen::Matrix2d rotation{Eigen::Matrix2d::Identity()};
    Position translation;
    bool reflected{false};
    std::vector<double> per_node_error;
    double rmse{0.0};

    [[nodiscard]] Position apply(const Position& p) const noexcept {
        return {rotation(0, 0) * p.x + rotation(0, 1) * p.y + translation.x,
                rotation(1, 0) * p.x + rotation(1, 1) * p.y + translation.y};
    }
};

namespace detail {

inline AlignmentResult align_proper(std::span<const Position> truth, std::span<const Position> estimates, bool mirror) {
    const Position ct = centroid(truth);
    std::vector<Position> src(estimates.begin(), estimates.end());
    if (mirror) {
        for (auto& p : src) p.y = -p.y;
    }
    const Position ce = centroid(src);

    // Optimal 2D rotation angle has a closed form from the centred cross terms.
    double dot = 0.0;
    double cross = 0.0;
    for (std::size_t i = 0; i < src.size(); ++i) {
        const Position a = src[i] - ce;
        const Position b = truth[i] - ct;
        dot += a.x * b.x + a.y * b.y;
        cross += a.x * b.y - a.y * b.x;
    }
    const double theta = std::atan2(cross, dot);
    Eigen::Matrix2d rot;
    rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);

    AlignmentResult out;
    out.rotation = mirror ? Eigen::Matrix2d(rot * Eigen::Vector2d(1.0, -1.0).asDiagonal()) : rot;
    out.reflected = mirror;
    const Eigen::Vector2d rc = rot * Eigen::Vector2d(ce.x, ce.y);
    out.translation = {ct.x - rc.x(), ct.y - rc.y()};
    double sq = 0.0;
    out.per_node_error.reserve(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double e = distance(out.apply(estimates[i]), truth[i]);
        out.per_node_error.push_back(e);
        sq += e * e;
    }
    out.rmse = std::sqrt(sq / static_cast<double>(truth.size()));
    return out;
}

inline bool all_coincident(std::span<const Position> pts) {
    for (const auto& p : pts) {
        if (distance(p, pts.front()) > 1e-12) return false;
    }
    return true;
}

}  // namespace detail

/// Least-squares rigid alignment of estimates onto truth. With `allow_reflection`
/// the better of the two orientation classes is returned.
[[nodiscard]] inline AlignmentResult procrustes_align(std::span<const Position> truth, std::span<const Position> estimates,
                                                      bool allow_reflection) {
    if (truth.size() != estimates.size()) throw InvalidInput("procrustes_align: size mismatch");
    if (truth.size() < 2) throw InvalidInput("procrustes_align: need at least two nodes");
    require_finite(truth, "procrustes_align");
    require_finite(estimates, "procrustes_align");
    if (detail::all_coincident(truth) || detail::all_coincident(estimates)) {
        throw InvalidInput("procrustes_align: degenerate configuration (all points coincide)");
    }
    auto best = detail::align_proper(truth, estimates, false);
    if (allow_reflection) {
        auto mirrored = detail::align_proper(truth, estimates, true);
        if (mirrored.rmse < best.rmse) best = std::move(mirrored);
    }
    return best;
}

[[nodiscard]] inline std::vector<NodeId> detect_flips(const AlignmentResult& alignment, double threshold) {
    std::vector<NodeId> out;
    for (NodeId i = 0; i < alignment.per_node_error.size(); ++i) {
        if (alignment.per_node_error[i] > threshold) out.push_back(i);
    }
    return out;
}

/// A quarter of the smallest ground-truth inter-robot distance.
[[nodiscard]] inline double default_flip_threshold(std::span<const Position> truth) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < truth.size(); ++i) {
        for (std::size_t j = i + 1; j < truth.size(); ++j) m = std::min(m, distance(truth[i], truth[j]));
    }
    return 0.25 * m;
}

// ---------------------------------------------------------------------------
// Shadow-gain bounds
// ---------------------------------------------------------------------------

inline constexpr double kArccosClampTolerance = 1e-9;

/// Angle at vertex a of triangle (a,b,c) with noisy squared sides d^2 + eta.
[[nodiscard]] inline double estimated_angle(double d_ab, double d_ac, double d_bc, double eta_ab, double eta_ac,
                                            double eta_bc) {
    const double sab = d_ab * d_ab + eta_ab;
    const double sac = d_ac * d_ac + eta_ac;
    const double sbc = d_bc * d_bc + eta_bc;
    const double den = 2.0 * std::sqrt(sab * sac);
    if (!(den > 0.0) || !std::isfinite(den)) throw InvalidInput("estimated_angle: zero or invalid denominator");
    double c = (sab + sac - sbc) / den;
    if (!std::isfinite(c) || c > 1.0 + kArccosClampTolerance || c < -1.0 - kArccosClampTolerance) {
        throw InvalidInput("estimated_angle: cosine argument outside [-1, 1]");
    }
    c = std::clamp(c, -1.0, 1.0);
    return std::acos(c);
}

/// Noise term of a shadow edge (i,k) through common neighbour j. Angles are taken
/// as explicit inputs since the reference node they are measured at is left to the caller.
[[nodiscard]] inline double eta_shadow(double d_kj, double d_ij, double eta_kj, double eta_ij, double a_hkj, double a_hij,
                                       double est_a_hkj, double est_a_hij) {
    const double radicand = (d_kj * d_kj + eta_kj) * (d_ij * d_ij + eta_ij);
    if (radicand < 0.0) throw InvalidInput("eta_shadow: negative radicand");
    return 2.0 * d_kj * d_ij * std::cos(a_hkj - a_hij) + eta_kj + eta_ij -
           2.0 * std::sqrt(radicand) * std::cos(est_a_hkj - est_a_hij);
}

struct BetaInterval {
    double lower{0.0};
    double upper{0.0};
    bool feasible{false};
};

/// 1/max(eta_ik, eps) <= beta <= 1/((d_ij + d_jk)/2 + eta_ik), evaluated as written.
[[nodiscard]] inline BetaInterval beta_bounds(double d_ij, double d_jk, double eta_ik, double epsilon) {
    if (!(epsilon > 0.0)) throw InvalidInput("beta_bounds: epsilon must be positive");
    require_non_negative(d_ij, "beta_bounds");
    require_non_negative(d_jk, "beta_bounds");
    const double den = 0.5 * (d_ij + d_jk) + eta_ik;
    if (!(den > 0.0)) throw InvalidInput("beta_bounds: upper-bound denominator must be positive");
    BetaInterval out;
    out.lower = 1.0 / std::max(eta_ik, epsilon);
    out.upper = 1.0 / den;
    out.feasible = out.lower <= out.upper;
    return out;
}

// ---------------------------------------------------------------------------
// Empirical stability diagnostic
// ---------------------------------------------------------------------------

struct SpectralReport {
    /// Spectral radius of the round map's Jacobian on the complement of rigid motions.
    double spectral_radius{0.0};
    /// Spectral radius of the full Jacobian (>= 1 for anchor-free maps).
    double full_spectral_radius{0.0};
    /// Eigenvalues of (J - I) restricted to the non-rigid subspace.
    std::vector<std::complex<double>> shifted_eigenvalues;
    /// True when every shifted eigenvalue has real part in (-2, 0).
    bool eigenvalues_in_stable_band{false};
    Eigen::MatrixXd jacobian;
};

namespace detail {

/// Orthonormal basis of the subspace orthogonal to infinitesimal rigid motions
/// (two translations and a rotation about the centroid).
inline Eigen::MatrixXd non_rigid_basis(std::span<const Position> truth) {
    const auto n = static_cast<Eigen::Index>(truth.size());
    const Position c = centroid(truth);
    Eigen::MatrixXd rigid(2 * n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Position d = truth[static_cast<std::size_t>(i)] - c;
        rigid.row(2 * i) << 1.0, 0.0, -d.y;
        rigid.row(2 * i + 1) << 0.0, 1.0, d.x;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(rigid);
    qr.setThreshold(1e-10);
    const Eigen::Index rank = qr.rank();
    const Eigen::MatrixXd q = qr.householderQ();
    return q.rightCols(2 * n - rank);
}

inline double max_abs(const Eigen::VectorXcd& v) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v[i]));
    return m;
}

}  // namespace detail

/// Linearizes one noiseless synchronous round at ground truth by central finite
/// differences and reports its spectral radius.
[[nodiscard]] inline SpectralReport spectral_stability(const SensingGraph& graph, std::span<const Position> truth,
                                                       const GainConfig& gains, ProtocolVariant variant,
                                                       const UpdateRules& rules = {}, double step = 1e-6) {
    if (truth.size() != graph.size()) throw InvalidInput("spectral_stability: truth size does not match graph");
    if (truth.size() < 2) throw InvalidInput("spectral_stability: need at least two nodes");
    gains.validate();
    const std::size_t n = truth.size();
    const auto z = sample_measurements(graph, truth, NoiseModel{0.0, 0}, 0);

    auto round_map = [&](const std::vector<Position>& x) {
        const auto states = states_from_estimates(x);
        return synchronous_round(graph, states, z, gains, variant, rules, 0);
    };

    const auto dim = static_cast<Eigen::Index>(2 * n);
    Eigen::MatrixXd jac(dim, dim);
    std::vector<Position> x(truth.begin(), truth.end());
    for (std::size_t col = 0; col < 2 * n; ++col) {
        auto coord = [&](std::vector<Position>& v) -> double& { return col % 2 == 0 ? v[col / 2].x : v[col / 2].y; };
        const double saved = coord(x);
        const double up = saved + step;
        const double down = saved - step;
        coord(x) = up;
        const auto fp = round_map(x);
        coord(x) = down;
        const auto fm = round_map(x);
        coord(x) = saved;
        const double width = up - down;  // the step actually taken, after rounding
        for (std::size_t r = 0; r < n; ++r) {
            jac(static_cast<Eigen::Index>(2 * r), static_cast<Eigen::Index>(col)) = (fp[r].x - fm[r].x) / width;
            jac(static_cast<Eigen::Index>(2 * r + 1), static_cast<Eigen::Index>(col)) = (fp[r].y - fm[r].y) / width;
        }
    }

    if (!jac.allFinite()) throw NumericalError("spectral_stability: round map overflowed near ground truth");
    SpectralReport report;
    report.jacobian = jac;

    Eigen::EigenSolver<Eigen::MatrixXd> full(jac, false);
    if (full.info() != Eigen::Success) throw NumericalError("spectral_stability: eigen-solver failed on the Jacobian");
    report.full_spectral_radius = detail::max_abs(full.eigenvalues());

    const Eigen::MatrixXd basis = detail::non_rigid_basis(truth);
    if (basis.cols() == 0) {
        report.spectral_radius = 0.0;
        report.eigenvalues_in_stable_band = true;
        return report;
    }
    const Eigen::MatrixXd reduced = basis.transpose() * jac * basis;
    Eigen::EigenSolver<Eigen::MatrixXd> es(reduced, false);
    if (es.info() != Eigen::Success) throw NumericalError("spectral_stability: eigen-solver failed on the reduced Jacobian");
    const Eigen::VectorXcd ev = es.eigenvalues();
    report.spectral_radius = detail::max_abs(ev);
    report.eigenvalues_in_stable_band = true;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        const std::complex<double> shifted = ev[i] - 1.0;
        report.shifted_eigenvalues.push_back(shifted);
        if (!(shifted.real() > -2.0 && shifted.real() < 0.0)) report.eigenvalues_in_stable_band = false;
    }
    return report;
}

}  // namespace dcl
