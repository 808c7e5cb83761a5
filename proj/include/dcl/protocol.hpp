#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dcl/error.hpp"
#include "dcl/geometry.hpp"
#include "dcl/measurement.hpp"
#include "dcl/metrics.hpp"
#include "dcl/sensing_graph.hpp"

namespace dcl {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct GainConfig {
    double alpha{0.05};  ///< gain on measured edges
    double beta{0.5};     ///< gain on shadow edges; 0 disables them

    void validate() const {
        if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidInput("alpha must be finite and >= 0");
        if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidInput("beta must be finite and >= 0");
    }
};

enum class ProtocolVariant { Baseline, S1Edge, Emitter, DclSparse };

inline constexpr ProtocolVariant kAllVariants[] = {ProtocolVariant::Baseline, ProtocolVariant::S1Edge,
                                                   ProtocolVariant::Emitter, ProtocolVariant::DclSparse};

[[nodiscard]] constexpr bool uses_shadow_edges(ProtocolVariant v) noexcept {
    return v == ProtocolVariant::S1Edge || v == ProtocolVariant::DclSparse;
}
[[nodiscard]] constexpr bool uses_emitter(ProtocolVariant v) noexcept {
    return v == ProtocolVariant::Emitter || v == ProtocolVariant::DclSparse;
}

[[nodiscard]] constexpr std::string_view to_string(ProtocolVariant v) noexcept {
    switch (v) {
        case ProtocolVariant::Baseline: return "baseline";
        case ProtocolVariant::S1Edge: return "s1edge";
        case ProtocolVariant::Emitter: return "emitter";
        case ProtocolVariant::DclSparse: return "dclsparse";
    }
    return "unknown";
}

[[nodiscard]] inline ProtocolVariant parse_variant(std::string_view s) {
    for (auto v : kAllVariants) {
        if (s == to_string(v)) return v;
    }
    if (s == "s1-edge" || s == "s1") return ProtocolVariant::S1Edge;
    if (s == "dcl-sparse" || s == "dcl") return ProtocolVariant::DclSparse;
    throw InvalidInput("unknown protocol variant '" + std::string(s) + "'");
}

/// Order in which a node applies its own corrections within one round.
enum class UpdateOrder {
    Simultaneous,  ///< all terms evaluated at x_i(tau) and summed
    Sequential,    ///< terms applied in place, neighbour by neighbour, shadow gate re-evaluated each time
};

/// How several paths i-j-k reaching the same shadow target k are combined.
enum class ShadowAggregation {
    PerPath,  ///< one correction per path
    PerPair,  ///< one correction per target, virtual range averaged over paths
};

/// Which squared separation enters the shadow-edge inconsistency.
enum class ShadowLambdaForm {
    TargetPair,     ///< |xhat_k - xhat_i|^2 - zhat_ik^2
    ViaTargetPair,  ///< |xhat_j - xhat_k|^2 - zhat_ik^2 (literal printed form)
};

struct UpdateRules {
    UpdateOrder order{UpdateOrder::Sequential};
    ShadowAggregation aggregation{ShadowAggregation::PerPath};
    ShadowLambdaForm lambda_form{ShadowLambdaForm::TargetPair};
};

[[nodiscard]] constexpr std::string_view to_string(UpdateOrder v) noexcept {
    return v == UpdateOrder::Simultaneous ? "simultaneous" : "sequential";
}
[[nodiscard]] constexpr std::string_view to_string(ShadowAggregation v) noexcept {
    return v == ShadowAggregation::PerPath ? "per-path" : "per-pair";
}
[[nodiscard]] constexpr std::string_view to_string(ShadowLambdaForm v) noexcept {
    return v == ShadowLambdaForm::TargetPair ? "target-pair" : "via-target-pair";
}

[[nodiscard]] inline UpdateOrder parse_update_order(std::string_view s) {
    if (s == "simultaneous") return UpdateOrder::Simultaneous;
    if (s == "sequential") return UpdateOrder::Sequential;
    throw InvalidInput("unknown update order '" + std::string(s) + "'");
}
[[nodiscard]] inline ShadowAggregation parse_shadow_aggregation(std::string_view s) {
    if (s == "per-path") return ShadowAggregation::PerPath;
    if (s == "per-pair") return ShadowAggregation::PerPair;
    throw InvalidInput("unknown shadow aggregation '" + std::string(s) + "'");
}
[[nodiscard]] inline ShadowLambdaForm parse_shadow_lambda_form(std::string_view s) {
    if (s == "target-pair") return ShadowLambdaForm::TargetPair;
    if (s == "via-target-pair") return ShadowLambdaForm::ViaTargetPair;
    throw InvalidInput("unknown shadow lambda form '" + std::string(s) + "'");
}

/// Emitter variants need an emitter in the graph; shadow variants need beta > 0.
inline void check_variant_prerequisites(const SensingGraph& graph, const GainConfig& gains, ProtocolVariant variant) {
    gains.validate();
    if (uses_emitter(variant) && !graph.emitter()) {
        throw InvalidInput(std::string(to_string(variant)) + " requires a graph with an emitter node");
    }
    if (uses_shadow_edges(variant) && !(gains.beta > 0.0)) {
        throw InvalidInput(std::string(to_string(variant)) + " requires beta > 0");
    }
}

// ---------------------------------------------------------------------------
// Node state and messages
// ---------------------------------------------------------------------------

/// What node i knows about a direct neighbour after this round's exchange.
struct NeighborEntry {
    NodeId node{0};
    Position estimate;
    double range{0.0};    ///< z_ij, sensed by i itself
    NodeId source{0};     ///< sender of the message that carried `estimate`
    std::uint64_t round{0};
};

/// What node i knows about a node two hops away, relayed by `via`.
struct ShadowEntry {
    NodeId target{0};
    NodeId via{0};
    Position estimate;        ///< xhat_k as forwarded by `via`
    double virtual_range{0};  ///< zhat_ik from s1_estimate(z_ij, z_jk)
    std::uint64_t round{0};
};

struct NodeState {
    NodeId id{0};
    Position estimate;
    std::uint64_t round{0};
    std::vector<NeighborEntry> neighbor_table;
    std::vector<ShadowEntry> two_hop_table;
};

struct ForwardedEntry {
    NodeId node{0};
    Position estimate;
    double range{0.0};  ///< z between the sender and `node`
};

/// The only channel between nodes. Delivered to the sender's direct neighbours.
struct RoundMessage {
    NodeId sender{0};
    Position estimate;
    std::vector<ForwardedEntry> forwarded;
};

/// Uniform i.i.d. initial estimates over `arena`; tables start empty.
[[nodiscard]] inline std::vector<NodeState> initialize_states(std::size_t n, const BoundingBox& arena,
                                                              std::uint64_t seed) {
    if (n < 1) throw InvalidInput("initialize_states: n must be >= 1");
    if (arena.degenerate()) throw InvalidInput("initialize_states: degenerate arena box");
    auto engine = make_engine({stream::kInit, seed});
    std::uniform_real_distribution<double> ux(arena.min.x, arena.max.x);
    std::uniform_real_distribution<double> uy(arena.min.y, arena.max.y);
    std::vector<NodeState> states(n);
    for (NodeId i = 0; i < n; ++i) {
        states[i].id = i;
        const double x = ux(engine);
        states[i].estimate = {x, uy(engine)};
    }
    return states;
}

[[nodiscard]] inline std::vector<NodeState> states_from_estimates(std::span<const Position> estimates) {
    std::vector<NodeState> states(estimates.size());
    for (NodeId i = 0; i < estimates.size(); ++i) {
        states[i].id = i;
        states[i].estimate = estimates[i];
    }
    return states;
}

[[nodiscard]] inline std::vector<Position> estimates_of(std::span<const NodeState> states) {
    std::vector<Position> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(s.estimate);
    return out;
}

/// Two broadcast sub-phases: (a) every node sends its estimate; (b) every node sends
/// its freshly filled neighbour table. Afterwards each node holds current-round
/// neighbour estimates and two-hop shadow entries.
[[nodiscard]] inline std::vector<NodeState> exchange_phase(const SensingGraph& graph, std::span<const NodeState> states,
                                                           const RangeMeasurementSet& measurements,
                                                           std::uint64_t round = 0) {
    const std::size_t n = graph.size();
    if (states.size() != n) throw InvalidInput("exchange_phase: state count does not match graph");

    std::vector<NodeState> next(states.begin(), states.end());
    for (NodeId i = 0; i < n; ++i) {
        if (next[i].id != i) throw InvalidInput("exchange_phase: state ids must match their index");
        next[i].round = round;
        next[i].neighbor_table.clear();
        next[i].two_hop_table.clear();
    }

    // (a) self estimates
    for (NodeId s = 0; s < n; ++s) {
        const RoundMessage msg{s, next[s].estimate, {}};
        for (NodeId r : graph.neighbors(s)) {
            next[r].neighbor_table.push_back({msg.sender, msg.estimate, measurements.at(r, s), msg.sender, round});
        }
    }

    // (b) forwarded neighbour tables
    for (NodeId s = 0; s < n; ++s) {
        RoundMessage msg{s, next[s].estimate, {}};
        msg.forwarded.reserve(next[s].neighbor_table.size());
        for (const auto& e : next[s].neighbor_table) msg.forwarded.push_back({e.node, e.estimate, e.range});
        for (NodeId r : graph.neighbors(s)) {
            auto& table = next[r].neighbor_table;
            const auto link = std::find_if(table.begin(), table.end(), [&](const NeighborEntry& e) { return e.node == s; });
            if (link == table.end()) throw ContractViolation("exchange_phase: message over a link with no sub-phase (a) entry");
            for (const auto& f : msg.forwarded) {
                if (f.node == r || graph.has_edge(r, f.node)) continue;
                next[r].two_hop_table.push_back({f.node, s, f.estimate, s1_estimate(link->range, f.range), round});
            }
        }
    }
    return next;
}

/// 1 when the estimates put i and k inside sensing range (strictly), else 0.
[[nodiscard]] inline int s_ik_indicator(const Position& xi, const Position& xk, double radius) {
    if (!(radius > 0.0)) throw InvalidInput("s_ik_indicator: radius must be positive");
    return distance(xi, xk) < radius ? 1 : 0;
}

/// Counts of values read by node_update, split by origin.
struct AuditCounters {
    std::size_t direct_reads{0};
    std::size_t shadow_reads{0};
};

namespace detail {

inline void audit_tables(const NodeState& state, const SensingGraph& graph) {
    const NodeId i = state.id;
    const auto nbrs = graph.neighbors(i);
    if (state.neighbor_table.size() != nbrs.size()) {
        throw InvalidInput("node_update: node " + std::to_string(i) + " has " +
                           std::to_string(state.neighbor_table.size()) + " neighbour entries, expected " +
                           std::to_string(nbrs.size()));
    }
    for (const auto& e : state.neighbor_table) {
        if (e.source != e.node || !graph.has_edge(i, e.source) || e.round != state.round) {
            throw ContractViolation("node " + std::to_string(i) + " holds an estimate of " + std::to_string(e.node) +
                                    " that did not arrive from that neighbour this round");
        }
    }
    for (const auto& s : state.two_hop_table) {
        if (!graph.has_edge(i, s.via) || s.round != state.round) {
            throw ContractViolation("node " + std::to_string(i) + " holds a shadow entry relayed by non-neighbour " +
                                    std::to_string(s.via));
        }
        if (s.target == i || graph.has_edge(i, s.target)) {
            throw ContractViolation("node " + std::to_string(i) + " holds a shadow entry for non-shadow node " +
                                    std::to_string(s.target));
        }
    }
}

inline const NeighborEntry& neighbor_entry(const NodeState& state, NodeId j) {
    for (const auto& e : state.neighbor_table) {
        if (e.node == j) return e;
    }
    throw InvalidInput("node_update: no neighbour entry for " + std::to_string(j));
}

inline double shadow_lambda(const NodeState& state, const Position& xi, const ShadowEntry& s, double zhat,
                            ShadowLambdaForm form) {
    if (form == ShadowLambdaForm::TargetPair) return inconsistency(xi, s.estimate, zhat);
    return inconsistency(neighbor_entry(state, s.via).estimate, s.estimate, zhat);
}

/// Shadow entries that contribute a term: every path, or the first path per target
/// carrying the mean virtual range over all paths to that target.
inline std::vector<std::pair<const ShadowEntry*, double>> shadow_terms(const NodeState& state, ShadowAggregation agg) {
    std::vector<std::pair<const ShadowEntry*, double>> terms;
    const auto& table = state.two_hop_table;
    terms.reserve(table.size());
    if (agg == ShadowAggregation::PerPath) {
        for (const auto& s : table) terms.emplace_back(&s, s.virtual_range);
        return terms;
    }
    for (std::size_t a = 0; a < table.size(); ++a) {
        bool first = true;
        for (std::size_t b = 0; b < a; ++b) {
            if (table[b].target == table[a].target) {
                first = false;
                break;
            }
        }
        if (!first) continue;
        double sum = 0.0;
        int count = 0;
        for (std::size_t b = a; b < table.size(); ++b) {
            if (table[b].target == table[a].target) {
                sum += table[b].virtual_range;
                ++count;
            }
        }
        terms.emplace_back(&table[a], sum / count);
    }
    return terms;
}

}  // namespace detail

/// New estimate for one node, computed only from its own tables.
[[nodiscard]] inline Position node_update(const NodeState& state, const SensingGraph& graph, const GainConfig& gains,
                                          ProtocolVariant variant, const UpdateRules& rules = {},
                                          AuditCounters* audit = nullptr) {
    detail::audit_tables(state, graph);
    const double R = graph.radius();
    const bool shadow = uses_shadow_edges(variant) && gains.beta > 0.0;
    const auto terms = shadow ? detail::shadow_terms(state, rules.aggregation)
                              : std::vector<std::pair<const ShadowEntry*, double>>{};
    if (audit) {
        audit->direct_reads += state.neighbor_table.size();
        audit->shadow_reads += terms.size();
    }

    if (rules.order == UpdateOrder::Simultaneous) {
        const Position xi = state.estimate;
        Position step;
        for (const auto& e : state.neighbor_table) {
            step += gains.alpha * inconsistency(xi, e.estimate, e.range) * (e.estimate - xi);
        }
        for (const auto& [s, zhat] : terms) {
            if (s_ik_indicator(xi, s->estimate, R) == 0) continue;
            step += gains.beta * detail::shadow_lambda(state, xi, *s, zhat, rules.lambda_form) * (s->estimate - xi);
        }
        return xi + step;
    }

    // Sequential: after each direct correction, apply the shadow terms relayed by that
    // neighbour, re-evaluating the range gate against the moving estimate.
    Position xi = state.estimate;
    for (const auto& e : state.neighbor_table) {
        xi += gains.alpha * inconsistency(xi, e.estimate, e.range) * (e.estimate - xi);
        for (const auto& [s, zhat] : terms) {
            if (s->via != e.node || s_ik_indicator(xi, s->estimate, R) == 0) continue;
            xi += gains.beta * detail::shadow_lambda(state, xi, *s, zhat, rules.lambda_form) * (s->estimate - xi);
        }
    }
    return xi;
}

// ---------------------------------------------------------------------------
// Simulation engine
// ---------------------------------------------------------------------------

enum class RunStatus { Converged, MaxIterations, Diverged };

[[nodiscard]] constexpr std::string_view to_string(RunStatus s) noexcept {
    switch (s) {
        case RunStatus::Converged: return "converged";
        case RunStatus::MaxIterations: return "max-iterations";
        case RunStatus::Diverged: return "diverged";
    }
    return "unknown";
}

struct SimulationSettings {
    std::size_t max_iterations{1000};
    double stop_tolerance{1e-6};
    std::size_t stall_rounds{10};  ///< consecutive sub-tolerance rounds before early stop
    double divergence_bound{1e3};
    BoundingBox arena{};
    std::uint64_t init_seed{0};
    std::optional<std::vector<Position>> initial_estimates{};
    UpdateRules rules{};
    bool record_estimates{true};
    bool check_prerequisites{true};
    AuditCounters* audit{nullptr};
};

/// Per-round record of a run. estimates[0] and initial_ale describe the start;
/// estimates[t] and ale[t-1] describe the state after round t.
struct TrajectoryLog {
    std::vector<std::vector<Position>> estimates;
    std::vector<double> ale;
    double initial_ale{0.0};
    std::size_t iterations_run{0};
    RunStatus status{RunStatus::MaxIterations};
    std::vector<Position> final_estimates;

    [[nodiscard]] double final_ale() const noexcept { return ale.empty() ? initial_ale : ale.back(); }
    [[nodiscard]] bool diverged() const noexcept { return status == RunStatus::Diverged; }
};

/// One synchronous round: exchange, then every node updates from the same snapshot.
[[nodiscard]] inline std::vector<Position> synchronous_round(const SensingGraph& graph, std::span<const NodeState> states,
                                                             const RangeMeasurementSet& measurements, const GainConfig& gains,
                                                             ProtocolVariant variant, const UpdateRules& rules,
                                                             std::uint64_t round, AuditCounters* audit = nullptr) {
    const auto exchanged = exchange_phase(graph, states, measurements, round);
    std::vector<Position> next(exchanged.size());
    for (NodeId i = 0; i < exchanged.size(); ++i) {
        next[i] = node_update(exchanged[i], graph, gains, variant, rules, audit);
    }
    return next;
}

[[nodiscard]] inline TrajectoryLog run_simulation(const SensingGraph& graph, std::span<const Position> truth,
                                                  const GainConfig& gains, ProtocolVariant variant,
                                                  const NoiseModel& noise, const SimulationSettings& settings = {}) {
    if (truth.size() != graph.size()) throw InvalidInput("run_simulation: truth size does not match graph");
    if (truth.size() < 2) throw InvalidInput("run_simulation: need at least two nodes");
    require_finite(truth, "run_simulation");
    if (settings.check_prerequisites) check_variant_prerequisites(graph, gains, variant);
    gains.validate();

    std::vector<NodeState> states;
    if (settings.initial_estimates) {
        if (settings.initial_estimates->size() != truth.size()) throw InvalidInput("run_simulation: bad initial estimates");
        states = states_from_estimates(*settings.initial_estimates);
    } else {
        states = initialize_states(truth.size(), settings.arena, settings.init_seed);
    }

    TrajectoryLog log;
    auto current = estimates_of(states);
    log.initial_ale = ale(truth, current);
    if (settings.record_estimates) log.estimates.push_back(current);
    log.ale.reserve(settings.max_iterations);

    std::size_t quiet = 0;
    for (std::size_t t = 0; t < settings.max_iterations; ++t) {
        const auto z = sample_measurements(graph, truth, noise, t);
        auto next = synchronous_round(graph, states, z, gains, variant, settings.rules, t, settings.audit);

        double max_step = 0.0;
        bool blown = false;
        for (NodeId i = 0; i < next.size(); ++i) {
            if (!next[i].finite() || next[i].norm() > settings.divergence_bound) blown = true;
            max_step = std::max(max_step, distance(next[i], states[i].estimate));
            states[i].estimate = next[i];
        }
        log.iterations_run = t + 1;
        const double a = ale(truth, next);
        log.ale.push_back(std::isnan(a) ? std::numeric_limits<double>::infinity() : a);
        if (settings.record_estimates) log.estimates.push_back(next);
        current = std::move(next);

        if (blown) {
            log.status = RunStatus::Diverged;
            break;
        }
        quiet = max_step < settings.stop_tolerance ? quiet + 1 : 0;
        if (quiet >= settings.stall_rounds) {
            log.status = RunStatus::Converged;
            break;
        }
    }
    log.final_estimates = std::move(current);
    return log;
}

/// Line-oriented dump: header then `iteration,node,x,y` per node per recorded iteration.
inline void write_trajectory(std::ostream& os, const TrajectoryLog& log) {
    os << "iteration,node,x,y\n";
    char buf[128];
    for (std::size_t t = 0; t < log.estimates.size(); ++t) {
        for (std::size_t i = 0; i < log.estimates[t].size(); ++i) {
            std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g\n", t, i, log.estimates[t][i].x, log.estimates[t][i].y);
            os << buf;
        }
    }
}

}  // namespace dcl
