#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "dcl/analysis.hpp"
#include "dcl/error.hpp"
#include "dcl/geometry.hpp"
#include "dcl/measurement.hpp"
#include "dcl/protocol.hpp"
#include "dcl/scenario.hpp"
#include "dcl/sensing_graph.hpp"

namespace dcl {

inline constexpr std::string_view kToolVersion = "dcl-sparse-sim 1.0.0";

enum class ScenarioKind { SquareLattice, Random };

[[nodiscard]] constexpr std::string_view to_string(ScenarioKind s) noexcept {
    return s == ScenarioKind::SquareLattice ? "lattice" : "random";
}
[[nodiscard]] constexpr std::string_view to_string(LogBase b) noexcept {
    return b == LogBase::Ten ? "ten" : "natural";
}

/// Declarative description of one experiment. `radius` unset means "use the GGR threshold".
struct ExperimentConfig {
    ScenarioKind scenario{ScenarioKind::SquareLattice};
    std::size_t n{25};
    std::optional<double> radius{0.4};
    LogBase log_base{LogBase::Ten};
    double sigma{0.05};
    GainConfig gains{};
    ProtocolVariant variant{ProtocolVariant::DclSparse};
    std::optional<double> emitter_offset{};
    std::optional<NodeId> emitter_node{};
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::size_t max_iterations{1000};
    double stop_tolerance{1e-6};
    double min_separation{0.05};
    double divergence_bound{1e3};
    BoundingBox init_box{};
    UpdateRules rules{};

    [[nodiscard]] double resolved_radius() const {
        return radius ? *radius : ggr_radius_threshold(n, log_base);
    }

    void validate() const {
        if (n < 2) throw InvalidInput("config: n must be >= 2");
        if (seeds.empty()) throw InvalidInput("config: seed list is empty");
        const double r = resolved_radius();
        if (!(r > 0.0) || !std::isfinite(r)) throw InvalidInput("config: radius must be positive");
        if (!(sigma >= 0.0)) throw InvalidInput("config: sigma must be >= 0");
        if (max_iterations == 0) throw InvalidInput("config: max_iterations must be positive");
        if (init_box.degenerate()) throw InvalidInput("config: degenerate init_box");
        gains.validate();
        if (emitter_node && *emitter_node >= n) throw InvalidInput("config: emitter_node out of range");
    }
};

// ---------------------------------------------------------------------------
// key = value configuration text
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw InvalidInput("config: '" + key + "' expects a number, got '" + v + "'");
    }
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
        const auto d = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw InvalidInput("config: '" + key + "' expects a non-negative integer, got '" + v + "'");
    }
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
    return out;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

[[nodiscard]] inline std::vector<std::uint64_t> parse_seed_list(std::string_view s) {
    std::vector<std::uint64_t> out;
    for (const auto& item : detail::split_list(s)) {
        const auto dash = item.find('-', 1);
        if (dash != std::string::npos) {
            const auto lo = detail::parse_uint("seeds", detail::trim(item.substr(0, dash)));
            const auto hi = detail::parse_uint("seeds", detail::trim(item.substr(dash + 1)));
            if (hi < lo) throw InvalidInput("seeds: empty range '" + item + "'");
            for (auto v = lo; v <= hi; ++v) out.push_back(v);
        } else {
            out.push_back(detail::parse_uint("seeds", item));
        }
    }
    if (out.empty()) throw InvalidInput("seeds: empty list");
    return out;
}

[[nodiscard]] inline std::vector<double> parse_value_list(std::string_view s) {
    std::vector<double> out;
    for (const auto& item : detail::split_list(s)) out.push_back(detail::parse_double("values", item));
    if (out.empty()) throw InvalidInput("values: empty list");
    return out;
}

/// Applies one `key = value` setting. Unknown keys are an error.
inline void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    using detail::parse_double;
    using detail::parse_uint;
    if (key == "scenario") {
        if (value == "lattice" || value == "square-lattice") cfg.scenario = ScenarioKind::SquareLattice;
        else if (value == "random") cfg.scenario = ScenarioKind::Random;
        else throw InvalidInput("config: unknown scenario '" + value + "'");
    } else if (key == "n") {
        cfg.n = parse_uint(key, value);
    } else if (key == "radius") {
        if (value == "ggr-threshold") cfg.radius.reset();
        else cfg.radius = parse_double(key, value);
    } else if (key == "log_base") {
        if (value == "ten") cfg.log_base = LogBase::Ten;
        else if (value == "natural") cfg.log_base = LogBase::Natural;
        else throw InvalidInput("config: log_base must be 'ten' or 'natural'");
    } else if (key == "sigma") {
        cfg.sigma = parse_double(key, value);
    } else if (key == "alpha") {
        cfg.gains.alpha = parse_double(key, value);
    } else if (key == "beta") {
        cfg.gains.beta = parse_double(key, value);
    } else if (key == "variant") {
        cfg.variant = parse_variant(value);
    } else if (key == "emitter_offset") {
        if (value == "none") cfg.emitter_offset.reset();
        else cfg.emitter_offset = parse_double(key, value);
    } else if (key == "emitter_node") {
        if (value == "auto") cfg.emitter_node.reset();
        else cfg.emitter_node = parse_uint(key, value);
    } else if (key == "seeds") {
        cfg.seeds = parse_seed_list(value);
    } else if (key == "max_iterations") {
        cfg.max_iterations = parse_uint(key, value);
    } else if (key == "stop_tolerance") {
        cfg.stop_tolerance = parse_double(key, value);
    } else if (key == "min_separation") {
        cfg.min_separation = parse_double(key, value);
    } else if (key == "divergence_bound") {
        cfg.divergence_bound = parse_double(key, value);
    } else if (key == "init_box") {
        const auto parts = detail::split_list(value);
        if (parts.size() != 4) throw InvalidInput("config: init_box expects xmin,ymin,xmax,ymax");
        cfg.init_box = {{parse_double(key, parts[0]), parse_double(key, parts[1])},
                        {parse_double(key, parts[2]), parse_double(key, parts[3])}};
    } else if (key == "update_order") {
        cfg.rules.order = parse_update_order(value);
    } else if (key == "shadow_aggregation") {
        cfg.rules.aggregation = parse_shadow_aggregation(value);
    } else if (key == "shadow_lambda_form") {
        cfg.rules.lambda_form = parse_shadow_lambda_form(value);
    } else {
        throw InvalidInput("config: unknown key '" + key + "'");
    }
}

[[nodiscard]] inline ExperimentConfig parse_config(std::istream& in, ExperimentConfig cfg = {}) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw InvalidInput("config line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        apply_setting(cfg, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
    }
    return cfg;
}

[[nodiscard]] inline ExperimentConfig load_config(const std::string& path, ExperimentConfig cfg = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    return parse_config(in, std::move(cfg));
}

/// Canonical resolved settings, in a fixed key order. Seeds are kept separate.
[[nodiscard]] inline std::vector<std::pair<std::string, std::string>> resolved_settings(const ExperimentConfig& cfg) {
    using detail::format_double;
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("scenario", std::string(to_string(cfg.scenario)));
    kv.emplace_back("n", std::to_string(cfg.n));
    kv.emplace_back("radius", format_double(cfg.resolved_radius()));
    kv.emplace_back("radius_source", cfg.radius ? "explicit" : "ggr-threshold");
    kv.emplace_back("log_base", std::string(to_string(cfg.log_base)));
    kv.emplace_back("sigma", format_double(cfg.sigma));
    kv.emplace_back("alpha", format_double(cfg.gains.alpha));
    kv.emplace_back("beta", format_double(cfg.gains.beta));
    kv.emplace_back("variant", std::string(to_string(cfg.variant)));
    kv.emplace_back("emitter_offset", cfg.emitter_offset ? format_double(*cfg.emitter_offset) : "none");
    kv.emplace_back("emitter_node", cfg.emitter_node ? std::to_string(*cfg.emitter_node) : "auto");
    kv.emplace_back("max_iterations", std::to_string(cfg.max_iterations));
    kv.emplace_back("stop_tolerance", format_double(cfg.stop_tolerance));
    kv.emplace_back("min_separation", format_double(cfg.min_separation));
    kv.emplace_back("divergence_bound", format_double(cfg.divergence_bound));
    kv.emplace_back("init_box", format_double(cfg.init_box.min.x) + "," + format_double(cfg.init_box.min.y) + "," +
                                    format_double(cfg.init_box.max.x) + "," + format_double(cfg.init_box.max.y));
    kv.emplace_back("update_order", std::string(to_string(cfg.rules.order)));
    kv.emplace_back("shadow_aggregation", std::string(to_string(cfg.rules.aggregation)));
    kv.emplace_back("shadow_lambda_form", std::string(to_string(cfg.rules.lambda_form)));
    return kv;
}

/// FNV-1a over the canonical resolved settings.
[[nodiscard]] inline std::string config_fingerprint(const ExperimentConfig& cfg) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& [k, v] : resolved_settings(cfg)) {
        for (char c : k + "=" + v + "\n") {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ULL;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

/// Ground truth and graph for one (config, seed).
struct Scenario {
    std::vector<Position> truth;
    SensingGraph graph;
    NodeId emitter{0};
    double radius{0.0};
};

[[nodiscard]] inline Scenario build_scenario(const ExperimentConfig& cfg, std::uint64_t seed) {
    Scenario s;
    s.truth = cfg.scenario == ScenarioKind::SquareLattice ? generate_square_lattice(cfg.n)
                                                          : generate_random_config(cfg.n, seed, cfg.min_separation);
    if (cfg.emitter_node) s.emitter = *cfg.emitter_node;
    else s.emitter = cfg.scenario == ScenarioKind::SquareLattice ? NodeId{0} : outermost_node(s.truth);
    if (cfg.emitter_offset) relocate_emitter(s.truth, s.emitter, *cfg.emitter_offset);
    s.radius = cfg.resolved_radius();
    s.graph = unit_disk_graph(s.truth, s.radius);
    if (uses_emitter(cfg.variant)) s.graph = augment_with_emitter(s.graph, s.emitter);
    return s;
}

struct ResultRecord {
    std::string fingerprint;
    std::uint64_t seed{0};
    ProtocolVariant variant{ProtocolVariant::Baseline};
    std::optional<double> axis_value;
    double initial_ale{0.0};
    std::vector<double> ale_series;
    double final_ale{0.0};
    bool diverged{false};
    std::size_t flips{0};
    std::size_t iterations_run{0};
    double duration_seconds{0.0};
};

[[nodiscard]] inline SimulationSettings simulation_settings(const ExperimentConfig& cfg, std::uint64_t seed) {
    SimulationSettings st;
    st.max_iterations = cfg.max_iterations;
    st.stop_tolerance = cfg.stop_tolerance;
    st.divergence_bound = cfg.divergence_bound;
    st.arena = cfg.init_box;
    st.init_seed = seed;
    st.rules = cfg.rules;
    st.record_estimates = false;
    return st;
}

[[nodiscard]] inline std::size_t count_flips(std::span<const Position> truth, std::span<const Position> estimates) {
    for (const auto& p : estimates) {
        if (!p.finite()) return truth.size();
    }
    try {
        const auto al = procrustes_align(truth, estimates, true);
        return detect_flips(al, default_flip_threshold(truth)).size();
    } catch (const InvalidInput&) {
        return truth.size();
    }
}

[[nodiscard]] inline ResultRecord run_single(const ExperimentConfig& cfg, std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    const Scenario sc = build_scenario(cfg, seed);
    const auto log = run_simulation(sc.graph, sc.truth, cfg.gains, cfg.variant, NoiseModel{cfg.sigma, seed},
                                    simulation_settings(cfg, seed));
    ResultRecord rec;
    rec.fingerprint = config_fingerprint(cfg);
    rec.seed = seed;
    rec.variant = cfg.variant;
    rec.initial_ale = log.initial_ale;
    rec.ale_series = log.ale;
    rec.final_ale = log.final_ale();
    rec.diverged = log.diverged();
    rec.flips = count_flips(sc.truth, log.final_estimates);
    rec.iterations_run = log.iterations_run;
    rec.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

/// Runs `count` independent jobs on up to `jobs` threads; results keep index order.
template <typename Result, typename Fn>
[[nodiscard]] std::vector<Result> parallel_map(std::size_t count, std::size_t jobs, Fn&& fn) {
    std::vector<std::optional<Result>> slots(count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    std::vector<Result> out;
    out.reserve(count);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

/// One record per seed, in seed-list order.
[[nodiscard]] inline std::vector<ResultRecord> run_experiment(const ExperimentConfig& cfg, std::size_t jobs = 1) {
    cfg.validate();
    return parallel_map<ResultRecord>(cfg.seeds.size(), jobs,
                                      [&](std::size_t i) { return run_single(cfg, cfg.seeds[i]); });
}

[[nodiscard]] inline double median(std::vector<double> v) {
    if (v.empty()) throw InvalidInput("median of an empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    if (v.size() % 2 == 1) return v[m];
    return 0.5 * (v[m - 1] + v[m]);
}

[[nodiscard]] inline double median_final_ale(std::span<const ResultRecord> records) {
    std::vector<double> v;
    for (const auto& r : records) v.push_back(std::isnan(r.final_ale) ? std::numeric_limits<double>::infinity() : r.final_ale);
    return median(std::move(v));
}

[[nodiscard]] inline double median_initial_ale(std::span<const ResultRecord> records) {
    std::vector<double> v;
    for (const auto& r : records) v.push_back(r.initial_ale);
    return median(std::move(v));
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

enum class SweepAxis { Beta, EmitterOffset, Radius, NoiseStd, RobotCount };

[[nodiscard]] constexpr std::string_view to_string(SweepAxis a) noexcept {
    switch (a) {
        case SweepAxis::Beta: return "beta";
        case SweepAxis::EmitterOffset: return "emitter-offset";
        case SweepAxis::Radius: return "radius";
        case SweepAxis::NoiseStd: return "noise-std";
        case SweepAxis::RobotCount: return "robot-count";
    }
    return "unknown";
}

[[nodiscard]] inline SweepAxis parse_axis(std::string_view s) {
    for (auto a : {SweepAxis::Beta, SweepAxis::EmitterOffset, SweepAxis::Radius, SweepAxis::NoiseStd, SweepAxis::RobotCount}) {
        if (s == to_string(a)) return a;
    }
    if (s == "offset" || s == "emitter_offset") return SweepAxis::EmitterOffset;
    if (s == "sigma" || s == "noise") return SweepAxis::NoiseStd;
    if (s == "n" || s == "robots") return SweepAxis::RobotCount;
    throw InvalidInput("unknown sweep axis '" + std::string(s) + "'");
}

/// Copy of `cfg` with one axis set to `value`.
[[nodiscard]] inline ExperimentConfig with_axis_value(ExperimentConfig cfg, SweepAxis axis, double value) {
    switch (axis) {
        case SweepAxis::Beta: cfg.gains.beta = value; break;
        case SweepAxis::EmitterOffset: cfg.emitter_offset = value; break;
        case SweepAxis::Radius: cfg.radius = value; break;
        case SweepAxis::NoiseStd: cfg.sigma = value; break;
        case SweepAxis::RobotCount: {
            if (!(value >= 2.0) || value != std::floor(value)) throw InvalidInput("robot-count values must be integers >= 2");
            cfg.n = static_cast<std::size_t>(value);
            break;
        }
    }
    return cfg;
}

struct SweepCell {
    double value{0.0};
    ProtocolVariant variant{ProtocolVariant::Baseline};
    double median_final_ale{0.0};
    double resolved_radius{0.0};
    std::size_t diverged{0};
};

struct SweepResult {
    SweepAxis axis{SweepAxis::Beta};
    std::vector<double> values;
    std::vector<ProtocolVariant> variants;
    std::vector<SweepCell> table;       ///< value-major, then variant
    std::vector<ResultRecord> records;  ///< value-major, then variant, then seed

    [[nodiscard]] const SweepCell& cell(double value, ProtocolVariant v) const {
        for (const auto& c : table) {
            if (c.value == value && c.variant == v) return c;
        }
        throw InvalidInput("sweep table has no cell for value " + detail::format_double(value) + " / " +
                           std::string(to_string(v)));
    }
};

[[nodiscard]] inline SweepResult sweep(const ExperimentConfig& base, SweepAxis axis, std::span<const double> values,
                                       std::span<const ProtocolVariant> variants, std::size_t jobs = 1) {
    if (values.empty()) throw InvalidInput("sweep: no axis values");
    if (variants.empty()) throw InvalidInput("sweep: no variants");
    std::vector<ExperimentConfig> cells;
    for (double v : values) {
        for (auto var : variants) {
            auto cfg = with_axis_value(base, axis, v);
            cfg.variant = var;
            cfg.validate();
            cells.push_back(std::move(cfg));
        }
    }
    const std::size_t per_cell = base.seeds.size();
    auto records = parallel_map<ResultRecord>(cells.size() * per_cell, jobs, [&](std::size_t k) {
        const auto& cfg = cells[k / per_cell];
        return run_single(cfg, cfg.seeds[k % per_cell]);
    });

    SweepResult out;
    out.axis = axis;
    out.values.assign(values.begin(), values.end());
    out.variants.assign(variants.begin(), variants.end());
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const double value = values[c / variants.size()];
        std::span<ResultRecord> slice(records.data() + c * per_cell, per_cell);
        SweepCell cell;
        cell.value = value;
        cell.variant = cells[c].variant;
        cell.median_final_ale = median_final_ale(slice);
        cell.resolved_radius = cells[c].resolved_radius();
        for (auto& r : slice) {
            r.axis_value = value;
            cell.diverged += r.diverged ? 1 : 0;
        }
        out.table.push_back(cell);
    }
    if (out.table.size() != values.size() * variants.size()) throw InvalidInput("sweep: incomplete table");
    out.records = std::move(records);
    return out;
}

}  // namespace dcl
