#pragma once

// Canned experiment plans for each figure family and the code that runs and
// writes them. Shared by the CLI's `reproduce` command and the acceptance suite.

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dcl/analysis.hpp"
#include "dcl/results_io.hpp"

namespace dcl {

/// Direct-edge gain for the dense (R = 1.5) scenario. With about 24 neighbours per
/// node the default gain leaves a noise floor near 2% of the initial error.
inline constexpr double kDenseAlpha = 0.003;

inline constexpr std::string_view kFigureIds[] = {"3a", "3b", "4", "5a", "5b", "5c", "6a", "6b", "6c", "6d"};

struct FigurePlan {
    std::string id;
    ExperimentConfig base;
    std::optional<SweepAxis> axis;  ///< unset: run every variant once on `base`
    std::vector<double> values;
    std::vector<ProtocolVariant> variants;
    bool write_formation{false};
};

[[nodiscard]] inline FigurePlan figure_plan(std::string_view id) {
    using V = ProtocolVariant;
    const std::vector<V> all(std::begin(kAllVariants), std::end(kAllVariants));
    FigurePlan p;
    p.id = std::string(id);
    p.variants = all;
    if (id == "3a") {
        p.axis = SweepAxis::Beta;
        p.values = {0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0};
        p.variants = {V::DclSparse};
    } else if (id == "3b") {
        p.base.radius.reset();
        p.axis = SweepAxis::EmitterOffset;
        p.values = {0.0, 0.25, 0.5, 0.75, 1.0, 1.25};
        p.variants = {V::Emitter, V::DclSparse};
    } else if (id == "4") {
        p.write_formation = true;
    } else if (id == "5a") {
        p.base.radius = 0.4;
    } else if (id == "5b") {
        p.base.radius.reset();
    } else if (id == "5c") {
        p.base.radius = 1.5;
        p.base.gains.alpha = kDenseAlpha;
    } else if (id == "6a" || id == "6b") {
        if (id == "6b") p.base.scenario = ScenarioKind::Random;
        p.axis = SweepAxis::Radius;
        p.values = {0.3, 0.4, 0.5, 0.6, 0.67};
    } else if (id == "6c") {
        p.axis = SweepAxis::NoiseStd;
        p.values = {0.0, 0.1, 0.2, 0.3};
    } else if (id == "6d") {
        p.base.radius.reset();
        p.axis = SweepAxis::RobotCount;
        p.values = {16, 25, 36, 49};
        p.variants = {V::Baseline, V::DclSparse};
    } else {
        throw InvalidInput("unknown figure id '" + std::string(id) + "' (expected 3a, 3b, 4, 5a, 5b, 5c, 6a, 6b, 6c, 6d)");
    }
    return p;
}

/// Aligned final formation of one run: `node,true_x,true_y,est_x,est_y,error`.
inline void write_formation_csv(const std::filesystem::path& path, const ExperimentConfig& cfg, std::uint64_t seed) {
    const auto sc = build_scenario(cfg, seed);
    auto st = simulation_settings(cfg, seed);
    const auto log = run_simulation(sc.graph, sc.truth, cfg.gains, cfg.variant, {cfg.sigma, seed}, st);
    auto f = detail::open_for_write(path);
    f << "node,true_x,true_y,est_x,est_y,error\n";
    const auto& est = log.final_estimates;
    if (std::all_of(est.begin(), est.end(), [](const Position& p) { return p.finite(); })) {
        const auto al = procrustes_align(sc.truth, est, true);
        for (std::size_t i = 0; i < sc.truth.size(); ++i) {
            const auto p = al.apply(est[i]);
            f << i << ',' << detail::format_double(sc.truth[i].x) << ',' << detail::format_double(sc.truth[i].y) << ','
              << detail::format_double(p.x) << ',' << detail::format_double(p.y) << ','
              << detail::format_double(al.per_node_error[i]) << '\n';
        }
    }
    detail::finish(f, path);
}

struct FigureOutput {
    std::vector<ResultRecord> records;  ///< variant-major for plain runs; sweep order otherwise
    std::optional<SweepResult> sweep;
};

/// Runs a plan on `cfg` (the plan's base after user overrides) and writes its files
/// into `out`. Plain runs give series_<variant>.csv, summary.csv and manifest.json;
/// sweeps give summary.csv, table.csv and manifest.json.
inline FigureOutput run_figure(const FigurePlan& plan, const ExperimentConfig& cfg, const std::filesystem::path& out,
                               std::size_t jobs = 1) {
    cfg.validate();
    FigureOutput result;
    if (plan.axis) {
        result.sweep = sweep(cfg, *plan.axis, plan.values, plan.variants, jobs);
        result.records = result.sweep->records;
        write_results(out, cfg, *result.sweep);
        return result;
    }
    for (auto v : plan.variants) {
        auto c = cfg;
        c.variant = v;
        auto recs = run_experiment(c, jobs);
        write_series_csv(out / ("series_" + std::string(to_string(v)) + ".csv"), recs);
        if (plan.write_formation) {
            write_formation_csv(out / ("formation_" + std::string(to_string(v)) + ".csv"), c, c.seeds.front());
        }
        result.records.insert(result.records.end(), recs.begin(), recs.end());
    }
    write_summary_csv(out / "summary.csv", result.records);
    auto m = manifest_json(cfg);
    std::vector<std::string> names;
    for (auto v : plan.variants) names.emplace_back(to_string(v));
    m["figure"] = plan.id;
    m["variants"] = names;
    write_manifest(out / "manifest.json", m);
    return result;
}

}  // namespace dcl
