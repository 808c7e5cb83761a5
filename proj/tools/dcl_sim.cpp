// Command-line front end: single runs, one-axis sweeps, canned figure
// reproductions and the acceptance/property check suite.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dcl/dcl.hpp"
#include "criteria.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
    std::string config_path;
    std::string out_dir = "results";
    std::string seeds;
    std::string variant;
    std::vector<std::string> overrides;
    std::size_t jobs = 1;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "key = value config file");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--seeds", o.seeds, "seed list, e.g. 0-9 or 1,4,7");
    cmd->add_option("--variant", o.variant, "baseline | s1edge | emitter | dclsparse (comma list for sweeps)");
    cmd->add_option("--set", o.overrides, "override a config key: --set alpha=0.02");
    cmd->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
}

dcl::ExperimentConfig resolve_config(const CommonOptions& o, dcl::ExperimentConfig base = {}) {
    dcl::ExperimentConfig cfg = o.config_path.empty() ? base : dcl::load_config(o.config_path, base);
    for (const auto& kv : o.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw dcl::InvalidInput("--set expects key=value, got '" + kv + "'");
        dcl::apply_setting(cfg, dcl::detail::trim(kv.substr(0, eq)), dcl::detail::trim(kv.substr(eq + 1)));
    }
    if (!o.seeds.empty()) cfg.seeds = dcl::parse_seed_list(o.seeds);
    cfg.validate();
    return cfg;
}

std::vector<dcl::ProtocolVariant> parse_variants(const std::string& s) {
    std::vector<dcl::ProtocolVariant> out;
    for (const auto& item : dcl::detail::split_list(s)) out.push_back(dcl::parse_variant(item));
    return out;
}

void print_records(const std::vector<dcl::ResultRecord>& recs) {
    std::printf("%-10s %6s %14s %14s %5s %6s %6s\n", "variant", "seed", "initial_ale", "final_ale", "div", "flips", "iters");
    for (const auto& r : recs) {
        std::printf("%-10s %6llu %14.6g %14.6g %5d %6zu %6zu\n", std::string(dcl::to_string(r.variant)).c_str(),
                    static_cast<unsigned long long>(r.seed), r.initial_ale, r.final_ale, r.diverged ? 1 : 0, r.flips,
                    r.iterations_run);
    }
    std::printf("median final ALE: %.6g\n", dcl::median_final_ale(recs));
}

void print_table(const dcl::SweepResult& res) {
    std::printf("%-14s %-10s %18s %8s %10s\n", std::string(dcl::to_string(res.axis)).c_str(), "variant", "median_final_ale",
                "diverged", "radius");
    for (const auto& c : res.table) {
        std::printf("%-14.6g %-10s %18.6g %8zu %10.4g\n", c.value, std::string(dcl::to_string(c.variant)).c_str(),
                    c.median_final_ale, c.diverged, c.resolved_radius);
    }
}

int reproduce(const std::string& figure, const CommonOptions& o) {
    const auto plan = dcl::figure_plan(figure);
    const auto cfg = resolve_config(o, plan.base);
    auto p = plan;
    if (!o.variant.empty()) p.variants = parse_variants(o.variant);
    const fs::path out = fs::path(o.out_dir) / ("fig" + figure);
    const auto result = dcl::run_figure(p, cfg, out, o.jobs);
    if (result.sweep) {
        print_table(*result.sweep);
    } else {
        print_records(result.records);
    }
    std::cout << "wrote " << out.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributed range-only cooperative localization simulator"};
    app.require_subcommand(1);

    CommonOptions run_opts;
    auto* run = app.add_subcommand("run", "run one experiment (all seeds, one variant)");
    add_common(run, run_opts);

    CommonOptions sweep_opts;
    std::string axis;
    std::string values;
    auto* sweep = app.add_subcommand("sweep", "sweep one axis over a value list");
    add_common(sweep, sweep_opts);
    sweep->add_option("--axis", axis, "beta | emitter-offset | radius | noise-std | robot-count")->required();
    sweep->add_option("--values", values, "comma-separated axis values")->required();

    CommonOptions repro_opts;
    std::string figure;
    auto* repro = app.add_subcommand("reproduce", "run the canned configuration for a figure family");
    add_common(repro, repro_opts);
    repro->add_option("figure", figure, "3a | 3b | 4 | 5a | 5b | 5c | 6a | 6b | 6c | 6d")->required();

    bool quick = false;
    std::size_t check_jobs = 1;
    auto* check = app.add_subcommand("check", "run the property and acceptance suite");
    check->add_flag("--quick", quick, "property suite only");
    check->add_option("--jobs", check_jobs, "worker threads");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            auto cfg = resolve_config(run_opts);
            if (!run_opts.variant.empty()) cfg.variant = dcl::parse_variant(run_opts.variant);
            const auto recs = dcl::run_experiment(cfg, run_opts.jobs);
            dcl::write_results(run_opts.out_dir, cfg, recs);
            print_records(recs);
        } else if (*sweep) {
            auto cfg = resolve_config(sweep_opts);
            const auto variants =
                sweep_opts.variant.empty() ? std::vector<dcl::ProtocolVariant>{cfg.variant} : parse_variants(sweep_opts.variant);
            const auto res = dcl::sweep(cfg, dcl::parse_axis(axis), dcl::parse_value_list(values), variants, sweep_opts.jobs);
            dcl::write_results(sweep_opts.out_dir, cfg, res);
            print_table(res);
        } else if (*repro) {
            return reproduce(figure, repro_opts);
        } else if (*check) {
            const auto results = dcl::acceptance::run_all(quick, check_jobs);
            return dcl::acceptance::print_report(results, std::cout) ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
