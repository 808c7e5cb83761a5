#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dcl/error.hpp"
#include "dcl/experiment.hpp"

namespace dcl {

inline constexpr std::string_view kSeriesHeader = "seed,iteration,ale";
inline constexpr std::string_view kSummaryHeader = "axis_value,variant,seed,final_ale,diverged,flips,iterations_run";
inline constexpr std::string_view kTableHeader = "axis_value,variant,median_final_ale,diverged_runs,radius";

namespace detail {

inline std::ofstream open_for_write(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

inline void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace detail

/// `seed,iteration,ale`, one row per round; iteration counts from 1.
inline void write_series_csv(const std::filesystem::path& path, std::span<const ResultRecord> records) {
    auto out = detail::open_for_write(path);
    out << kSeriesHeader << '\n';
    for (const auto& r : records) {
        for (std::size_t t = 0; t < r.ale_series.size(); ++t) {
            out << r.seed << ',' << (t + 1) << ',' << detail::format_double(r.ale_series[t]) << '\n';
        }
    }
    detail::finish(out, path);
}

inline void write_summary_csv(const std::filesystem::path& path, std::span<const ResultRecord> records) {
    auto out = detail::open_for_write(path);
    out << kSummaryHeader << '\n';
    for (const auto& r : records) {
        out << (r.axis_value ? detail::format_double(*r.axis_value) : std::string{}) << ',' << to_string(r.variant) << ','
            << r.seed << ',' << detail::format_double(r.final_ale) << ',' << (r.diverged ? 1 : 0) << ',' << r.flips << ','
            << r.iterations_run << '\n';
    }
    detail::finish(out, path);
}

inline void write_table_csv(const std::filesystem::path& path, const SweepResult& result) {
    auto out = detail::open_for_write(path);
    out << kTableHeader << '\n';
    for (const auto& c : result.table) {
        out << detail::format_double(c.value) << ',' << to_string(c.variant) << ','
            << detail::format_double(c.median_final_ale) << ',' << c.diverged << ','
            << detail::format_double(c.resolved_radius) << '\n';
    }
    detail::finish(out, path);
}

[[nodiscard]] inline nlohmann::ordered_json manifest_json(const ExperimentConfig& cfg) {
    nlohmann::ordered_json j;
    j["tool_version"] = std::string(kToolVersion);
    nlohmann::ordered_json c;
    for (const auto& [k, v] : resolved_settings(cfg)) c[k] = v;
    c["seeds"] = cfg.seeds;
    j["config"] = c;
    j["fingerprint"] = config_fingerprint(cfg);
    j["ggr_threshold"] = detail::format_double(ggr_radius_threshold(cfg.n, cfg.log_base));
    j["ggr_log_base"] = std::string(to_string(cfg.log_base));
    return j;
}

inline void write_manifest(const std::filesystem::path& path, const nlohmann::ordered_json& manifest) {
    auto out = detail::open_for_write(path);
    out << manifest.dump(2) << '\n';
    detail::finish(out, path);
}

/// Writes series.csv, summary.csv and manifest.json for a single-variant experiment.
inline void write_results(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                          std::span<const ResultRecord> records) {
    write_series_csv(dir / "series.csv", records);
    write_summary_csv(dir / "summary.csv", records);
    write_manifest(dir / "manifest.json", manifest_json(cfg));
}

/// Writes summary.csv, table.csv and manifest.json (with the sweep axis) for a sweep.
inline void write_results(const std::filesystem::path& dir, const ExperimentConfig& cfg, const SweepResult& result) {
    write_summary_csv(dir / "summary.csv", result.records);
    write_table_csv(dir / "table.csv", result);
    auto m = manifest_json(cfg);
    m["sweep"]["axis"] = std::string(to_string(result.axis));
    std::vector<std::string> values;
    for (double v : result.values) values.push_back(detail::format_double(v));
    m["sweep"]["values"] = values;
    std::vector<std::string> variants;
    for (auto v : result.variants) variants.emplace_back(to_string(v));
    m["sweep"]["variants"] = variants;
    write_manifest(dir / "manifest.json", m);
}

/// Series file contents keyed by seed, in file order.
[[nodiscard]] inline std::map<std::uint64_t, std::vector<double>> read_series_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || line != kSeriesHeader) throw IoError("'" + path.string() + "': bad series header");
    std::map<std::uint64_t, std::vector<double>> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto parts = detail::split_list(line);
        if (parts.size() != 3) throw IoError("'" + path.string() + "' line " + std::to_string(lineno) + ": expected 3 fields");
        auto& series = out[std::stoull(parts[0])];
        if (std::stoull(parts[1]) != series.size() + 1) {
            throw IoError("'" + path.string() + "' line " + std::to_string(lineno) + ": iterations out of order");
        }
        series.push_back(std::strtod(parts[2].c_str(), nullptr));
    }
    return out;
}

}  // namespace dcl
