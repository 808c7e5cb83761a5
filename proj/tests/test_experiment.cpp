#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dcl/results_io.hpp"

namespace fs = std::filesystem;
using dcl::Position;

namespace {

fs::path scratch_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("dcl_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

dcl::ExperimentConfig small_config() {
    dcl::ExperimentConfig cfg;
    cfg.n = 9;
    cfg.radius = 0.6;
    cfg.seeds = {0, 1, 2};
    cfg.max_iterations = 40;
    return cfg;
}

}  // namespace

TEST(SquareLattice, GeometryAndValidation) {
    const auto p = dcl::generate_square_lattice(25);
    ASSERT_EQ(p.size(), 25u);
    EXPECT_EQ(p.front(), (Position{-0.5, -0.5}));
    EXPECT_EQ(p.back(), (Position{0.5, 0.5}));
    EXPECT_DOUBLE_EQ(dcl::distance(p[0], p[1]), 0.25);
    EXPECT_DOUBLE_EQ(dcl::distance(p[0], p[5]), 0.25);
    EXPECT_NEAR(dcl::centroid(p).norm(), 0.0, 1e-15);
    EXPECT_THROW((void)dcl::generate_square_lattice(24), dcl::InvalidInput);
    EXPECT_THROW((void)dcl::generate_square_lattice(1), dcl::InvalidInput);
}

TEST(RandomConfig, RespectsSeparationAndBounds) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto p = dcl::generate_random_config(25, seed, 0.05);
        for (std::size_t i = 0; i < p.size(); ++i) {
            EXPECT_TRUE(dcl::BoundingBox{}.contains(p[i]));
            for (std::size_t j = i + 1; j < p.size(); ++j) EXPECT_GE(dcl::distance(p[i], p[j]), 0.05);
        }
        EXPECT_EQ(p, dcl::generate_random_config(25, seed, 0.05));
    }
    EXPECT_NE(dcl::generate_random_config(25, 0, 0.05), dcl::generate_random_config(25, 1, 0.05));
    EXPECT_THROW((void)dcl::generate_random_config(100, 0, 0.5, 100), dcl::InvalidInput);
}

TEST(Emitter, RelocationAlongCornerDiagonal) {
    auto p = dcl::generate_square_lattice(25);
    EXPECT_EQ(dcl::outermost_node(p), 0u);
    const Position c = dcl::centroid(p);
    dcl::relocate_emitter(p, 0, 1.0);
    EXPECT_NEAR(dcl::distance(p[0], c), 1.0, 1e-12);
    EXPECT_NEAR(p[0].x, p[0].y, 1e-12);
    EXPECT_LT(p[0].x, 0.0);
    EXPECT_THROW(dcl::relocate_emitter(p, 0, -0.1), dcl::InvalidInput);
}

TEST(Config, ParsesKeyValueText) {
    std::istringstream in(
        "# comment\n"
        "n = 36\n"
        "radius = ggr-threshold   # trailing comment\n"
        "sigma=0.1\n"
        "variant = baseline\n"
        "seeds = 0-2, 7\n"
        "emitter_offset = 0.75\n"
        "\n");
    const auto cfg = dcl::parse_config(in);
    EXPECT_EQ(cfg.n, 36u);
    EXPECT_FALSE(cfg.radius.has_value());
    EXPECT_NEAR(cfg.resolved_radius(), dcl::ggr_radius_threshold(36), 1e-15);
    EXPECT_DOUBLE_EQ(cfg.sigma, 0.1);
    EXPECT_EQ(cfg.variant, dcl::ProtocolVariant::Baseline);
    EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{0, 1, 2, 7}));
    EXPECT_EQ(cfg.emitter_offset, 0.75);
}

TEST(Config, RejectsBadText) {
    std::istringstream unknown("colour = blue\n");
    EXPECT_THROW((void)dcl::parse_config(unknown), dcl::InvalidInput);
    std::istringstream no_eq("n 25\n");
    EXPECT_THROW((void)dcl::parse_config(no_eq), dcl::InvalidInput);
    std::istringstream bad_num("sigma = lots\n");
    EXPECT_THROW((void)dcl::parse_config(bad_num), dcl::InvalidInput);
    EXPECT_THROW((void)dcl::parse_seed_list("5-2"), dcl::InvalidInput);
    EXPECT_THROW((void)dcl::load_config("/nonexistent/dcl.cfg"), dcl::IoError);
}

TEST(Config, FingerprintTracksSettingsNotSeeds) {
    auto a = small_config();
    auto b = small_config();
    b.seeds = {5, 6};
    EXPECT_EQ(dcl::config_fingerprint(a), dcl::config_fingerprint(b));
    b.gains.beta = 0.25;
    EXPECT_NE(dcl::config_fingerprint(a), dcl::config_fingerprint(b));
    EXPECT_EQ(dcl::config_fingerprint(a).size(), 16u);
}

TEST(Scenario, EmitterOnlyForEmitterVariants) {
    auto cfg = small_config();
    cfg.radius = 0.3;
    cfg.variant = dcl::ProtocolVariant::S1Edge;
    EXPECT_FALSE(dcl::build_scenario(cfg, 0).graph.emitter().has_value());
    cfg.variant = dcl::ProtocolVariant::Emitter;
    const auto s = dcl::build_scenario(cfg, 0);
    EXPECT_EQ(s.graph.emitter(), dcl::NodeId{0});
    EXPECT_EQ(s.graph.degree(0), 8u);
}

TEST(RunExperiment, OneRecordPerSeedAndThreadCountInvariant) {
    const auto cfg = small_config();
    const auto a = dcl::run_experiment(cfg, 1);
    const auto b = dcl::run_experiment(cfg, 3);
    ASSERT_EQ(a.size(), 3u);
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k].seed, cfg.seeds[k]);
        EXPECT_EQ(a[k].ale_series, b[k].ale_series);
        EXPECT_EQ(a[k].final_ale, a[k].ale_series.back());
        EXPECT_EQ(a[k].fingerprint, dcl::config_fingerprint(cfg));
    }
}

TEST(Median, HandlesEvenOddAndInfinity) {
    EXPECT_DOUBLE_EQ(dcl::median({3, 1, 2}), 2.0);
    EXPECT_DOUBLE_EQ(dcl::median({4, 1, 2, 3}), 2.5);
    const double inf = std::numeric_limits<double>::infinity();
    EXPECT_EQ(dcl::median({inf, inf, 1}), inf);
}

TEST(Sweep, TableShapeAndAxisApplication) {
    auto cfg = small_config();
    cfg.seeds = {0, 1};
    const std::vector<double> values{0.1, 0.5};
    const std::vector<dcl::ProtocolVariant> variants{dcl::ProtocolVariant::Baseline, dcl::ProtocolVariant::DclSparse};
    const auto res = dcl::sweep(cfg, dcl::SweepAxis::Beta, values, variants, 2);
    EXPECT_EQ(res.table.size(), values.size() * variants.size());
    EXPECT_EQ(res.records.size(), values.size() * variants.size() * cfg.seeds.size());
    for (double v : values) {
        for (auto var : variants) {
            const auto& c = res.cell(v, var);
            EXPECT_FALSE(std::isnan(c.median_final_ale));
        }
    }
    for (const auto& r : res.records) ASSERT_TRUE(r.axis_value.has_value());

    const auto rc = dcl::sweep(cfg, dcl::SweepAxis::RobotCount, std::vector<double>{16, 25},
                               std::vector<dcl::ProtocolVariant>{dcl::ProtocolVariant::Baseline}, 1);
    EXPECT_EQ(rc.table[0].resolved_radius, 0.6);
    EXPECT_THROW((void)dcl::sweep(cfg, dcl::SweepAxis::RobotCount, std::vector<double>{10}, variants, 1),
                 dcl::InvalidInput);
}

TEST(ResultsIo, SeriesRoundTrip) {
    const auto dir = scratch_dir("series");
    const auto recs = dcl::run_experiment(small_config(), 1);
    dcl::write_results(dir, small_config(), recs);
    const auto back = dcl::read_series_csv(dir / "series.csv");
    ASSERT_EQ(back.size(), recs.size());
    for (const auto& r : recs) EXPECT_EQ(back.at(r.seed), r.ale_series);

    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    EXPECT_EQ(manifest["tool_version"], std::string(dcl::kToolVersion));
    EXPECT_EQ(manifest["fingerprint"], dcl::config_fingerprint(small_config()));
    EXPECT_EQ(manifest["config"]["seeds"].size(), 3u);
    EXPECT_EQ(slurp(dir / "summary.csv").substr(0, dcl::kSummaryHeader.size()), dcl::kSummaryHeader);
    fs::remove_all(dir);
}

TEST(ResultsIo, EmptyRecordsGiveHeaderOnly) {
    const auto dir = scratch_dir("empty");
    dcl::write_series_csv(dir / "series.csv", std::vector<dcl::ResultRecord>{});
    EXPECT_EQ(slurp(dir / "series.csv"), std::string(dcl::kSeriesHeader) + "\n");
    EXPECT_TRUE(dcl::read_series_csv(dir / "series.csv").empty());
    fs::remove_all(dir);
}

TEST(ResultsIo, ByteIdenticalAcrossRuns) {
    const auto d1 = scratch_dir("det1");
    const auto d2 = scratch_dir("det2");
    dcl::write_results(d1, small_config(), dcl::run_experiment(small_config(), 1));
    dcl::write_results(d2, small_config(), dcl::run_experiment(small_config(), 2));
    for (const char* f : {"series.csv", "summary.csv", "manifest.json"}) EXPECT_EQ(slurp(d1 / f), slurp(d2 / f)) << f;
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST(ResultsIo, UnwritablePathNamesTheFile) {
    const auto blocker = scratch_dir("blocker");
    { std::ofstream(blocker) << "x"; }
    try {
        dcl::write_series_csv(blocker / "sub" / "series.csv", std::vector<dcl::ResultRecord>{});
        FAIL() << "expected IoError";
    } catch (const dcl::IoError& e) {
        EXPECT_NE(std::string(e.what()).find(blocker.string()), std::string::npos);
    }
    fs::remove_all(blocker);
}

TEST(ResultsIo, RejectsMalformedSeries) {
    const auto dir = scratch_dir("bad");
    fs::create_directories(dir);
    { std::ofstream(dir / "a.csv") << "wrong,header\n"; }
    EXPECT_THROW((void)dcl::read_series_csv(dir / "a.csv"), dcl::IoError);
    { std::ofstream(dir / "b.csv") << dcl::kSeriesHeader << "\n0,2,1.0\n"; }
    EXPECT_THROW((void)dcl::read_series_csv(dir / "b.csv"), dcl::IoError);
    fs::remove_all(dir);
}
