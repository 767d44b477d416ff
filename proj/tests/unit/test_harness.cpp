#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mbm/harness/config.hpp"
#include "mbm/harness/experiment.hpp"
#include "mbm/harness/io.hpp"
#include "mbm/stats.hpp"

namespace fs = std::filesystem;
using mbm::harness::ConfigViolation;
using mbm::harness::json;
using mbm::harness::Status;

namespace {

const char* minimal = R"({
  "format_version": 1,
  "seed": 11,
  "replicas": 20,
  "hurst": {"kind": "constant", "params": [0.5]},
  "representation": "fbm-exact",
  "grid": {"n": 257},
  "statistics": [{"name": "occupation-identity"}]
})";

json base(std::uint64_t seed = 5) {
    return json{{"seed", seed},
                {"replicas", 50},
                {"hurst", {{"kind", "constant"}, {"params", {0.5}}}},
                {"representation", "moving-average"},
                {"grid", {{"n", 1025}}},
                {"statistics", json::array()}};
}

bool has_violation(const std::vector<ConfigViolation>& v, const std::string& path, const std::string& needle) {
    return std::any_of(v.begin(), v.end(), [&](const ConfigViolation& x) {
        return x.path == path && x.message.find(needle) != std::string::npos;
    });
}

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("mbm_harness_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(ParseConfig, MinimalConfigParses) {
    auto cfg = mbm::harness::parse_config(minimal);
    EXPECT_EQ(cfg.seed, 11u);
    EXPECT_EQ(cfg.replicas, 20u);
    EXPECT_EQ(cfg.representation, mbm::Representation::fbm_exact);
    ASSERT_EQ(cfg.statistics.size(), 1u);
    EXPECT_EQ(cfg.statistics[0].name, "occupation-identity");
    EXPECT_DOUBLE_EQ(cfg.grid.dt, 1.0 / 256);
    EXPECT_EQ(cfg.normalized["thresholds"]["p_value"], 0.01);
    EXPECT_EQ(cfg.normalized["thresholds"]["failure_budget"], 0.01);
}

TEST(ParseConfig, HolderExponentAtOrBelowSupIsRejected) {
    auto j = base();
    j["hurst"] = {{"kind", "linear"}, {"params", {0.3, 0.4}}, {"holder", {{"beta", 0.6}, {"constant", 1.0}}}};
    auto r = mbm::harness::parse_config_checked(j.dump());
    EXPECT_FALSE(r.ok());
    EXPECT_TRUE(has_violation(r.violations, "hurst.holder.beta", "condition (H_beta)"));
}

TEST(ParseConfig, HolderConstantTooSmallIsRejected) {
    auto j = base();
    j["hurst"] = {{"kind", "linear"}, {"params", {0.3, 0.4}}, {"holder", {{"beta", 1.0}, {"constant", 0.1}}}};
    auto r = mbm::harness::parse_config_checked(j.dump());
    EXPECT_TRUE(has_violation(r.violations, "hurst.holder.constant", "condition (H_beta)"));
}

TEST(ParseConfig, ScalingPairViolationIsRejected) {
    auto j = base();
    j["statistics"] = {{{"name", "weighted-functional"}, {"t0", 0.5}, {"a", 0.4}, {"b", 0.9}}};
    auto r = mbm::harness::parse_config_checked(j.dump());
    EXPECT_FALSE(r.ok());
    EXPECT_TRUE(has_violation(r.violations, "statistics[0].a", "theta(rho)/rho^{H0} = o(1)"));
}

TEST(ParseConfig, CollectsEveryViolation) {
    json j{{"hurst", {{"kind", "wiggly"}}},
           {"grid", {{"n", 1}, {"extra", true}}},
           {"thresholds", {{"p_value", 2.0}}},
           {"statistics", {{{"name", "lil"}, {"delta_lo", 1e-9}}, {{"name", "nonsense"}}}},
           {"mystery", 1}};
    auto r = mbm::harness::parse_config_checked(j.dump());
    EXPECT_FALSE(r.ok());
    EXPECT_FALSE(r.config.has_value());
    EXPECT_TRUE(has_violation(r.violations, "seed", "missing"));
    EXPECT_TRUE(has_violation(r.violations, "hurst.params", ""));
    EXPECT_TRUE(has_violation(r.violations, "grid.n", ""));
    EXPECT_TRUE(has_violation(r.violations, "grid.extra", "unknown key"));
    EXPECT_TRUE(has_violation(r.violations, "thresholds.p_value", ""));
    EXPECT_TRUE(has_violation(r.violations, "statistics[0].delta_lo", ""));
    EXPECT_TRUE(has_violation(r.violations, "statistics[1].name", "unknown statistic"));
    EXPECT_TRUE(has_violation(r.violations, "mystery", "unknown key"));
    try {
        mbm::harness::parse_config(j.dump());
        FAIL() << "expected ConfigError";
    } catch (const mbm::harness::ConfigError& e) {
        EXPECT_EQ(e.violations().size(), r.violations.size());
    }
}

TEST(ParseConfig, RepresentationRules) {
    auto j = base();
    j["representation"] = "fbm-exact";
    j["hurst"] = {{"kind", "linear"}, {"params", {0.3, 0.4}}};
    EXPECT_TRUE(has_violation(mbm::harness::parse_config_checked(j.dump()).violations, "representation", "constant"));
    j["representation"] = "spectral";
    EXPECT_FALSE(mbm::harness::parse_config_checked(j.dump()).ok());
}

TEST(ParseConfig, GridMustFitHorizon) {
    auto j = base();
    j["grid"] = {{"n", 101}, {"dt", 0.02}};
    EXPECT_TRUE(has_violation(mbm::harness::parse_config_checked(j.dump()).violations, "grid.n", "horizon"));
}

TEST(ParseConfig, MalformedTextReported) {
    auto r = mbm::harness::parse_config_checked("{ not json");
    ASSERT_EQ(r.violations.size(), 1u);
    EXPECT_EQ(r.violations[0].path, "<root>");
}

TEST(ParseConfig, OverridesWin) {
    auto text = mbm::harness::apply_overrides(minimal, {99u, 7u, std::string("elsewhere")});
    auto cfg = mbm::harness::parse_config(text);
    EXPECT_EQ(cfg.seed, 99u);
    EXPECT_EQ(cfg.replicas, 7u);
    EXPECT_EQ(cfg.output_dir, "elsewhere");
    EXPECT_FALSE(cfg.normalized.contains("output_dir"));
}

TEST(Seeds, ReplicaSeedsPairwiseDistinct) {
    std::vector<std::uint64_t> s(1000000);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = mbm::harness::replica_seed(12345, i);
    std::sort(s.begin(), s.end());
    EXPECT_EQ(std::adjacent_find(s.begin(), s.end()), s.end());
    std::set<std::uint64_t> stats;
    for (std::size_t i = 0; i < 64; ++i) stats.insert(mbm::harness::statistic_seed(12345, i));
    for (std::size_t i = 0; i < 1000; ++i) EXPECT_EQ(stats.count(mbm::harness::replica_seed(12345, i)), 0u);
}

TEST(Ensemble, SameSeedBitIdentical) {
    auto cfg = mbm::harness::parse_config(base(3).dump());
    auto a = mbm::harness::mc_ensemble(cfg);
    auto b = mbm::harness::mc_ensemble(cfg);
    ASSERT_EQ(a.ensemble.paths.size(), 50u);
    for (std::size_t i = 0; i < a.ensemble.paths.size(); ++i)
        ASSERT_EQ(a.ensemble.paths[i].values, b.ensemble.paths[i].values);
}

TEST(Ensemble, DifferentSeedsSameLaw) {
    auto j = base(1);
    j["replicas"] = 400;
    j["grid"] = {{"n", 257}};
    auto c1 = mbm::harness::parse_config(j.dump());
    j["seed"] = 2;
    auto c2 = mbm::harness::parse_config(j.dump());
    auto a = mbm::harness::mc_ensemble(c1), b = mbm::harness::mc_ensemble(c2);
    mbm::stats::Sample sa(400, 2), sb(400, 2);
    for (std::size_t i = 0; i < 400; ++i) {
        sa(i, 0) = a.ensemble.paths[i].values[128];
        sa(i, 1) = a.ensemble.paths[i].values[256];
        sb(i, 0) = b.ensemble.paths[i].values[128];
        sb(i, 1) = b.ensemble.paths[i].values[256];
    }
    EXPECT_NE(sa.data, sb.data);
    EXPECT_GT(mbm::stats::energy_test(sa, sb, 300, 4).p_value, 0.01);
}

TEST(Ensemble, FailureBudget) {
    auto j = base(8);
    j["replicas"] = 200;
    auto cfg = mbm::harness::parse_config(j.dump());
    auto good = mbm::harness::make_generator(cfg);
    std::size_t calls = 0;
    auto flaky = [&](std::uint64_t seed) {
        if (calls++ % 100 == 7) throw mbm::SynthesisError("injected");
        return good(seed);
    };
    auto r = mbm::harness::mc_ensemble(cfg, flaky);
    EXPECT_EQ(r.failures.size(), 2u);
    EXPECT_EQ(r.ensemble.paths.size(), 198u);
    EXPECT_EQ(r.failures[0].replica, 7u);
    EXPECT_EQ(r.failures[0].seed, mbm::harness::replica_seed(8, 7));

    calls = 0;
    auto broken = [&](std::uint64_t seed) {
        if (calls++ % 50 == 0) throw mbm::SynthesisError("injected");
        return good(seed);
    };
    EXPECT_THROW(mbm::harness::mc_ensemble(cfg, broken), mbm::harness::EnsembleError);
}

TEST(RunExperiment, OccupationIdentityOnBrownianMotionPasses) {
    auto cfg = mbm::harness::parse_config(minimal);
    cfg.output_dir = scratch("identity").string();
    auto rep = mbm::harness::run_experiment(cfg);
    ASSERT_EQ(rep.statistics.size(), 1u);
    EXPECT_EQ(rep.statistics[0].status, Status::pass) << rep.statistics[0].error;
    EXPECT_EQ(rep.exit_code, 0);
    EXPECT_TRUE(fs::exists(fs::path(cfg.output_dir) / "report.json"));
    EXPECT_LE(rep.statistics[0].estimates["max_rel_error"].get<double>(), 1e-12);
}

TEST(RunExperiment, WrongLilExponentIsStatisticalFailure) {
    auto j = base(21);
    j["replicas"] = 200;
    j["grid"] = {{"n", 4097}};
    j["statistics"] = {{{"name", "lil"}}, {{"name", "lil"}, {"exponent_offset", 0.2}}};
    auto cfg = mbm::harness::parse_config(j.dump());
    cfg.output_dir = scratch("lil").string();
    auto rep = mbm::harness::run_experiment(cfg);
    EXPECT_EQ(rep.statistics[0].status, Status::pass);
    EXPECT_EQ(rep.statistics[1].status, Status::fail);
    EXPECT_EQ(rep.exit_code, 2);
}

TEST(RunExperiment, EmptySelectionEchoesConfig) {
    auto cfg = mbm::harness::parse_config(base().dump());
    cfg.output_dir = scratch("empty").string();
    auto rep = mbm::harness::run_experiment(cfg);
    EXPECT_EQ(rep.exit_code, 0);
    EXPECT_TRUE(rep.document["statistics"].empty());
    EXPECT_TRUE(rep.document["ensemble"].is_null());
    EXPECT_EQ(rep.document["config"], cfg.normalized);
    EXPECT_EQ(mbm::harness::io::read_json(fs::path(cfg.output_dir) / "report.json"), rep.document);
}

TEST(RunExperiment, FailingStatisticIsIsolated) {
    auto j = base(4);
    j["statistics"] = {{{"name", "lass"}, {"rhos", {1e-9}}},
                       {{"name", "occupation-identity"}},
                       {{"name", "v-constant"}, {"hurst", 0.5}, {"representation", "harmonizable"},
                        {"expected", 2.5066282746310002}}};
    j["hurst"]["holder"] = {{"beta", 1.0}, {"constant", 0.0}};
    j["replicas"] = 200;
    auto cfg = mbm::harness::parse_config(j.dump());
    cfg.output_dir = scratch("isolation").string();
    auto rep = mbm::harness::run_experiment(cfg);
    EXPECT_EQ(rep.statistics[0].status, Status::error);
    EXPECT_FALSE(rep.statistics[0].error.empty());
    EXPECT_EQ(rep.statistics[1].status, Status::pass);
    EXPECT_EQ(rep.statistics[2].status, Status::pass);
    EXPECT_EQ(rep.exit_code, 1);
    for (const auto& f : rep.statistics[1].files) EXPECT_TRUE(fs::exists(fs::path(cfg.output_dir) / f));
    EXPECT_EQ(rep.document["summary"]["error"], 1);
}

TEST(RunExperiment, ExitCodeAggregation) {
    using mbm::harness::StatisticReport;
    std::vector<StatisticReport> s(3);
    EXPECT_EQ(mbm::harness::exit_code_for(s), 0);
    s[1].status = Status::fail;
    EXPECT_EQ(mbm::harness::exit_code_for(s), 2);
    s[2].status = Status::error;
    EXPECT_EQ(mbm::harness::exit_code_for(s), 1);
}

TEST(RunExperiment, ByteIdenticalOutputs) {
    auto j = base(17);
    j["statistics"] = {{{"name", "occupation-identity"}}, {{"name", "chung"}}, {{"name", "variance"}}};
    auto cfg = mbm::harness::parse_config(j.dump());
    mbm::harness::RunOptions opt;
    opt.timestamp = "fixed";
    auto d1 = scratch("det1"), d2 = scratch("det2");
    cfg.output_dir = d1.string();
    mbm::harness::run_experiment(cfg, opt);
    cfg.output_dir = d2.string();
    mbm::harness::run_experiment(cfg, opt);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(d1)) {
        ASSERT_TRUE(fs::exists(d2 / e.path().filename()));
        EXPECT_EQ(slurp(e.path()), slurp(d2 / e.path().filename())) << e.path();
        ++files;
    }
    EXPECT_EQ(files, 4u);
}

TEST(Io, PathRoundTripIsExact) {
    auto cfg = mbm::harness::parse_config(base(2).dump());
    auto p = mbm::harness::make_generator(cfg)(77);
    auto dir = scratch("io");
    mbm::harness::io::write_path(dir / "p.csv", p);
    auto q = mbm::harness::io::read_path(dir / "p.csv");
    EXPECT_EQ(q.values, p.values);
    EXPECT_EQ(q.grid.n, p.grid.n);
    EXPECT_EQ(q.meta.seed, 77u);
    EXPECT_EQ(q.meta.representation, p.meta.representation);
}

TEST(Io, CsvQuotingAndNumbers) {
    EXPECT_EQ(mbm::harness::io::csv_escape("plain"), "plain");
    EXPECT_EQ(mbm::harness::io::csv_escape("a,b"), "\"a,b\"");
    EXPECT_EQ(mbm::harness::io::csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
    EXPECT_EQ(mbm::harness::io::format_number(0.1), "0.10000000000000001");
    auto dir = scratch("csv");
    mbm::harness::io::CsvTable t{{"x,y", "z"}, {{0.1, -2.5e-300}, {1.0 / 3.0, 7}}};
    mbm::harness::io::write_csv(dir / "t.csv", t);
    auto back = mbm::harness::io::read_csv(dir / "t.csv");
    EXPECT_EQ(back.header, t.header);
    EXPECT_EQ(back.rows, t.rows);
}
