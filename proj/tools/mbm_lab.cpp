#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "mbm/harness/config.hpp"
#include "mbm/harness/experiment.hpp"
#include "mbm/harness/io.hpp"
#include "mbm/localtime.hpp"
#include "mbm/regularity.hpp"

namespace fs = std::filesystem;
using mbm::harness::json;

namespace {

constexpr const char* out_env = "MBM_LAB_OUT";

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> replicas;
};

void add_common(CLI::App* app, Common& c, bool config_required) {
    auto* opt = app->add_option("--config", c.config, "experiment config (JSON)");
    if (config_required) opt->required()->check(CLI::ExistingFile);
    app->add_option("--seed", c.seed, "master seed, overrides the config");
    app->add_option("--out", c.out, "output directory, overrides the config");
    app->add_option("--replicas", c.replicas, "ensemble size, overrides the config");
}

std::string read_text(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string default_out() {
    const char* env = std::getenv(out_env);
    return env && *env ? env : "mbm-out";
}

mbm::harness::ExperimentConfig load(const Common& c, const std::string& text) {
    auto patched = mbm::harness::apply_overrides(text, {c.seed, c.replicas, c.out});
    auto cfg = mbm::harness::parse_config(patched);
    if (cfg.output_dir.empty()) cfg.output_dir = default_out();
    return cfg;
}

std::string restrict_to(const std::string& text, const std::string& name) {
    json root = json::parse(text);
    json kept = json::array();
    if (root.contains("statistics") && root["statistics"].is_array())
        for (const auto& s : root["statistics"])
            if (s.is_object() && s.value("name", std::string()) == name) kept.push_back(s);
    if (kept.empty()) kept.push_back(json{{"name", name}});
    root["statistics"] = kept;
    return root.dump(2);
}

void report_failures(const mbm::harness::EnsembleResult& r) {
    for (const auto& f : r.failures)
        std::cerr << "replica " << f.replica << " (seed " << f.seed << ") failed: " << f.error << "\n";
}

int run_simulate(const Common& c, bool fields) {
    auto cfg = load(c, read_text(c.config));
    auto r = mbm::harness::mc_ensemble(cfg, fields);
    report_failures(r);
    const fs::path dir(cfg.output_dir);
    json index = json::array();
    for (std::size_t k = 0; k < r.ensemble.paths.size(); ++k) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%05zu", r.replica_index[k]);
        const std::string name = (fields ? "field_" : "path_") + std::string(buf) + ".csv";
        if (fields)
            mbm::harness::io::write_field(dir / name, r.ensemble.fields[k]);
        else
            mbm::harness::io::write_path(dir / name, r.ensemble.paths[k]);
        index.push_back({{"replica", r.replica_index[k]}, {"seed", r.ensemble.paths[k].meta.seed}, {"file", name}});
    }
    json failed = json::array();
    for (const auto& f : r.failures) failed.push_back({{"replica", f.replica}, {"seed", f.seed}, {"error", f.error}});
    mbm::harness::io::write_json(dir / (fields ? "fields.json" : "ensemble.json"),
                                 json{{"format_version", mbm::harness::report_format_version},
                                      {"config", cfg.normalized},
                                      {"replicas", index},
                                      {"failures", failed}});
    std::cout << "wrote " << index.size() << (fields ? " fields" : " paths") << " to " << dir.string() << "\n";
    return 0;
}

int run_verify(const Common& c, const std::string& statistic) {
    std::string text = read_text(c.config);
    if (!statistic.empty()) text = restrict_to(text, statistic);
    auto cfg = load(c, text);
    auto rep = mbm::harness::run_experiment(cfg);
    std::cout << mbm::harness::render_summary(rep.document);
    std::cout << "report: " << (rep.directory / "report.json").string() << "\n";
    return rep.exit_code;
}

int run_constants(const Common& c, double hurst, const std::string& rep, const std::string& grouping,
                  const std::vector<double>& b, double h) {
    namespace reg = mbm::regularity;
    if (!c.config.empty()) {
        auto cfg = load(c, read_text(c.config));
        hurst = cfg.hurst(cfg.grid.t0);
    }
    json out;
    out["hurst"] = hurst;
    auto add = [&](mbm::Representation r) {
        const std::string name = mbm::to_string(r);
        out["v_constant"][name] = {{"printed", reg::v_constant(hurst, r, reg::VGrouping::printed)},
                                   {"under_root", reg::v_constant(hurst, r, reg::VGrouping::under_root)}};
        if (grouping == "under-root")
            out["v_constant"][name]["selected"] = out["v_constant"][name]["under_root"];
        else
            out["v_constant"][name]["selected"] = out["v_constant"][name]["printed"];
    };
    if (rep.empty()) {
        add(mbm::Representation::moving_average);
        add(mbm::Representation::harmonizable);
    } else {
        add(mbm::representation_from_string(rep));
    }
    if (!b.empty()) out["dirichlet_integral"] = {{"b", b}, {"h", h}, {"value", mbm::localtime::dirichlet_integral(b, h)}};
    std::cout << out.dump(2) << "\n";
    if (c.out) mbm::harness::io::write_json(fs::path(*c.out) / "constants.json", out);
    return 0;
}

int run_report(const Common& c, const std::string& in) {
    std::string dir = in;
    if (dir.empty() && c.out) dir = *c.out;
    if (dir.empty() && !c.config.empty()) dir = load(c, read_text(c.config)).output_dir;
    if (dir.empty()) dir = default_out();
    const fs::path base(dir);
    json doc = mbm::harness::io::read_json(base / "report.json");
    std::string text = mbm::harness::render_summary(doc);
    std::size_t rows = 0;
    for (const auto& s : doc["statistics"])
        for (const auto& f : s["files"]) rows += mbm::harness::io::read_csv(base / f.get<std::string>()).rows.size();
    text += "curve rows " + std::to_string(rows) + "\n";
    std::cout << text;
    std::ofstream(base / "summary.txt") << text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mbm-lab: multifractional Brownian motion simulation and verification"};
    app.require_subcommand(1);

    Common sim_c, lt_c, ver_c, con_c, rep_c;
    auto* sim = app.add_subcommand("simulate", "generate an ensemble of sample paths");
    add_common(sim, sim_c, true);
    auto* ltc = app.add_subcommand("localtime", "generate paths and their local-time fields");
    add_common(ltc, lt_c, true);

    auto* ver = app.add_subcommand("verify", "run the configured statistics and write the report");
    add_common(ver, ver_c, true);
    std::string statistic;
    ver->add_option("--statistic", statistic, "run only this statistic")
        ->check(CLI::IsMember(mbm::harness::statistic_names()));

    auto* con = app.add_subcommand("constants", "evaluate the LIL constant and the Dirichlet integral");
    add_common(con, con_c, false);
    double hurst = 0.5, h = 1.0;
    std::string rep, grouping = "printed";
    std::vector<double> b;
    con->add_option("--hurst", hurst, "Hurst index")->check(CLI::Range(0.0, 1.0));
    con->add_option("--representation", rep, "moving-average or harmonizable")
        ->check(CLI::IsMember({"moving-average", "harmonizable"}));
    con->add_option("--grouping", grouping, "printed or under-root")->check(CLI::IsMember({"printed", "under-root"}));
    con->add_option("--b", b, "Dirichlet exponents")->delimiter(',');
    con->add_option("--length", h, "Dirichlet interval length h");

    auto* rpt = app.add_subcommand("report", "re-render a stored report");
    add_common(rpt, rep_c, false);
    std::string in;
    rpt->add_option("--in", in, "directory holding report.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*sim) return run_simulate(sim_c, false);
        if (*ltc) return run_simulate(lt_c, true);
        if (*ver) return run_verify(ver_c, statistic);
        if (*con) return run_constants(con_c, hurst, rep, grouping, b, h);
        if (*rpt) return run_report(rep_c, in);
    } catch (const mbm::harness::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
