#include "mbm/harness/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <memory>
#include <sstream>

#include "mbm/harness/io.hpp"
#include "mbm/random.hpp"
#include "mbm/synth.hpp"
#include "statistics.hpp"

namespace mbm::harness {

namespace fs = std::filesystem;

std::uint64_t replica_seed(std::uint64_t master, std::size_t index) { return split_seed(master, index); }

std::uint64_t statistic_seed(std::uint64_t master, std::size_t index) {
    return split_seed(master, (std::uint64_t{1} << 40) + index);
}

PathGenerator make_generator(const ExperimentConfig& cfg) {
    switch (cfg.representation) {
        case Representation::fbm_exact: {
            auto s = std::make_shared<synth::FbmSynthesizer>(cfg.hurst(cfg.grid.t0), cfg.grid);
            return [s](std::uint64_t seed) { return s->generate(seed); };
        }
        case Representation::moving_average:
        case Representation::riemann_liouville: {
            auto s = std::make_shared<synth::KernelSynthesizer>(cfg.hurst, cfg.grid, cfg.representation, cfg.kernel);
            return [s](std::uint64_t seed) { return s->generate(seed); };
        }
        case Representation::harmonizable: {
            auto s = std::make_shared<synth::HarmonizableSynthesizer>(cfg.hurst, cfg.grid, cfg.spectral);
            return [s](std::uint64_t seed) { return s->generate(seed); };
        }
    }
    throw std::invalid_argument("unsupported representation");
}

localtime::LocalTimeField field_for(const SamplePath& path, const ExperimentConfig& cfg) {
    const double mean_h = 0.5 * (cfg.hurst.mu() + cfg.hurst.nu());
    auto x = localtime::default_x_grid(path, mean_h, 0.0, cfg.local_time.dx_scale);
    localtime::FieldOptions fo;
    fo.time_stride = cfg.local_time.time_stride;
    return localtime::local_time_field(path, x, fo);
}

EnsembleResult mc_ensemble(const ExperimentConfig& cfg, bool with_fields) {
    return mc_ensemble(cfg, make_generator(cfg), with_fields);
}

EnsembleResult mc_ensemble(const ExperimentConfig& cfg, const PathGenerator& generate, bool with_fields) {
    EnsembleResult r;
    r.requested = cfg.replicas;
    r.ensemble.master_seed = cfg.seed;
    const auto allowed = static_cast<std::size_t>(std::floor(cfg.thresholds.failure_budget * static_cast<double>(cfg.replicas)));
    for (std::size_t i = 0; i < cfg.replicas; ++i) {
        const std::uint64_t seed = replica_seed(cfg.seed, i);
        try {
            SamplePath p = generate(seed);
            p.validate();
            if (with_fields) r.ensemble.fields.push_back(field_for(p, cfg));
            r.ensemble.paths.push_back(std::move(p));
            r.replica_index.push_back(i);
        } catch (const std::exception& e) {
            r.failures.push_back({i, seed, e.what()});
            if (r.failures.size() > allowed)
                throw EnsembleError(std::to_string(r.failures.size()) + " of " + std::to_string(cfg.replicas) +
                                    " replicas failed, over the budget of " + std::to_string(allowed) +
                                    "; first error: " + r.failures.front().error);
        }
    }
    return r;
}

std::string to_string(Status s) {
    switch (s) {
        case Status::pass: return "pass";
        case Status::fail: return "fail";
        case Status::error: return "error";
        case Status::info: return "info";
    }
    return "error";
}

int exit_code_for(const std::vector<StatisticReport>& stats) {
    bool failed = false;
    for (const auto& s : stats) {
        if (s.status == Status::error) return 1;
        if (s.status == Status::fail) failed = true;
    }
    return failed ? 2 : 0;
}

namespace {

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string file_stem(std::size_t index, const std::string& name, const std::string& table) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02zu", index);
    return std::string("stat_") + buf + "_" + name + "_" + table + ".csv";
}

json statistic_json(const StatisticReport& s, std::uint64_t seed) {
    json j{{"index", s.index}, {"name", s.name}, {"status", to_string(s.status)}, {"seed", seed},
           {"params", s.params}, {"estimates", s.estimates}, {"files", s.files}, {"notes", s.notes}};
    if (!s.error.empty()) j["error"] = s.error;
    return j;
}

}  // namespace

Report run_experiment(const ExperimentConfig& cfg, const RunOptions& opt) {
    Report rep;
    rep.directory = cfg.output_dir.empty() ? fs::path("mbm-out") : fs::path(cfg.output_dir);
    detail::RunContext ctx(cfg, cfg.seed);
    json stats_doc = json::array();

    for (std::size_t i = 0; i < cfg.statistics.size(); ++i) {
        const auto& entry = cfg.statistics[i];
        StatisticReport sr;
        sr.index = i;
        sr.name = entry.name;
        sr.params = entry.params;
        const std::uint64_t seed = statistic_seed(cfg.seed, i);
        try {
            auto stat = detail::make_statistic(entry.name);
            if (!stat) throw std::invalid_argument("unknown statistic " + entry.name);
            std::vector<ConfigViolation> sink;
            detail::Fields f(&entry.params, "statistics[" + std::to_string(i) + "]", sink);
            f.skip("name");
            stat->read(f, detail::ParseContext{cfg, true, i});
            if (!sink.empty()) throw ConfigError(sink);
            ctx.set_seed(seed);
            auto out = stat->run(ctx);
            sr.status = out.status;
            sr.estimates = std::move(out.estimates);
            sr.notes = std::move(out.notes);
            for (const auto& t : out.tables) {
                const std::string name = file_stem(i, entry.name, t.name);
                if (opt.write_files) io::write_csv(rep.directory / name, io::CsvTable{t.columns, t.rows});
                sr.files.push_back(name);
            }
        } catch (const std::exception& e) {
            sr.status = Status::error;
            sr.error = e.what();
        }
        stats_doc.push_back(statistic_json(sr, seed));
        rep.statistics.push_back(std::move(sr));
    }

    rep.exit_code = exit_code_for(rep.statistics);
    json summary{{"pass", 0}, {"fail", 0}, {"error", 0}, {"info", 0}};
    for (const auto& s : rep.statistics) summary[to_string(s.status)] = summary[to_string(s.status)].get<int>() + 1;
    summary["exit_code"] = rep.exit_code;

    json ens = nullptr;
    if (const auto* e = ctx.ensemble()) {
        json failed = json::array();
        for (const auto& f : e->failures) failed.push_back({{"replica", f.replica}, {"seed", f.seed}, {"error", f.error}});
        ens = json{{"requested", e->requested}, {"generated", e->ensemble.paths.size()}, {"failures", failed}};
    }

    rep.document = json{{"format_version", report_format_version},
                        {"generator", "mbm-lab"},
                        {"runtime",
                         {{"timestamp", opt.timestamp.empty() ? utc_now() : opt.timestamp},
                          {"replica_seed_rule", "splitmix64(seed ^ splitmix64(replica))"},
                          {"statistic_seed_rule", "splitmix64(seed ^ splitmix64(2^40 + index))"}}},
                        {"config", cfg.normalized},
                        {"ensemble", ens},
                        {"statistics", stats_doc},
                        {"summary", summary}};
    if (opt.write_files) io::write_json(rep.directory / "report.json", rep.document);
    return rep;
}

std::string render_summary(const json& report) {
    std::ostringstream os;
    os << "format_version " << report.value("format_version", 0) << "\n";
    if (report.contains("statistics")) {
        for (const auto& s : report["statistics"]) {
            os << "[" << s.value("index", 0) << "] " << s.value("name", std::string("?")) << ": "
               << s.value("status", std::string("?"));
            if (s.contains("error")) os << " (" << s["error"].get<std::string>() << ")";
            os << "\n";
            if (s.contains("estimates"))
                for (const auto& [k, v] : s["estimates"].items()) os << "    " << k << " = " << v.dump() << "\n";
        }
    }
    if (report.contains("summary")) os << "exit_code " << report["summary"].value("exit_code", 1) << "\n";
    return os.str();
}

}  // namespace mbm::harness
