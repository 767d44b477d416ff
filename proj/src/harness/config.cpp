#include "mbm/harness/config.hpp"

#include <fstream>
#include <sstream>

#include "fields.hpp"
#include "statistics.hpp"

namespace mbm::harness {

using detail::Fields;

namespace {

std::string describe(const std::vector<ConfigViolation>& v) {
    std::string s = "invalid configuration (" + std::to_string(v.size()) + " problem" + (v.size() == 1 ? "" : "s") + ")";
    for (const auto& x : v) s += "\n  " + x.path + ": " + x.message;
    return s;
}

std::string join(const std::vector<std::string>& names) {
    std::string s;
    for (const auto& n : names) s += (s.empty() ? "" : ", ") + n;
    return s;
}

std::size_t as_count(std::int64_t v, std::int64_t floor) { return static_cast<std::size_t>(std::max(v, floor)); }

}  // namespace

ConfigError::ConfigError(std::vector<ConfigViolation> violations)
    : std::invalid_argument(describe(violations)), violations_(std::move(violations)) {}

std::vector<std::string> statistic_names() { return detail::registered_statistics(); }

ParseResult parse_config_checked(std::string_view text) {
    ParseResult res;
    auto& v = res.violations;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        v.push_back({"<root>", std::string("malformed JSON: ") + e.what()});
        return res;
    }
    if (!root.is_object()) {
        v.push_back({"<root>", "expected an object"});
        return res;
    }

    ExperimentConfig cfg;
    Fields top(&root, "", v);
    const auto version = top.integer("format_version", config_format_version);
    top.require(version == config_format_version, "format_version",
                "unsupported version " + std::to_string(version) + ", expected " +
                    std::to_string(config_format_version));
    cfg.seed = top.unsigned_integer("seed", 0, true);
    const auto replicas = top.integer("replicas", 100);
    top.require(replicas >= 1, "replicas", "must be at least 1");
    cfg.replicas = as_count(replicas, 1);
    cfg.output_dir = top.text("output_dir", "");

    // hurst
    if (!top.has("hurst")) v.push_back({"hurst", "required key is missing"});
    Fields hf = top.object("hurst");
    const std::string kind = hf.text("kind", "constant");
    const auto params = hf.reals("params", {0.5});
    const double horizon = hf.real("horizon", 1.0);
    bool hurst_valid = false;
    try {
        cfg.hurst = hurst::HurstFunction::make(hurst::kind_from_string(kind), params, horizon);
        hurst_valid = true;
    } catch (const std::exception& e) {
        hf.fail("params", e.what());
    }
    const bool holder_declared = hf.has("holder");
    if (holder_declared) {
        Fields hold = hf.object("holder");
        const double beta = hold.real("beta", 1.0);
        const double c = hold.real("constant", 0.0);
        if (hurst_valid) {
            try {
                cfg.hurst = cfg.hurst.with_holder(beta, c);
            } catch (const std::exception& e) {
                hold.fail("beta", e.what());
                hurst_valid = false;
            }
        }
        if (hurst_valid) {
            if (!(cfg.hurst.nu() < beta)) {
                hold.fail("beta", "condition (H_beta) requires sup H < beta, got sup H = " +
                                      std::to_string(cfg.hurst.nu()) + " >= beta = " + std::to_string(beta));
            } else {
                std::vector<double> ts(2049);
                for (std::size_t i = 0; i < ts.size(); ++i)
                    ts[i] = horizon * static_cast<double>(i) / static_cast<double>(ts.size() - 1);
                auto rep = hurst::check_condition_beta(cfg.hurst, ts);
                if (!rep.holds)
                    hold.fail("constant", "condition (H_beta) fails: |H(t) - H(s)| / |t - s|^beta reaches " +
                                              std::to_string(rep.worst_ratio) + " > constant");
            }
        }
        hf.adopt("holder", hold);
    }
    top.adopt("hurst", hf);

    // representation
    const std::string rep = top.text("representation", "moving-average");
    try {
        cfg.representation = representation_from_string(rep);
        if (cfg.representation == Representation::fbm_exact && hurst_valid && !cfg.hurst.is_constant())
            top.fail("representation", "fbm-exact needs a constant hurst function");
    } catch (const std::exception& e) {
        top.fail("representation", e.what());
    }

    // grid
    Fields gf = top.object("grid");
    const double t0 = gf.real("t0", 0.0);
    const auto n = gf.integer("n", 1025);
    gf.require(t0 >= 0, "t0", "must be nonnegative");
    gf.require(n >= 2, "n", "needs at least 2 points");
    const double def_dt = n >= 2 && horizon > t0 ? (horizon - t0) / static_cast<double>(n - 1) : 1.0;
    const double dt = gf.real("dt", def_dt);
    gf.require(dt > 0, "dt", "must be positive");
    cfg.grid = TimeGrid{t0, dt, as_count(n, 2)};
    if (hurst_valid && dt > 0 && n >= 2)
        gf.require(cfg.grid.end() <= horizon * (1 + 1e-12), "n",
                   "grid end " + std::to_string(cfg.grid.end()) + " exceeds hurst.horizon " + std::to_string(horizon));
    top.adopt("grid", gf);

    // quadrature
    Fields qf = top.object("quadrature");
    cfg.kernel.t_past = qf.real("t_past", cfg.kernel.t_past);
    cfg.kernel.substeps = as_count(qf.integer("substeps", 2), 0);
    cfg.spectral.omega_max = qf.real("omega_max", cfg.spectral.omega_max);
    cfg.spectral.n_freq = as_count(qf.integer("n_freq", static_cast<std::int64_t>(cfg.spectral.n_freq)), 0);
    try {
        cfg.kernel.validate();
    } catch (const std::exception& e) {
        qf.fail("t_past", e.what());
    }
    try {
        cfg.spectral.validate();
    } catch (const std::exception& e) {
        qf.fail("omega_max", e.what());
    }
    top.adopt("quadrature", qf);

    Fields lf = top.object("local_time");
    cfg.local_time.dx_scale = lf.real("dx_scale", 1.0);
    lf.require(cfg.local_time.dx_scale > 0, "dx_scale", "must be positive");
    const auto stride = lf.integer("time_stride", 1);
    lf.require(stride >= 1, "time_stride", "must be at least 1");
    cfg.local_time.time_stride = as_count(stride, 1);
    top.adopt("local_time", lf);

    Fields tf = top.object("thresholds");
    cfg.thresholds.p_value = tf.real("p_value", 0.01);
    tf.require(cfg.thresholds.p_value > 0 && cfg.thresholds.p_value < 1, "p_value", "must lie in (0, 1)");
    cfg.thresholds.failure_budget = tf.real("failure_budget", 0.01);
    tf.require(cfg.thresholds.failure_budget >= 0 && cfg.thresholds.failure_budget < 1, "failure_budget",
               "must lie in [0, 1)");
    top.adopt("thresholds", tf);

    // statistics
    top.skip("statistics");
    json stats_out = json::array();
    if (root.contains("statistics")) {
        const json& arr = root["statistics"];
        if (!arr.is_array()) {
            v.push_back({"statistics", "expected an array"});
        } else {
            detail::ParseContext pc{cfg, hurst_valid, 0};
            for (std::size_t i = 0; i < arr.size(); ++i) {
                const std::string path = "statistics[" + std::to_string(i) + "]";
                Fields sf(&arr[i], path, v);
                const std::string name = sf.text("name", "");
                auto stat = detail::make_statistic(name);
                if (!stat) {
                    sf.fail("name", "unknown statistic '" + name + "'; expected one of " + join(statistic_names()));
                    continue;
                }
                pc.index = i;
                stat->read(sf, pc);
                sf.finish();
                cfg.statistics.push_back({name, sf.out()});
                stats_out.push_back(sf.out());
            }
        }
    }
    top.finish();
    cfg.normalized = top.out();
    cfg.normalized.erase("output_dir");
    cfg.normalized["statistics"] = stats_out;
    if (v.empty()) res.config = std::move(cfg);
    return res;
}

ExperimentConfig parse_config(std::string_view text) {
    auto r = parse_config_checked(text);
    if (!r.ok()) throw ConfigError(std::move(r.violations));
    return std::move(*r.config);
}

ExperimentConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open config file " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string apply_overrides(std::string_view text, const Overrides& o) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error&) {
        return std::string(text);
    }
    if (!root.is_object()) return std::string(text);
    if (o.seed) root["seed"] = *o.seed;
    if (o.replicas) root["replicas"] = *o.replicas;
    if (o.output_dir) root["output_dir"] = *o.output_dir;
    return root.dump(2);
}

}  // namespace mbm::harness
