#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mbm/common.hpp"
#include "mbm/hurst.hpp"
#include "mbm/synth.hpp"

namespace mbm::harness {

using json = nlohmann::ordered_json;

inline constexpr int config_format_version = 1;
inline constexpr int report_format_version = 1;

struct ConfigViolation {
    std::string path;  // e.g. "statistics[2].deltas"
    std::string message;
};

class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(std::vector<ConfigViolation> violations);
    const std::vector<ConfigViolation>& violations() const { return violations_; }

private:
    std::vector<ConfigViolation> violations_;
};

struct Thresholds {
    double p_value = 0.01;
    double failure_budget = 0.01;  // fraction of replicas allowed to fail synthesis
};

struct LocalTimeSpec {
    double dx_scale = 1.0;  // dx = dx_scale * dt^{mean H}
    std::size_t time_stride = 1;
};

struct StatisticSpec {
    std::string name;
    json params;  // normalized, defaults filled in
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::size_t replicas = 100;
    std::string output_dir;
    hurst::HurstFunction hurst = hurst::HurstFunction::constant(0.5);
    Representation representation = Representation::moving_average;
    TimeGrid grid{0.0, 1.0 / 1024.0, 1025};
    synth::KernelQuadrature kernel;
    synth::SpectralQuadrature spectral;
    LocalTimeSpec local_time;
    Thresholds thresholds;
    std::vector<StatisticSpec> statistics;

    // normalized configuration with every default made explicit; output_dir is left out
    json normalized;
};

struct ParseResult {
    std::optional<ExperimentConfig> config;
    std::vector<ConfigViolation> violations;

    bool ok() const { return violations.empty(); }
};

// collects every violation instead of stopping at the first
ParseResult parse_config_checked(std::string_view text);
// throws ConfigError carrying all violations
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& file);

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> replicas;
    std::optional<std::string> output_dir;
};
// patch raw config text before validation; overrides win over file values
std::string apply_overrides(std::string_view text, const Overrides& o);

std::vector<std::string> statistic_names();

}  // namespace mbm::harness
