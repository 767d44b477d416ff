#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbm/harness/config.hpp"
#include "mbm/localtime.hpp"

namespace mbm::harness {

// replica seed = splitmix64(master ^ splitmix64(index))
std::uint64_t replica_seed(std::uint64_t master, std::size_t index);
// seed of the statistic at position index in the selection, disjoint from replica seeds for index < 2^40
std::uint64_t statistic_seed(std::uint64_t master, std::size_t index);

struct ReplicaFailure {
    std::size_t replica = 0;
    std::uint64_t seed = 0;
    std::string error;
};

struct EnsembleResult {
    localtime::Ensemble ensemble;
    std::vector<std::size_t> replica_index;  // index of each generated path
    std::vector<ReplicaFailure> failures;
    std::size_t requested = 0;
};

class EnsembleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using PathGenerator = std::function<SamplePath(std::uint64_t seed)>;

// the synthesizer selected by the config, built once and reused across replicas
PathGenerator make_generator(const ExperimentConfig& cfg);
localtime::LocalTimeField field_for(const SamplePath& path, const ExperimentConfig& cfg);

// throws EnsembleError when more than the failure budget of replicas fail
EnsembleResult mc_ensemble(const ExperimentConfig& cfg, bool with_fields = false);
EnsembleResult mc_ensemble(const ExperimentConfig& cfg, const PathGenerator& generate, bool with_fields = false);

enum class Status { pass, fail, error, info };
std::string to_string(Status s);

struct StatisticReport {
    std::size_t index = 0;
    std::string name;
    Status status = Status::info;
    json params;
    json estimates = json::object();
    std::vector<std::string> files;
    std::vector<std::string> notes;
    std::string error;
};

struct Report {
    json document;
    std::vector<StatisticReport> statistics;
    int exit_code = 0;
    std::filesystem::path directory;
};

struct RunOptions {
    bool write_files = true;
    std::string timestamp;  // empty: current UTC time
};

// 0 when every verdict passes, 2 on statistical failure, 1 on execution error
int exit_code_for(const std::vector<StatisticReport>& stats);

Report run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {});

// plain-text table of a stored report, one line per statistic
std::string render_summary(const json& report);

}  // namespace mbm::harness
