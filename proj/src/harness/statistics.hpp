#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fields.hpp"
#include "mbm/harness/experiment.hpp"

namespace mbm::harness::detail {

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct Outcome {
    Status status = Status::info;
    json estimates = json::object();
    std::vector<Table> tables;
    std::vector<std::string> notes;
};

// what a statistic may look at while its parameters are validated
struct ParseContext {
    const ExperimentConfig& cfg;
    bool hurst_valid = false;
    std::size_t index = 0;
};

class RunContext {
public:
    RunContext(const ExperimentConfig& cfg, std::uint64_t seed) : cfg_(cfg), seed_(seed) {}

    const ExperimentConfig& config() const { return cfg_; }
    std::uint64_t seed() const { return seed_; }
    std::span<const SamplePath> paths();
    // built on demand; the whole ensemble of fields rarely fits in memory
    localtime::LocalTimeField field(std::size_t replica);
    const EnsembleResult* ensemble() const { return ensemble_ ? &*ensemble_ : nullptr; }
    void set_seed(std::uint64_t s) { seed_ = s; }

private:
    const ExperimentConfig& cfg_;
    std::uint64_t seed_;
    std::optional<EnsembleResult> ensemble_;
    std::string ensemble_error_;
};

class Statistic {
public:
    virtual ~Statistic() = default;
    virtual void read(Fields& f, const ParseContext& pc) = 0;
    virtual Outcome run(RunContext& rc) = 0;
};

std::unique_ptr<Statistic> make_statistic(const std::string& name);
std::vector<std::string> registered_statistics();

}  // namespace mbm::harness::detail
