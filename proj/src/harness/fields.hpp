#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "mbm/harness/config.hpp"

namespace mbm::harness::detail {

// Reads one JSON object, records every problem with its path and
// mirrors the effective values (defaults included) into `out`.
class Fields {
public:
    Fields(const json* obj, std::string path, std::vector<ConfigViolation>& sink);

    bool has(const std::string& key) const;
    double real(const std::string& key, double def);
    std::int64_t integer(const std::string& key, std::int64_t def);
    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t def, bool required = false);
    std::string text(const std::string& key, const std::string& def);
    bool flag(const std::string& key, bool def);
    std::vector<double> reals(const std::string& key, const std::vector<double>& def);
    std::vector<int> ints(const std::string& key, const std::vector<int>& def);
    // sub-object reader; an absent key gives an empty object
    Fields object(const std::string& key);
    // finishes the child and stores its effective values under key
    void adopt(const std::string& key, Fields& child);
    void skip(const std::string& key);

    void fail(const std::string& key, const std::string& message);
    void require(bool cond, const std::string& key, const std::string& message);
    std::string path_of(const std::string& key) const;

    // flags keys that were never read
    void finish();
    json& out() { return out_; }
    std::vector<ConfigViolation>& sink() { return *sink_; }

private:
    const json* find(const std::string& key);

    const json* obj_;
    std::string path_;
    std::vector<ConfigViolation>* sink_;
    std::set<std::string> seen_;
    json out_ = json::object();
};

}  // namespace mbm::harness::detail
