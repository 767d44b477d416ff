#include "fields.hpp"

#include <cmath>
#include <limits>

namespace mbm::harness::detail {

Fields::Fields(const json* obj, std::string path, std::vector<ConfigViolation>& sink)
    : obj_(obj), path_(std::move(path)), sink_(&sink) {
    if (obj_ && !obj_->is_object()) {
        sink_->push_back({path_.empty() ? "<root>" : path_, "expected an object"});
        obj_ = nullptr;
    }
}

std::string Fields::path_of(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

void Fields::fail(const std::string& key, const std::string& message) { sink_->push_back({path_of(key), message}); }

void Fields::require(bool cond, const std::string& key, const std::string& message) {
    if (!cond) fail(key, message);
}

bool Fields::has(const std::string& key) const { return obj_ && obj_->contains(key); }

const json* Fields::find(const std::string& key) {
    seen_.insert(key);
    if (!obj_) return nullptr;
    auto it = obj_->find(key);
    return it == obj_->end() ? nullptr : &*it;
}

void Fields::skip(const std::string& key) { seen_.insert(key); }

double Fields::real(const std::string& key, double def) {
    double v = def;
    if (const json* j = find(key)) {
        if (j->is_number() && std::isfinite(j->get<double>()))
            v = j->get<double>();
        else
            fail(key, "expected a finite number");
    }
    out_[key] = v;
    return v;
}

std::int64_t Fields::integer(const std::string& key, std::int64_t def) {
    std::int64_t v = def;
    if (const json* j = find(key)) {
        if (j->is_number_integer())
            v = j->get<std::int64_t>();
        else if (j->is_number_float() && std::floor(j->get<double>()) == j->get<double>() &&
                 std::abs(j->get<double>()) < 9e15)
            v = static_cast<std::int64_t>(j->get<double>());
        else
            fail(key, "expected an integer");
    }
    out_[key] = v;
    return v;
}

std::uint64_t Fields::unsigned_integer(const std::string& key, std::uint64_t def, bool required) {
    std::uint64_t v = def;
    if (const json* j = find(key)) {
        if (j->is_number_unsigned())
            v = j->get<std::uint64_t>();
        else if (j->is_number_integer() && j->get<std::int64_t>() >= 0)
            v = static_cast<std::uint64_t>(j->get<std::int64_t>());
        else
            fail(key, "expected a nonnegative integer");
    } else if (required) {
        fail(key, "required key is missing");
    }
    out_[key] = v;
    return v;
}

std::string Fields::text(const std::string& key, const std::string& def) {
    std::string v = def;
    if (const json* j = find(key)) {
        if (j->is_string())
            v = j->get<std::string>();
        else
            fail(key, "expected a string");
    }
    out_[key] = v;
    return v;
}

bool Fields::flag(const std::string& key, bool def) {
    bool v = def;
    if (const json* j = find(key)) {
        if (j->is_boolean())
            v = j->get<bool>();
        else
            fail(key, "expected true or false");
    }
    out_[key] = v;
    return v;
}

std::vector<double> Fields::reals(const std::string& key, const std::vector<double>& def) {
    std::vector<double> v = def;
    if (const json* j = find(key)) {
        bool good = j->is_array();
        std::vector<double> read;
        if (good) {
            for (const auto& e : *j) {
                if (!e.is_number() || !std::isfinite(e.get<double>())) {
                    good = false;
                    break;
                }
                read.push_back(e.get<double>());
            }
        }
        if (good)
            v = std::move(read);
        else
            fail(key, "expected an array of finite numbers");
    }
    out_[key] = v;
    return v;
}

std::vector<int> Fields::ints(const std::string& key, const std::vector<int>& def) {
    std::vector<int> v = def;
    if (const json* j = find(key)) {
        bool good = j->is_array();
        std::vector<int> read;
        if (good) {
            for (const auto& e : *j) {
                if (!e.is_number_integer() || std::abs(e.get<std::int64_t>()) > std::numeric_limits<int>::max()) {
                    good = false;
                    break;
                }
                read.push_back(e.get<int>());
            }
        }
        if (good)
            v = std::move(read);
        else
            fail(key, "expected an array of integers");
    }
    out_[key] = v;
    return v;
}

Fields Fields::object(const std::string& key) {
    const json* j = find(key);
    if (j && !j->is_object()) {
        fail(key, "expected an object");
        j = nullptr;
    }
    return Fields(j, path_of(key), *sink_);
}

void Fields::adopt(const std::string& key, Fields& child) {
    child.finish();
    out_[key] = child.out();
}

void Fields::finish() {
    if (!obj_) return;
    for (auto it = obj_->begin(); it != obj_->end(); ++it)
        if (!seen_.count(it.key())) fail(it.key(), "unknown key");
}

}  // namespace mbm::harness::detail
