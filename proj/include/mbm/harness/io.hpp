#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mbm/common.hpp"
#include "mbm/harness/config.hpp"
#include "mbm/localtime.hpp"

namespace mbm::harness::io {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

// %.17g, so values round-trip exactly
std::string format_number(double v);
std::string csv_escape(const std::string& field);

void write_csv(const std::filesystem::path& file, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& file);

void write_json(const std::filesystem::path& file, const json& doc);
json read_json(const std::filesystem::path& file);

json meta_json(const SamplePath& path);
// columns t, value; metadata goes to <file>.json next to it
void write_path(const std::filesystem::path& file, const SamplePath& path);
SamplePath read_path(const std::filesystem::path& file);

// one row per stored time: t, then L(t, x_j) for each bin center x_j; bin layout in the sidecar
void write_field(const std::filesystem::path& file, const localtime::LocalTimeField& field);

std::filesystem::path sidecar(const std::filesystem::path& file);

}  // namespace mbm::harness::io
