#include "mbm/harness/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mbm::harness::io {

namespace fs = std::filesystem;

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

namespace {

std::ofstream open_out(const fs::path& file) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& s) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::runtime_error("bad number in CSV: " + s);
    return v;
}

}  // namespace

void write_csv(const fs::path& file, const CsvTable& table) {
    auto out = open_out(file);
    for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << csv_escape(table.header[i]);
    out << "\r\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
        out << "\r\n";
    }
}

CsvTable read_csv(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty CSV " + file.string());
    t.header = split_csv_line(line);
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv_line(line);
        if (cells.size() != t.header.size()) throw std::runtime_error("ragged CSV row in " + file.string());
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(parse_number(c));
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write_json(const fs::path& file, const json& doc) {
    auto out = open_out(file);
    out << doc.dump(2) << "\n";
}

json read_json(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    return json::parse(in);
}

fs::path sidecar(const fs::path& file) {
    fs::path p = file;
    p += ".json";
    return p;
}

json meta_json(const SamplePath& path) {
    const auto& m = path.meta;
    return json{{"representation", to_string(m.representation)},
                {"seed", m.seed},
                {"grid", {{"t0", path.grid.t0}, {"dt", path.grid.dt}, {"n", path.grid.n}}},
                {"hurst_at_start", m.hurst_at_start},
                {"t_past", m.t_past},
                {"omega_max", m.omega_max},
                {"n_freq", m.n_freq},
                {"substeps", m.substeps},
                {"relative_to_start", m.relative_to_start},
                {"warnings", m.warnings}};
}

void write_path(const fs::path& file, const SamplePath& path) {
    CsvTable t{{"t", "value"}, {}};
    t.rows.reserve(path.values.size());
    for (std::size_t k = 0; k < path.values.size(); ++k) t.rows.push_back({path.grid.at(k), path.values[k]});
    write_csv(file, t);
    write_json(sidecar(file), meta_json(path));
}

SamplePath read_path(const fs::path& file) {
    auto t = read_csv(file);
    if (t.header.size() != 2) throw std::runtime_error("path CSV needs columns t, value");
    json m = read_json(sidecar(file));
    SamplePath p;
    p.grid = TimeGrid{m["grid"]["t0"].get<double>(), m["grid"]["dt"].get<double>(), m["grid"]["n"].get<std::size_t>()};
    if (p.grid.n != t.rows.size()) throw std::runtime_error("path CSV length disagrees with its sidecar");
    for (const auto& r : t.rows) p.values.push_back(r[1]);
    p.meta.representation = representation_from_string(m["representation"].get<std::string>());
    p.meta.seed = m["seed"].get<std::uint64_t>();
    p.meta.hurst_at_start = m["hurst_at_start"].get<double>();
    p.meta.t_past = m["t_past"].get<double>();
    p.meta.omega_max = m["omega_max"].get<double>();
    p.meta.n_freq = m["n_freq"].get<std::size_t>();
    p.meta.substeps = m["substeps"].get<std::size_t>();
    p.meta.relative_to_start = m["relative_to_start"].get<bool>();
    p.meta.warnings = m["warnings"].get<std::vector<std::string>>();
    p.validate();
    return p;
}

void write_field(const fs::path& file, const localtime::LocalTimeField& field) {
    CsvTable t;
    t.header.push_back("t");
    for (std::size_t j = 0; j < field.x.m; ++j) t.header.push_back(format_number(field.x.center(j)));
    for (std::size_t k = 0; k < field.rows(); ++k) {
        std::vector<double> row{field.grid.at(k)};
        auto r = field.row(k);
        row.insert(row.end(), r.begin(), r.end());
        t.rows.push_back(std::move(row));
    }
    write_csv(file, t);
    write_json(sidecar(file), json{{"x_min", field.x.x_min},
                                   {"dx", field.x.dx},
                                   {"bins", field.x.m},
                                   {"grid", {{"t0", field.grid.t0}, {"dt", field.grid.dt}, {"n", field.grid.n}}},
                                   {"total_mass", field.total_mass}});
}

}  // namespace mbm::harness::io
