#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hypermatch/error.hpp"
#include "hypermatch/harness.hpp"

namespace hm::harness {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void Table::add(std::vector<double> row) {
    if (row.size() != columns.size())
        fail(ErrorKind::io, "table row has " + std::to_string(row.size()) + " values, expected " +
                                std::to_string(columns.size()));
    rows.push_back(std::move(row));
}

std::string Table::csv() const {
    std::string out = schema_line;
    out += '\n';
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (c) out += ',';
        out += columns[c];
    }
    out += '\n';
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (c) out += ',';
            out += fmt(r[c]);
        }
        out += '\n';
    }
    return out;
}

void Table::write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorKind::io, "cannot write '" + path + "'");
    f << csv();
    if (!f) fail(ErrorKind::io, "write failed for '" + path + "'");
}

json Table::to_json() const {
    json rows_j = json::array();
    for (const auto& r : rows) {
        json o = json::object();
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (std::isfinite(r[c])) o[columns[c]] = r[c];
            else o[columns[c]] = nullptr;
        }
        rows_j.push_back(o);
    }
    return rows_j;
}

std::vector<double> Table::column(const std::string& name) const {
    for (std::size_t c = 0; c < columns.size(); ++c)
        if (columns[c] == name) {
            std::vector<double> v;
            v.reserve(rows.size());
            for (const auto& r : rows) v.push_back(r[c]);
            return v;
        }
    fail(ErrorKind::io, "no column '" + name + "'");
}

Table read_table(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(ErrorKind::io, "cannot open '" + path + "'");
    std::string line;
    if (!std::getline(f, line) || line != schema_line)
        fail(ErrorKind::io, "'" + path + "' lacks the schema line");
    Table t;
    if (!std::getline(f, line)) fail(ErrorKind::io, "'" + path + "' has no header");
    {
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) t.columns.push_back(col);
    }
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
        t.add(std::move(row));
    }
    return t;
}

}  // namespace hm::harness
