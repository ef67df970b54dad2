#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qdyn/errors.hpp"

namespace qdyn::cli {

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int column_index(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i] == name) return static_cast<int>(i);
        }
        return -1;
    }
};

/// Full 17-significant-digit floats so golden files notice any numerical
/// change; the summary carries human-friendly rounded values instead.
inline void write_csv(const std::filesystem::path& path, const Table& table) {
    std::ofstream out(path);
    if (!out) throw ArgumentError("cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        out << (i ? "," : "") << table.columns[i];
    }
    out << "\n";
    char buf[64];
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
            out << (i ? "," : "") << buf;
        }
        out << "\n";
    }
}

inline Table read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open " + path.string());
    Table table;
    std::string line;
    if (!std::getline(in, line)) throw ArgumentError("empty csv file: " + path.string());
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) table.columns.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row_stream(line);
        std::vector<double> row;
        while (std::getline(row_stream, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != table.columns.size()) {
            throw ArgumentError("ragged csv row in " + path.string());
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace qdyn::cli
