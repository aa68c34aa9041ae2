#pragma once

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "diffphy/errors.hpp"
#include "diffphy/io/file_io.hpp"

namespace diffphy::io {

/// Numeric-or-text cell. Doubles are serialized with 17 significant
/// digits so a read-back reproduces them bit-exactly.
using Cell = std::variant<double, std::string>;

struct Column {
    std::string name;
    std::string unit;  // empty for dimensionless / text columns
};

struct ResultTable {
    std::vector<Column> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::pair<std::string, std::string>> metadata;

    void add_row(std::vector<Cell> row) {
        if (row.size() != columns.size())
            throw DimensionError("ResultTable: row arity " + std::to_string(row.size()) +
                                 " != schema arity " + std::to_string(columns.size()));
        rows.push_back(std::move(row));
    }
    void add_metadata(const std::string& key, const std::string& value) {
        metadata.emplace_back(key, value);
    }
};

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") != std::string::npos)
        throw IoError("CSV field contains a delimiter: '" + s + "'");
    return s;
}

inline std::string cell_text(const Cell& cell) {
    if (std::holds_alternative<double>(cell)) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", std::get<double>(cell));
        return buf;
    }
    return csv_field(std::get<std::string>(cell));
}

}  // namespace detail

/// Renders the table: metadata as leading '#' comment lines, then a header
/// row (column names, units in parentheses), then data rows.
inline std::string format_csv(const ResultTable& table) {
    std::string out;
    for (const auto& [k, v] : table.metadata) out += "# " + k + " = " + v + "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) out += ",";
        out += detail::csv_field(table.columns[i].name);
        if (!table.columns[i].unit.empty()) out += "(" + detail::csv_field(table.columns[i].unit) + ")";
    }
    out += "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ",";
            out += detail::cell_text(row[i]);
        }
        out += "\n";
    }
    return out;
}

/// Atomically writes the CSV file.
inline void write_results(const ResultTable& table, const std::filesystem::path& path) {
    write_file_atomic(path, format_csv(table));
}

/// Read-back view of an emitted CSV, all cells as raw strings.
struct CsvFile {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline CsvFile read_csv(const std::filesystem::path& path) {
    CsvFile out;
    std::stringstream ss(read_file(path));
    std::string line;
    bool header_seen = false;
    while (std::getline(ss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::size_t eq = line.find('=');
            if (eq != std::string::npos) {
                std::string k = line.substr(1, eq - 1);
                std::string v = line.substr(eq + 1);
                auto trim = [](std::string& s) {
                    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
                    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
                };
                trim(k);
                trim(v);
                out.metadata.emplace_back(k, v);
            }
            continue;
        }
        std::vector<std::string> fields;
        std::string field;
        std::stringstream ls(line);
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (line.back() == ',') fields.push_back("");
        if (!header_seen) {
            out.header = std::move(fields);
            header_seen = true;
        } else {
            out.rows.push_back(std::move(fields));
        }
    }
    return out;
}

}  // namespace diffphy::io
