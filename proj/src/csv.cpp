#include "pinnflow/csv.hpp"

#include "pinnflow/util.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace pinnflow {

std::string format_double(double value) {
    char buf[40];
    // Try increasing precision until the value round-trips exactly.
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
        if (std::strtod(buf, nullptr) == value) {
            return buf;
        }
    }
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void write_csv(const std::string& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("write_csv: cannot open " + path);
    }
    const auto write_row = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) {
                out << ',';
            }
            out << cells[i];
        }
        out << '\n';
    };
    write_row(table.header);
    for (const auto& row : table.rows) {
        write_row(row);
    }
    if (!out) {
        throw ConfigError("write_csv: write failed for " + path);
    }
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("read_csv: cannot open " + path);
    }
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        if (!line.empty() && line.back() == ',') {
            cells.emplace_back();
        }
        if (first) {
            table.header = std::move(cells);
            first = false;
        } else {
            table.rows.push_back(std::move(cells));
        }
    }
    return table;
}

std::size_t column_index(const CsvTable& table, const std::string& name) {
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (table.header[i] == name) {
            return i;
        }
    }
    throw ConfigError("column_index: no column named " + name);
}

} // namespace pinnflow
