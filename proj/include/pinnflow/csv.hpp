#pragma once

#include <string>
#include <vector>

namespace pinnflow {

/// Shortest decimal form that parses back to the exact same double.
std::string format_double(double value);

/// One CSV table: header row plus string cells. Numeric cells are written
/// with format_double so a re-parse reproduces the exact values.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells) { rows.push_back(std::move(cells)); }
};

void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

/// Column index by name; throws ConfigError when missing.
std::size_t column_index(const CsvTable& table, const std::string& name);

} // namespace pinnflow
