#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rrt::csv {

struct Row {
    std::size_t line = 0;  // 1-based line number in the source
    std::vector<std::string> fields;
};

struct Table {
    std::string source;  // file name or label, used in error messages
    std::vector<std::string> header;
    std::vector<Row> rows;

    /// Index of a header column, if present. Matching is exact after trimming.
    [[nodiscard]] std::optional<std::size_t> column(std::string_view name) const;
};

/// Reads a delimited table with a header row. Blank lines are skipped.
Table read(std::istream& in, char delimiter, std::string source);
Table read_file(const std::string& path, char delimiter);

std::vector<std::string> split_line(std::string_view line, char delimiter);

/// Parses a decimal number; throws DataError naming source and line on failure.
double parse_number(std::string_view field, const Table& table, const Row& row);

/// Round-trip exact formatting ("%.17g"), used for canonical files.
std::string exact(double value);

/// Fixed-precision formatting for human-facing tables.
std::string fixed(double value, int precision);

}  // namespace rrt::csv
