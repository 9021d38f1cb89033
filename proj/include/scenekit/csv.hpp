#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace scenekit::csv {

// Comma-separated table with a mandatory header row. Fields are taken
// verbatim: no quoting or escaping, so field values must not contain commas.
// Lists inside a field use ';' as the separator.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    // 1-based file line for each row, for error reporting. Blank lines are
    // skipped, so these need not be consecutive.
    std::vector<std::size_t> lines;
};

Table parse_text(std::string_view text);
Table read_table(const std::filesystem::path& path);

// Index of `name` in the header; throws MissingColumn otherwise.
std::size_t column_index(const Table& table, const std::string& name);

std::vector<std::string> split(std::string_view s, char sep);

// Number parsing with position-aware errors. The whole field must parse.
double parse_double(std::string_view field, std::size_t line);
long long parse_int(std::string_view field, std::size_t line);

// Shortest decimal form that round-trips to the same double. Used everywhere
// a number is written so reruns are byte-identical.
std::string format_double(double value);

std::string join(const std::vector<std::string>& fields, char sep);

void write_table(const std::filesystem::path& path,
                 const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows);

// FNV-1a over raw bytes; manifest hashes use the hex form.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);
std::string hex64(std::uint64_t value);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace scenekit::csv
