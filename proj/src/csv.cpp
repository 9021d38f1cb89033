#include "scenekit/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "scenekit/errors.hpp"

namespace scenekit::csv {

namespace {

// Strips one trailing '\r' so CRLF input parses the same as LF.
std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

}  // namespace

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            break;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

Table parse_text(std::string_view text) {
    Table table;
    std::size_t line_no = 0;
    std::size_t start = 0;
    bool have_header = false;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        std::string_view line;
        if (end == std::string_view::npos) {
            if (start == text.size()) break;
            line = text.substr(start);
            start = text.size() + 1;
        } else {
            line = text.substr(start, end - start);
            start = end + 1;
        }
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        if (!have_header) {
            table.header = split(line, ',');
            have_header = true;
            continue;
        }
        auto fields = split(line, ',');
        if (fields.size() != table.header.size()) {
            throw Error(errc::unparseable_row,
                        "expected " + std::to_string(table.header.size()) + " fields, got " +
                            std::to_string(fields.size()),
                        line_no);
        }
        table.rows.push_back(std::move(fields));
        table.lines.push_back(line_no);
    }
    if (!have_header) throw Error(errc::unparseable_row, "empty file: no header row");
    return table;
}

Table read_table(const std::filesystem::path& path) {
    return parse_text(read_file(path));
}

std::size_t column_index(const Table& table, const std::string& name) {
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (table.header[i] == name) return i;
    }
    throw Error(errc::missing_column, "no column named '" + name + "'", 1);
}

double parse_double(std::string_view field, std::size_t line) {
    double value = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw Error(errc::unparseable_row, "not a number: '" + std::string(field) + "'", line);
    }
    return value;
}

long long parse_int(std::string_view field, std::size_t line) {
    long long value = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw Error(errc::unparseable_row, "not an integer: '" + std::string(field) + "'", line);
    }
    return value;
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

std::string join(const std::vector<std::string>& fields, char sep) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out.push_back(sep);
        out += fields[i];
    }
    return out;
}

void write_table(const std::filesystem::path& path,
                 const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
    std::string out = join(header, ',');
    out.push_back('\n');
    for (const auto& row : rows) {
        out += join(row, ',');
        out.push_back('\n');
    }
    write_file(path, out);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
    return fnv1a64(read_file(path));
}

std::string hex64(std::uint64_t value) {
    static const char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(errc::io_error, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw Error(errc::io_error, "read failed for " + path.string());
    return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(errc::io_error, "cannot open " + path.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(errc::io_error, "write failed for " + path.string());
}

}  // namespace scenekit::csv
