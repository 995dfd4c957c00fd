#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

namespace lfmo::harness {

inline constexpr const char* tool_version = "0.1.0";
inline constexpr const char* results_schema_id = "lfmo-results/1";

/// Shortest decimal that round-trips to the same double.
inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc{}) return "nan";
    return {buf, end};
}

inline std::string format_number(std::size_t x) { return std::to_string(x); }

inline std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t x) {
    char buf[17];
    auto [end, ec] = std::to_chars(buf, buf + 16, x, 16);
    return std::string(static_cast<std::size_t>(16 - (end - buf)), '0') + std::string(buf, end);
}

/*!
 * CSV-shaped result grid.
 *
 * Every row repeats its full parameter tuple. Metadata becomes leading
 * "# key=value" lines; the "generated" line holds the wall-clock time and is
 * the only part of the output that differs between identical runs.
 */
struct ResultTable {
    std::string kind;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::pair<std::string, std::string>> metadata;

    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        return columns.size();
    }
};

inline std::string csv_escape(const std::string& cell) {
    if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline void write_csv(std::ostream& out, const ResultTable& table, bool with_timestamp = true) {
    for (const auto& [key, value] : table.metadata) out << "# " << key << '=' << value << '\n';
    if (with_timestamp) {
        const auto now = std::chrono::system_clock::now();
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
        out << "# generated=" << secs << '\n';
    }
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        out << (i ? "," : "") << csv_escape(table.columns[i]);
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_escape(row[i]);
        out << '\n';
    }
}

}  // namespace lfmo::harness
