#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace curlog {

/// Calendar date with ISO-8601 (YYYY-MM-DD) text form.
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    static std::optional<Date> parse(std::string_view text);
    std::string to_string() const;

    auto operator<=>(const Date&) const = default;
};

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);
/// 16-hex-digit content fingerprint.
std::string fingerprint(std::string_view data);

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
std::vector<std::string> split_lines(std::string_view text);

/// Shortest text that parses back to the same double.
std::string format_double(double v);
/// Fixed-point text with the given number of decimals.
std::string format_fixed(double v, int decimals);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Timestamp recorded in artifacts. Honors SOURCE_DATE_EPOCH so repeated
/// runs stay byte-identical; falls back to the Unix epoch.
std::string artifact_timestamp();
/// Wall-clock UTC timestamp, used where audit trails need real time.
std::string now_timestamp();

/// Minimal RFC 4180 reader: returns one vector of fields per record along
/// with the 1-based line on which each record starts.
struct CsvRecord {
    std::size_t line = 0;
    std::vector<std::string> fields;
};
std::vector<CsvRecord> parse_csv(std::string_view text);
std::string csv_escape(std::string_view field);

}  // namespace curlog
