#ifndef SEN_TEXT_IO_HPP
#define SEN_TEXT_IO_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sen {

/// Shortest decimal representation that round-trips the exact double value.
std::string format_double(double x);

/// Strict full-string parse; rejects trailing garbage and empty fields.
std::optional<double> parse_double(std::string_view s);

std::vector<std::string_view> split_fields(std::string_view line, char sep);

std::string_view trim(std::string_view s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace sen

#endif  // SEN_TEXT_IO_HPP
