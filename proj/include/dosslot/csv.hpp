#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dosslot::csv {

// Minimal RFC 4180 reader/writer: comma separated, double-quote escaping,
// quoted fields may not span lines.

std::vector<std::string> split_line(std::string_view line);

// Reads the next non-empty line (CR stripped). Returns nullopt at EOF.
std::optional<std::string> next_line(std::istream& in);

std::string quote(std::string_view field);

std::string join(const std::vector<std::string>& fields);

// Shortest round-trip decimal representation.
std::string format_real(double v);

// Throws std::invalid_argument unless the whole of text parses.
double parse_real(std::string_view text);
long long parse_int(std::string_view text);

}  // namespace dosslot::csv
