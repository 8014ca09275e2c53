#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace soilph::csv {

// Splits one CSV record. Double-quoted cells may contain commas and "" escapes;
// embedded newlines are not supported.
std::vector<std::string> split_line(std::string_view line);

// Quotes the cell only when it contains a comma, quote or leading/trailing space.
std::string quote(std::string_view cell);

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

// Strict parse of a whole (trimmed) cell; nullopt for empty or non-numeric text.
std::optional<double> parse_double(std::string_view cell);

std::vector<std::string> split_list(std::string_view text, char sep = ',');

}  // namespace soilph::csv
