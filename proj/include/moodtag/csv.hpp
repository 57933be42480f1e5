#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace moodtag::csv {

// Splits one record; double quotes delimit fields that contain commas or
// quotes, with "" as an escaped quote.
std::vector<std::string> split(std::string_view line);

// Quotes the field only when needed.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

// Reads a line, stripping a trailing '\r'. Returns false at end of input.
bool read_line(std::istream& in, std::string& line);

// printf("%.9g")
std::string format_number(double value);

// printf("%.17g"): parses back to the same double.
std::string format_exact(double value);

}  // namespace moodtag::csv
