#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace itsf {

// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

// Strict parsers; throw DataError with the offending token on failure.
double parse_double(std::string_view s);
long parse_long(std::string_view s);

// Splits one CSV line at commas. No quoting or escapes; none of the file
// formats here need them.
std::vector<std::string_view> split_csv_line(std::string_view line);

}  // namespace itsf
