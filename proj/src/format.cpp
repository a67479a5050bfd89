#include "itsf/format.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

#include "itsf/errors.hpp"

namespace itsf {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw DataError("not a number: '" + std::string(s) + "'");
    if (!std::isfinite(v))
        throw DataError("non-finite number: '" + std::string(s) + "'");
    return v;
}

long parse_long(std::string_view s) {
    long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw DataError("not an integer: '" + std::string(s) + "'");
    return v;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    size_t start = 0;
    while (true) {
        size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

}  // namespace itsf
