#include "rrt/month.hpp"

#include <charconv>
#include <cstdio>

#include "rrt/errors.hpp"

namespace rrt {

namespace {

int parse_int(std::string_view text, std::string_view whole) {
    int value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw DataError("malformed month '" + std::string(whole) + "'");
    }
    return value;
}

}  // namespace

MonthStamp MonthStamp::from_yyyymm(int yyyymm) {
    const int y = yyyymm / 100;
    const int m = yyyymm % 100;
    if (m < 1 || m > 12 || y < 1) {
        throw DataError("malformed month " + std::to_string(yyyymm));
    }
    return MonthStamp{y, m};
}

MonthStamp MonthStamp::parse(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '"')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '"' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    if (text.size() == 7 && text[4] == '-') {
        const int y = parse_int(text.substr(0, 4), text);
        const int m = parse_int(text.substr(5, 2), text);
        return from_yyyymm(y * 100 + m);
    }
    if (text.size() == 6) return from_yyyymm(parse_int(text, text));
    throw DataError("malformed month '" + std::string(text) + "'");
}

std::string MonthStamp::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
    return buf;
}

}  // namespace rrt
