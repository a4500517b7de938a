#include "rhedge/core.hpp"

#include <charconv>

#include <fmt/core.h>

namespace rhedge {

namespace {

int parse_int(std::string_view text, std::string_view whole) {
    int value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        throw DataError(fmt::format("malformed date '{}'", whole));
    }
    return value;
}

}  // namespace

DateFormat detect_date_format(std::string_view text) {
    if (text.find('-') != std::string_view::npos) {
        return DateFormat::iso;
    }
    if (text.find('/') != std::string_view::npos) {
        return DateFormat::us;
    }
    throw DataError(fmt::format("unrecognised date format '{}'", text));
}

Date parse_date(std::string_view text, DateFormat format) {
    int y = 0;
    int m = 0;
    int d = 0;
    if (format == DateFormat::iso) {
        if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
            throw DataError(fmt::format("malformed ISO date '{}'", text));
        }
        y = parse_int(text.substr(0, 4), text);
        m = parse_int(text.substr(5, 2), text);
        d = parse_int(text.substr(8, 2), text);
    } else {
        const auto first = text.find('/');
        const auto second = text.find('/', first == std::string_view::npos ? 0 : first + 1);
        if (first == std::string_view::npos || second == std::string_view::npos) {
            throw DataError(fmt::format("malformed MM/DD/YYYY date '{}'", text));
        }
        m = parse_int(text.substr(0, first), text);
        d = parse_int(text.substr(first + 1, second - first - 1), text);
        y = parse_int(text.substr(second + 1), text);
    }
    const Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                    std::chrono::day{static_cast<unsigned>(d)}};
    if (!date.ok()) {
        throw DataError(fmt::format("invalid calendar date '{}'", text));
    }
    return date;
}

Date parse_date(std::string_view text) { return parse_date(text, detect_date_format(text)); }

std::string format_date(const Date& date) {
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(date.year()),
                       static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
}

}  // namespace rhedge
