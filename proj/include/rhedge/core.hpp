#pragma once

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rhedge {

using Date = std::chrono::year_month_day;

/// Base class for every error raised by the library. The category drives the
/// CLI exit code (1 config, 2 data, 3 numeric).
class Error : public std::runtime_error {
public:
    enum class Category { config, data, numeric };

    Error(Category category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    [[nodiscard]] Category category() const noexcept { return category_; }

private:
    Category category_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(Category::config, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(Category::data, what) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(Category::numeric, what) {}
};

/// Collects non-fatal diagnostics (gaps, clamps, non-stationary fits).
using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, std::string message) {
    if (sink != nullptr) {
        sink->push_back(std::move(message));
    }
}

// Dates

enum class DateFormat { iso, us };

/// Parses "YYYY-MM-DD" or "MM/DD/YYYY". Throws DataError on malformed or
/// invalid calendar dates.
[[nodiscard]] Date parse_date(std::string_view text, DateFormat format);

/// Detects the format from a single sample ("-" -> ISO, "/" -> US).
[[nodiscard]] DateFormat detect_date_format(std::string_view text);

/// Accepts either format, detected from the text.
[[nodiscard]] Date parse_date(std::string_view text);

[[nodiscard]] std::string format_date(const Date& date);

[[nodiscard]] inline std::int64_t day_number(const Date& date) {
    return std::chrono::sys_days{date}.time_since_epoch().count();
}

struct DateRange {
    Date first;
    Date last;

    [[nodiscard]] bool contains(const Date& d) const { return first <= d && d <= last; }
};

}  // namespace rhedge
