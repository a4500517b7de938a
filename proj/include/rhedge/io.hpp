#pragma once

#include "rhedge/core.hpp"
#include "rhedge/ts_models.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace rhedge::io {

/// Writes to a sibling temporary file, then renames over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

[[nodiscard]] std::string read_file(const std::filesystem::path& path);

[[nodiscard]] std::string sha256_hex(std::string_view data);

/// Shortest text that round-trips the double.
[[nodiscard]] std::string format_double(double v);

/// Number of data rows in a CSV with a header line.
[[nodiscard]] std::size_t csv_row_count(std::string_view content);

/// JSON text of a fitted model (order, transform, coefficients, noise
/// variance, horizon error tables).
[[nodiscard]] std::string model_to_json(const ts_models::ArModel& model, int indent = 2);
[[nodiscard]] ts_models::ArModel model_from_json(std::string_view text);

}  // namespace rhedge::io
