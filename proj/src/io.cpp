#include "rhedge/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include "json.hpp"
#include <openssl/evp.h>

namespace rhedge::io {

namespace fs = std::filesystem;
using nlohmann::json;

void write_atomic(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError(fmt::format("cannot open '{}' for writing", tmp.string()));
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw DataError(fmt::format("write to '{}' failed", tmp.string()));
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw DataError(fmt::format("cannot rename '{}' to '{}': {}", tmp.string(), path.string(),
                                    ec.message()));
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw NumericError("SHA-256 digest failed");
    }
    std::string hex;
    hex.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

std::string format_double(double v) { return fmt::format("{}", v); }

std::size_t csv_row_count(std::string_view content) {
    const auto lines = static_cast<std::size_t>(std::count(content.begin(), content.end(), '\n'));
    return lines == 0 ? 0 : lines - 1;
}

std::string model_to_json(const ts_models::ArModel& m, int indent) {
    json j;
    j["kind"] = ts_models::to_string(m.kind);
    j["transform"] = ts_models::to_string(m.transform);
    j["order"] = m.order();
    j["intercept"] = m.intercept;
    j["coefficients"] = m.coeffs;
    j["noise_variance"] = m.noise_variance;
    j["horizon_error_variance"] = m.horizon_error_variance;
    j["integrated_error_sd"] = m.integrated_error_sd;
    j["std_errors"] = m.std_errors;
    j["n_obs"] = m.n_obs;
    j["stationary"] = m.stationary;
    return j.dump(indent);
}

ts_models::ArModel model_from_json(std::string_view text) {
    try {
        const auto j = json::parse(text);
        ts_models::ArModel m;
        m.kind = j.at("kind").get<std::string>() == "har" ? ts_models::ModelKind::har
                                                          : ts_models::ModelKind::ar;
        m.transform = ts_models::parse_transform(j.at("transform").get<std::string>());
        m.intercept = j.at("intercept").get<double>();
        m.coeffs = j.at("coefficients").get<std::vector<double>>();
        m.noise_variance = j.at("noise_variance").get<double>();
        m.horizon_error_variance = j.value("horizon_error_variance", std::vector<double>{});
        m.integrated_error_sd = j.value("integrated_error_sd", std::vector<double>{});
        m.std_errors = j.value("std_errors", std::vector<double>{});
        m.n_obs = j.value("n_obs", std::size_t{0});
        m.stationary = j.value("stationary", false);
        return m;
    } catch (const json::exception& e) {
        throw DataError(fmt::format("malformed model JSON: {}", e.what()));
    }
}

}  // namespace rhedge::io
