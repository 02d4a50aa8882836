#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "plap/errors.hpp"
#include "plap/nonlinearity.hpp"
#include "plap/radial_grid.hpp"
#include "plap/version.hpp"

namespace plap {

using json = nlohmann::json;

/// 17 significant digits: shortest text that round-trips any double.
inline std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// CSV with a header row, LF endings, 17-digit values; byte-identical across
/// runs for identical data.
inline void write_csv(const std::string& path, const std::string& header,
                      const std::vector<std::vector<double>>& rows) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_csv: cannot open " + path);
    os << header << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ",";
            os << format_g17(row[i]);
        }
        os << "\n";
    }
}

inline void write_field_csv(const std::string& path, const RadialField& f) {
    std::vector<std::vector<double>> rows;
    rows.reserve(f.grid->cells);
    for (int j = 0; j < f.grid->cells; ++j)
        rows.push_back({f.grid->center[j], f.values[j], f.time});
    write_csv(path, "r,u,t", rows);
}

inline void write_profile_csv(const std::string& path, const std::vector<double>& r,
                              const std::vector<double>& v,
                              const std::string& header = "r,w") {
    std::vector<std::vector<double>> rows;
    rows.reserve(r.size());
    for (std::size_t i = 0; i < r.size() && i < v.size(); ++i)
        rows.push_back({r[i], v[i]});
    write_csv(path, header, rows);
}

inline std::string fnv1a64_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline void to_json(json& j, const NonlinearitySpec& s) {
    if (s.family == Family::PowerLog) {
        j = json{{"family", "power_log"}, {"alpha", s.alpha}, {"beta", s.beta}};
    } else {
        json pts = json::array();
        for (const auto& q : s.points) pts.push_back({q.first, q.second});
        j = json{{"family", "tabulated"}, {"points", pts}};
    }
}

inline void from_json(const json& j, NonlinearitySpec& s) {
    const std::string fam = j.at("family").get<std::string>();
    if (fam == "power_log") {
        s = NonlinearitySpec::power_log(j.at("alpha").get<double>(),
                                        j.value("beta", 0.0));
    } else if (fam == "tabulated") {
        std::vector<std::pair<double, double>> pts;
        for (const auto& q : j.at("points"))
            pts.emplace_back(q.at(0).get<double>(), q.at(1).get<double>());
        s = NonlinearitySpec::tabulated(std::move(pts));
    } else {
        throw precondition_error("NonlinearitySpec: unknown family " + fam);
    }
}

/// Reproducibility record of one CLI invocation.
struct RunManifest {
    std::string tool_version = version;
    json config;                                   ///< fully resolved config
    std::vector<std::pair<std::string, std::string>> input_hashes;  ///< (path, fnv1a64)
    double wall_time_seconds = 0.0;
    json tolerances;                               ///< per-module tolerances used
};

inline json manifest_to_json(const RunManifest& m) {
    json hashes = json::object();
    for (const auto& h : m.input_hashes) hashes[h.first] = h.second;
    return json{{"tool_version", m.tool_version},
                {"config", m.config},
                {"input_hashes", hashes},
                {"wall_time_seconds", m.wall_time_seconds},
                {"tolerances", m.tolerances}};
}

inline RunManifest manifest_from_json(const json& j) {
    RunManifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    m.config = j.at("config");
    for (const auto& [k, v] : j.at("input_hashes").items())
        m.input_hashes.emplace_back(k, v.get<std::string>());
    m.wall_time_seconds = j.at("wall_time_seconds").get<double>();
    m.tolerances = j.at("tolerances");
    return m;
}

}  // namespace plap
