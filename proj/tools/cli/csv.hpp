// CSV output with lossless doubles, and the flux-current sample reader.
#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cli/config.hpp"
#include "hmotor/identify.hpp"

namespace hmotor::cli {

/// 17 significant digits, enough for an exact double round trip.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path) : path_(path) {
        std::error_code ec;
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
        os_.open(path, std::ios::binary | std::ios::trunc);
        if (!os_) throw IoError("cannot write '" + path.string() + "'");
    }

    void header(std::initializer_list<std::string_view> cols) {
        bool first = true;
        for (auto c : cols) {
            if (!first) os_ << ',';
            os_ << c;
            first = false;
        }
        os_ << '\n';
    }

    /// Numeric cells; NaN marks an intentionally empty cell.
    void row(const std::vector<double>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k) os_ << ',';
            if (!std::isnan(cells[k])) os_ << fmt(cells[k]);
        }
        os_ << '\n';
    }

    void raw(const std::string& line) { os_ << line << '\n'; }

    void close() {
        os_.close();
        if (!os_) throw IoError("error while writing '" + path_.string() + "'");
    }

private:
    std::filesystem::path path_;
    std::ofstream os_;
};

namespace detail {

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto c = line.find(',', start);
        out.push_back(line.substr(start, c == std::string_view::npos ? std::string_view::npos : c - start));
        if (c == std::string_view::npos) break;
        start = c + 1;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline bool parse_double(std::string_view s, double& v) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

}  // namespace detail

/// Reads `phi_d,phi_q,i_d,i_q[,weight]` rows. A header line is optional; blank
/// lines and lines starting with '#' are skipped. Errors name the file line.
inline std::vector<FluxSample> parse_samples(std::istream& in, const std::string& name) {
    std::vector<FluxSample> out;
    std::string line;
    std::size_t lineno = 0;
    bool seen_data = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view body = detail::trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto cells = detail::split(body);
        double first = 0.0;
        if (!seen_data && out.empty() && !detail::parse_double(cells[0], first)) {
            const bool ok = (cells.size() == 4 || cells.size() == 5) &&
                            detail::trim(cells[0]) == "phi_d" && detail::trim(cells[1]) == "phi_q" &&
                            detail::trim(cells[2]) == "i_d" && detail::trim(cells[3]) == "i_q" &&
                            (cells.size() == 4 || detail::trim(cells[4]) == "weight");
            if (!ok) {
                throw ParameterError(name + ": row " + std::to_string(lineno),
                                     "expected header phi_d,phi_q,i_d,i_q[,weight]");
            }
            seen_data = true;
            continue;
        }
        seen_data = true;
        if (cells.size() != 4 && cells.size() != 5) {
            throw ParameterError(name + ": row " + std::to_string(lineno),
                                 "expected 4 or 5 fields, got " + std::to_string(cells.size()));
        }
        double v[5] = {0, 0, 0, 0, 1};
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (!detail::parse_double(cells[k], v[k]) || !std::isfinite(v[k])) {
                throw ParameterError(name + ": row " + std::to_string(lineno),
                                     "field " + std::to_string(k + 1) + " ('" +
                                         std::string(detail::trim(cells[k])) + "') is not a finite number");
            }
        }
        if (!(v[4] > 0.0)) {
            throw ParameterError(name + ": row " + std::to_string(lineno), "weight must be > 0");
        }
        out.push_back({v[0], v[1], v[2], v[3], v[4]});
    }
    return out;
}

inline std::vector<FluxSample> read_samples(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read samples '" + path + "'");
    return parse_samples(in, path);
}

}  // namespace hmotor::cli
