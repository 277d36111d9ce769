#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "scorelab/core/errors.hpp"
#include "scorelab/model/distribution.hpp"

namespace scorelab {

enum class PointCloudFormat { csv, json };

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline bool parse_double(std::string_view s, double& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

inline DataDistribution finish_cloud(std::vector<std::vector<double>> rows, std::vector<double> weights) {
    const auto k = static_cast<Eigen::Index>(rows.size());
    const auto d = static_cast<Eigen::Index>(rows.front().size());
    Matrix pts(k, d);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < d; ++j) pts(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    Vector w(k);
    if (weights.empty()) {
        w.setConstant(1.0 / static_cast<double>(k));
    } else {
        double total = 0.0;
        for (double v : weights) total += v;
        if (!(total > 0.0)) throw ParseError(0, "weights sum to zero");
        for (Eigen::Index i = 0; i < k; ++i) w(i) = weights[static_cast<std::size_t>(i)] / total;
        w /= w.sum();
    }
    try {
        return DataDistribution::delta_mixture(std::move(pts), std::move(w));
    } catch (const DomainError& e) {
        throw ParseError(0, e.what());
    }
}

}  // namespace detail

/// CSV: one point per row, comma separated. An optional header line names the
/// columns; if its last name is `weight`, the last column holds unnormalized
/// weights. Blank lines and lines starting with '#' are ignored.
inline DataDistribution parse_pointcloud_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::vector<double> weights;
    bool has_weight = false;
    bool header_seen = false;
    std::size_t width = 0;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        const auto body = detail::trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto cells = detail::split_commas(body);
        std::vector<double> values(cells.size());
        bool numeric = true;
        for (std::size_t i = 0; i < cells.size(); ++i) numeric = numeric && detail::parse_double(cells[i], values[i]);
        if (!numeric && !header_seen && rows.empty()) {
            bool names = true;
            for (auto c : cells) {
                double dummy = 0.0;
                if (c.empty() || detail::parse_double(c, dummy) || c == "nan" || c == "inf") names = false;
            }
            if (names) {
                header_seen = true;
                has_weight = cells.back() == "weight";
                width = cells.size();
                continue;
            }
        }
        if (!numeric) throw ParseError(row, "unparsable value in '" + std::string(body) + "'");
        for (double v : values)
            if (!std::isfinite(v)) throw ParseError(row, "non-finite value");
        if (width == 0) width = values.size();
        if (values.size() != width)
            throw ParseError(row, "ragged row: expected " + std::to_string(width) + " columns, got " +
                                      std::to_string(values.size()));
        if (has_weight) {
            if (values.size() < 2) throw ParseError(row, "weight column without coordinates");
            if (values.back() < 0.0) throw ParseError(row, "negative weight");
            weights.push_back(values.back());
            values.pop_back();
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw ParseError(0, "point cloud is empty");
    return detail::finish_cloud(std::move(rows), std::move(weights));
}

/// JSON: {"points": [[...], ...], "weights": [...]} with weights optional.
inline DataDistribution parse_pointcloud_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("points") || !doc["points"].is_array())
        throw ParseError(0, "expected an object with a 'points' array");
    std::vector<std::vector<double>> rows;
    std::size_t row = 0;
    for (const auto& p : doc["points"]) {
        ++row;
        if (!p.is_array() || p.empty()) throw ParseError(row, "point must be a non-empty array");
        std::vector<double> values;
        for (const auto& v : p) {
            if (!v.is_number()) throw ParseError(row, "non-numeric coordinate");
            values.push_back(v.get<double>());
            if (!std::isfinite(values.back())) throw ParseError(row, "non-finite value");
        }
        if (!rows.empty() && values.size() != rows.front().size()) throw ParseError(row, "ragged row");
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw ParseError(0, "point cloud is empty");
    std::vector<double> weights;
    if (doc.contains("weights")) {
        const auto& w = doc["weights"];
        if (!w.is_array() || w.size() != rows.size()) throw ParseError(0, "'weights' must match the point count");
        row = 0;
        for (const auto& v : w) {
            ++row;
            if (!v.is_number()) throw ParseError(row, "non-numeric weight");
            const double x = v.get<double>();
            if (!std::isfinite(x) || x < 0.0) throw ParseError(row, "invalid weight");
            weights.push_back(x);
        }
    }
    return detail::finish_cloud(std::move(rows), std::move(weights));
}

inline DataDistribution load_pointcloud(const std::string& path, PointCloudFormat format) {
    std::ifstream in(path);
    if (!in) throw ParseError(0, "cannot open " + path);
    if (format == PointCloudFormat::csv) return parse_pointcloud_csv(in);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, std::string("invalid JSON: ") + e.what());
    }
    return parse_pointcloud_json(doc);
}

}  // namespace scorelab
