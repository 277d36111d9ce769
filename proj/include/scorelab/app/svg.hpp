#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scorelab/app/scenario.hpp"
#include "scorelab/app/tree_io.hpp"
#include "scorelab/score/posterior.hpp"

namespace scorelab {

/// Tree rendering in more than two dimensions needs a user direction.
class ProjectionRequiredError : public DomainError {
public:
    explicit ProjectionRequiredError(Eigen::Index dim)
        : DomainError("tree has dimension " + std::to_string(dim) +
                      " > 2; supply a projection direction with --direction") {}
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::optional<std::size_t> column(const std::string& name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) return std::nullopt;
        return static_cast<std::size_t>(it - header.begin());
    }
};

/// Numeric CSV with one header line.
inline CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        return out;
    };
    if (!std::getline(in, line)) throw ParseError(0, "empty CSV");
    t.header = split(line);
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != t.header.size()) throw ParseError(row, "wrong number of columns");
        std::vector<double> v(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) {
            try {
                std::size_t used = 0;
                v[i] = std::stod(cells[i], &used);
                if (used != cells[i].size()) throw std::invalid_argument(cells[i]);
            } catch (const std::exception&) {
                throw ParseError(row, "non-numeric cell '" + cells[i] + "'");
            }
        }
        t.rows.push_back(std::move(v));
    }
    return t;
}

namespace detail {

inline std::string fmt(double v, int precision = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

inline std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

/// Plot frame mapping data ranges to a fixed canvas.
struct Frame {
    double width = 640, height = 400, left = 70, right = 20, top = 30, bottom = 50;
    double x0, x1, y0, y1;

    double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
    double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

inline void pad_range(double& lo, double& hi) {
    if (!(hi > lo)) {
        const double m = std::abs(lo) > 0 ? 0.1 * std::abs(lo) : 1.0;
        lo -= m;
        hi += m;
        return;
    }
    const double m = 0.05 * (hi - lo);
    lo -= m;
    hi += m;
}

inline void svg_open(std::ostream& out, const Frame& f, const std::string& title) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(f.width, 0) << "\" height=\""
        << fmt(f.height, 0) << "\" viewBox=\"0 0 " << fmt(f.width, 0) << ' ' << fmt(f.height, 0) << "\">\n";
    out << "<title>" << title << "</title>\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << fmt(f.width, 0) << "\" height=\"" << fmt(f.height, 0)
        << "\" fill=\"white\"/>\n";
}

inline void svg_axes(std::ostream& out, const Frame& f, const std::string& xlabel, const std::string& ylabel,
                     bool log_x) {
    const double xa = f.left, xb = f.width - f.right, ya = f.top, yb = f.height - f.bottom;
    out << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
    out << "<line x1=\"" << fmt(xa) << "\" y1=\"" << fmt(yb) << "\" x2=\"" << fmt(xb) << "\" y2=\"" << fmt(yb)
        << "\"/>\n";
    out << "<line x1=\"" << fmt(xa) << "\" y1=\"" << fmt(ya) << "\" x2=\"" << fmt(xa) << "\" y2=\"" << fmt(yb)
        << "\"/>\n</g>\n";
    out << "<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">\n";
    for (int k = static_cast<int>(std::ceil(f.x0)); log_x && k <= static_cast<int>(std::floor(f.x1)); ++k)
        out << "<text x=\"" << fmt(f.px(k)) << "\" y=\"" << fmt(yb + 16) << "\">1e" << k << "</text>\n";
    if (!log_x)
        for (int i = 0; i <= 4; ++i) {
            const double x = f.x0 + (f.x1 - f.x0) * i / 4.0;
            out << "<text x=\"" << fmt(f.px(x)) << "\" y=\"" << fmt(yb + 16) << "\">" << fmt_g(x) << "</text>\n";
        }
    for (int i = 0; i <= 4; ++i) {
        const double y = f.y0 + (f.y1 - f.y0) * i / 4.0;
        out << "<text x=\"" << fmt(xa - 8) << "\" y=\"" << fmt(f.py(y) + 4) << "\" text-anchor=\"end\">" << fmt_g(y)
            << "</text>\n";
    }
    out << "<text x=\"" << fmt(0.5 * (xa + xb)) << "\" y=\"" << fmt(f.height - 12) << "\">" << xlabel << "</text>\n";
    out << "<text x=\"16\" y=\"" << fmt(0.5 * (ya + yb)) << "\" transform=\"rotate(-90 16 " << fmt(0.5 * (ya + yb))
        << ")\">" << ylabel << "</text>\n</g>\n";
}

}  // namespace detail

/// Rate column drawn for a profile: the first present of these.
inline const std::vector<std::string>& profile_rate_columns() {
    static const std::vector<std::string> c{"rate_var", "rate_div", "rate_fisher", "rate_norm", "rate_fd"};
    return c;
}

/// Entropy-rate curve against log10 sigma^2, with the peak marked.
inline std::string render_profile_svg(const CsvTable& t) {
    const auto sc = t.column("sigma2");
    std::optional<std::size_t> rc;
    std::string rate_name;
    for (const auto& name : profile_rate_columns())
        if ((rc = t.column(name))) {
            rate_name = name;
            break;
        }
    if (!sc || !rc) throw ParseError(0, "profile CSV needs sigma2 and a rate_* column");
    if (t.rows.size() < 2) throw ParseError(0, "profile CSV needs at least two rows");

    std::vector<double> xs, ys;
    for (const auto& r : t.rows) {
        if (!(r[*sc] > 0.0)) throw ParseError(0, "sigma2 must be positive");
        xs.push_back(std::log10(r[*sc]));
        ys.push_back(r[*rc]);
    }
    const std::size_t peak = static_cast<std::size_t>(std::max_element(ys.begin(), ys.end()) - ys.begin());
    detail::Frame f;
    f.x0 = *std::min_element(xs.begin(), xs.end());
    f.x1 = *std::max_element(xs.begin(), xs.end());
    f.y0 = std::min(0.0, *std::min_element(ys.begin(), ys.end()));
    f.y1 = ys[peak];
    detail::pad_range(f.y0, f.y1);
    if (!(f.x1 > f.x0)) detail::pad_range(f.x0, f.x1);

    std::ostringstream out;
    detail::svg_open(out, f, "entropy rate");
    detail::svg_axes(out, f, "sigma^2", rate_name + " (nats / unit time)", true);
    out << "<polyline class=\"rate\" data-column=\"" << rate_name << "\" fill=\"none\" stroke=\"#1f77b4\" "
        << "stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i)
        out << (i ? " " : "") << detail::fmt(f.px(xs[i])) << ',' << detail::fmt(f.py(ys[i]));
    out << "\"/>\n";
    out << "<circle class=\"peak\" data-sigma2=\"" << format_double(t.rows[peak][*sc]) << "\" cx=\""
        << detail::fmt(f.px(xs[peak])) << "\" cy=\"" << detail::fmt(f.py(ys[peak]))
        << "\" r=\"4\" fill=\"#d62728\"/>\n";
    out << "</svg>\n";
    return out.str();
}

/// Fixed-point paths over (log10 t, projected coordinate). One-dimensional
/// trees get a background strip of log p_t(x).
inline std::string render_tree_svg(const nlohmann::json& doc, const std::optional<Vector>& direction = std::nullopt) {
    const FixedPointTree tree = tree_from_json(doc);
    const Eigen::Index d = doc.at("dim").get<Eigen::Index>();
    Vector dir;
    if (direction) {
        if (direction->size() != d) throw DomainError("projection direction has the wrong dimension");
        if (!(direction->norm() > 0.0)) throw DomainError("projection direction must be nonzero");
        dir = direction->normalized();
    } else {
        if (d > 2) throw ProjectionRequiredError(d);
        dir = Vector::Unit(d, 0);
    }
    if (tree.grid_t.empty()) throw ParseError(0, "tree has an empty grid");
    for (double t : tree.grid_t)
        if (!(t > 0.0)) throw ParseError(0, "tree grid times must be positive");

    detail::Frame f;
    f.x0 = std::log10(*std::min_element(tree.grid_t.begin(), tree.grid_t.end()));
    f.x1 = std::log10(*std::max_element(tree.grid_t.begin(), tree.grid_t.end()));
    if (!(f.x1 > f.x0)) detail::pad_range(f.x0, f.x1);
    f.y0 = std::numeric_limits<double>::infinity();
    f.y1 = -f.y0;
    for (const auto& p : tree.paths)
        for (const auto& n : p.nodes) {
            const double y = dir.dot(n.x_star);
            f.y0 = std::min(f.y0, y);
            f.y1 = std::max(f.y1, y);
        }
    if (!std::isfinite(f.y0)) f.y0 = f.y1 = 0.0;
    detail::pad_range(f.y0, f.y1);

    std::ostringstream out;
    detail::svg_open(out, f, "fixed-point tree");

    if (d == 1 && doc.contains("data") && doc.at("data").value("kind", "") == "delta-mixture") {
        const DataDistribution dist = make_distribution(doc.at("data"));
        const NoiseSchedule sched = make_schedule(doc.at("schedule"));
        constexpr int nx = 80, ny = 60;
        std::vector<double> logp(nx * ny);
        for (int i = 0; i < nx; ++i) {
            const double t = std::pow(10.0, f.x0 + (i + 0.5) / nx * (f.x1 - f.x0));
            const double s2 = sched.sigma2(t);
            // normalise each column so the strip shows shape at every noise level
            double top = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < ny; ++j) {
                const double x = f.y0 + (j + 0.5) / ny * (f.y1 - f.y0);
                logp[i * ny + j] = log_density(dist, Vector::Constant(1, x), s2);
                top = std::max(top, logp[i * ny + j]);
            }
            for (int j = 0; j < ny; ++j) logp[i * ny + j] -= top;
        }
        const double cw = (f.px(f.x1) - f.px(f.x0)) / nx, ch = (f.py(f.y0) - f.py(f.y1)) / ny;
        out << "<g class=\"density\" shape-rendering=\"crispEdges\">\n";
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j) {
                const double shade = std::clamp(1.0 + logp[i * ny + j] / 8.0, 0.0, 1.0);
                const int c = static_cast<int>(std::lround(255.0 - 120.0 * shade));
                out << "<rect x=\"" << detail::fmt(f.px(f.x0) + i * cw) << "\" y=\""
                    << detail::fmt(f.py(f.y0) - (j + 1) * ch) << "\" width=\"" << detail::fmt(cw + 0.05)
                    << "\" height=\"" << detail::fmt(ch + 0.05) << "\" fill=\"rgb(" << c << ',' << c << ",255)\"/>\n";
            }
        out << "</g>\n";
    }

    detail::svg_axes(out, f, "t", d == 1 ? "x*" : "projected x*", true);
    static const char* colours[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
    for (const auto& p : tree.paths) {
        if (p.nodes.empty()) continue;
        out << "<polyline class=\"path\" data-path=\"" << p.id << "\" fill=\"none\" stroke=\""
            << colours[static_cast<std::size_t>(p.id) % 6] << "\" stroke-width=\"2\" points=\"";
        for (std::size_t k = 0; k < p.nodes.size(); ++k)
            out << (k ? " " : "") << detail::fmt(f.px(std::log10(p.nodes[k].t))) << ','
                << detail::fmt(f.py(dir.dot(p.nodes[k].x_star)));
        out << "\"/>\n";
    }
    for (const auto& e : tree.branch_events)
        out << "<circle class=\"branch\" data-kind=\"" << to_string(e.kind) << "\" data-sigma2=\""
            << format_double(e.sigma2_branch) << "\" cx=\"" << detail::fmt(f.px(std::log10(e.t_branch)))
            << "\" cy=\"" << detail::fmt(f.py(dir.dot(e.x_branch))) << "\" r=\"4\" fill=\"black\"/>\n";
    out << "</svg>\n";
    return out.str();
}

/// Dispatches on extension: .json is a tree, anything else a profile CSV.
inline std::string render_svg_file(const std::filesystem::path& input, const std::optional<Vector>& direction) {
    if (input.extension() == ".json") return render_tree_svg(read_json_file(input), direction);
    std::ifstream in(input);
    if (!in) throw ParseError(0, "cannot open '" + input.string() + "'");
    return render_profile_svg(read_csv(in));
}

}  // namespace scorelab
