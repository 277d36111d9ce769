#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scorelab/core/errors.hpp"
#include "scorelab/core/rng.hpp"
#include "scorelab/infotheory/entropy.hpp"
#include "scorelab/model/distribution.hpp"
#include "scorelab/model/pointcloud.hpp"
#include "scorelab/model/schedule.hpp"

namespace scorelab {

using Json = nlohmann::json;

inline constexpr int kScenarioVersion = 1;

struct GridSpec {
    double min = 1e-2;
    double max = 1e2;
    std::size_t n = 40;
    bool log_spacing = true;

    std::vector<double> values() const { return sigma2_grid(min, max, n, log_spacing); }
};

struct OutputSpec {
    std::string kind;
    std::string path;
    Json params;  // kind-specific, defaults filled in
};

/// A validated experiment description. `normalized` is the canonical JSON
/// form with every default made explicit; it is what gets hashed.
struct Scenario {
    std::string name;
    std::optional<Json> distribution;
    Json schedule;
    GridSpec grid;
    std::vector<Estimator> estimators;
    std::size_t n_samples = 10000;
    Seed master_seed = 0;
    std::vector<OutputSpec> outputs;
    std::filesystem::path base_dir;  // resolves relative point-cloud paths
    Json normalized;
};

inline const std::vector<std::string>& output_kinds() {
    static const std::vector<std::string> kinds{"entropy-profile",   "fixed-point-tree", "trajectory-ensemble",
                                                "divergence-sweep", "fisher-sweep",     "twentyq"};
    return kinds;
}

inline bool is_monte_carlo_output(const std::string& kind) {
    return kind == "entropy-profile" || kind == "divergence-sweep";
}

namespace detail {

/// Collects every violated field instead of stopping at the first.
class SchemaReader {
public:
    std::vector<std::string> problems;

    void fail(const std::string& field, const std::string& msg) { problems.push_back(field + ": " + msg); }

    void check_keys(const Json& obj, const std::string& field, const std::set<std::string>& allowed) {
        for (const auto& [k, v] : obj.items())
            if (!allowed.count(k)) fail(field + "." + k, "unknown field");
    }

    std::optional<double> number(const Json& obj, const std::string& key, const std::string& field,
                                 std::optional<double> fallback = std::nullopt) {
        if (!obj.contains(key)) {
            if (!fallback) fail(field, "required");
            return fallback;
        }
        const Json& v = obj.at(key);
        if (!v.is_number()) {
            fail(field, "must be a number");
            return std::nullopt;
        }
        const double d = v.get<double>();
        if (!std::isfinite(d)) {
            fail(field, "must be finite");
            return std::nullopt;
        }
        return d;
    }

    std::optional<std::int64_t> integer(const Json& obj, const std::string& key, const std::string& field,
                                        std::optional<std::int64_t> fallback = std::nullopt) {
        if (!obj.contains(key)) {
            if (!fallback) fail(field, "required");
            return fallback;
        }
        const Json& v = obj.at(key);
        if (!v.is_number_integer()) {
            fail(field, "must be an integer");
            return std::nullopt;
        }
        return v.get<std::int64_t>();
    }

    std::optional<std::string> string(const Json& obj, const std::string& key, const std::string& field,
                                      std::optional<std::string> fallback = std::nullopt) {
        if (!obj.contains(key)) {
            if (!fallback) fail(field, "required");
            return fallback;
        }
        if (!obj.at(key).is_string()) {
            fail(field, "must be a string");
            return std::nullopt;
        }
        return obj.at(key).get<std::string>();
    }

    std::optional<std::vector<double>> vector(const Json& v, const std::string& field) {
        if (!v.is_array() || v.empty()) {
            fail(field, "must be a non-empty array of numbers");
            return std::nullopt;
        }
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number() || !std::isfinite(e.get<double>())) {
                fail(field, "entries must be finite numbers");
                return std::nullopt;
            }
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::optional<std::vector<std::vector<double>>> matrix(const Json& v, const std::string& field) {
        if (!v.is_array() || v.empty()) {
            fail(field, "must be a non-empty array of rows");
            return std::nullopt;
        }
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < v.size(); ++i) {
            auto r = vector(v[i], field + "[" + std::to_string(i) + "]");
            if (!r) return std::nullopt;
            if (!rows.empty() && r->size() != rows.front().size()) {
                fail(field, "rows must all have the same length");
                return std::nullopt;
            }
            rows.push_back(std::move(*r));
        }
        return rows;
    }
};

inline Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

inline Vector to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) return false;
    return true;
}

inline Json normalize_distribution(SchemaReader& r, const Json& in) {
    const std::string f = "distribution";
    if (!in.is_object()) {
        r.fail(f, "must be an object");
        return {};
    }
    const auto kind = r.string(in, "kind", f + ".kind");
    if (!kind) return {};
    Json out{{"kind", *kind}};
    if (*kind == "delta-mixture") {
        r.check_keys(in, f, {"kind", "points", "weights"});
        if (!in.contains("points")) {
            r.fail(f + ".points", "required");
            return out;
        }
        const auto pts = r.matrix(in.at("points"), f + ".points");
        if (!pts) return out;
        out["points"] = *pts;
        std::vector<double> w(pts->size(), 1.0 / static_cast<double>(pts->size()));
        if (in.contains("weights")) {
            const auto given = r.vector(in.at("weights"), f + ".weights");
            if (!given) return out;
            if (given->size() != pts->size()) {
                r.fail(f + ".weights", "needs one weight per point");
                return out;
            }
            w = *given;
        }
        out["weights"] = w;
        try {
            DataDistribution::delta_mixture(to_matrix(*pts), to_vector(w));
        } catch (const DomainError& e) {
            r.fail(f, e.what());
        }
    } else if (*kind == "gaussian-full") {
        r.check_keys(in, f, {"kind", "mean", "covariance"});
        const auto mean = in.contains("mean") ? r.vector(in.at("mean"), f + ".mean") : std::nullopt;
        const auto cov = in.contains("covariance") ? r.matrix(in.at("covariance"), f + ".covariance") : std::nullopt;
        if (!in.contains("mean")) r.fail(f + ".mean", "required");
        if (!in.contains("covariance")) r.fail(f + ".covariance", "required");
        if (!mean || !cov) return out;
        out["mean"] = *mean;
        out["covariance"] = *cov;
        try {
            DataDistribution::gaussian(to_vector(*mean), to_matrix(*cov));
        } catch (const Error& e) {
            r.fail(f, e.what());
        }
    } else if (*kind == "gaussian-subspace") {
        r.check_keys(in, f, {"kind", "dim", "data_dim", "h"});
        const auto dim = r.integer(in, "dim", f + ".dim");
        const auto data_dim = r.integer(in, "data_dim", f + ".data_dim");
        const auto h = r.number(in, "h", f + ".h");
        if (dim && *dim < 1) r.fail(f + ".dim", "must be >= 1");
        if (dim && data_dim && (*data_dim < 1 || *data_dim > *dim)) r.fail(f + ".data_dim", "must be in [1, dim]");
        if (h && !(*h > 0.0)) r.fail(f + ".h", "must be positive");
        if (dim) out["dim"] = *dim;
        if (data_dim) out["data_dim"] = *data_dim;
        if (h) out["h"] = *h;
    } else if (*kind == "pointcloud") {
        r.check_keys(in, f, {"kind", "path", "format"});
        const auto path = r.string(in, "path", f + ".path");
        const auto format = r.string(in, "format", f + ".format", std::string("csv"));
        if (format && *format != "csv" && *format != "json") r.fail(f + ".format", "must be 'csv' or 'json'");
        if (path) out["path"] = *path;
        if (format) out["format"] = *format;
    } else {
        r.fail(f + ".kind", "unknown kind '" + *kind + "'");
    }
    return out;
}

inline Json normalize_schedule(SchemaReader& r, const Json& in) {
    const std::string f = "schedule";
    if (!in.is_object()) {
        r.fail(f, "must be an object");
        return {};
    }
    const auto kind = r.string(in, "kind", f + ".kind", std::string("constant"));
    if (!kind) return {};
    Json out{{"kind", *kind}};
    try {
        if (*kind == "constant") {
            r.check_keys(in, f, {"kind", "nu", "t_max"});
            const auto nu = r.number(in, "nu", f + ".nu", 1.0);
            const auto t_max = r.number(in, "t_max", f + ".t_max", 1e6);
            if (nu && t_max) {
                NoiseSchedule::constant(*nu, *t_max);
                out["nu"] = *nu;
                out["t_max"] = *t_max;
            }
        } else if (*kind == "geometric") {
            r.check_keys(in, f, {"kind", "sigma_min", "sigma_max", "t_max"});
            const auto lo = r.number(in, "sigma_min", f + ".sigma_min");
            const auto hi = r.number(in, "sigma_max", f + ".sigma_max");
            const auto t_max = r.number(in, "t_max", f + ".t_max", 1.0);
            if (lo && hi && t_max) {
                NoiseSchedule::geometric(*lo, *hi, *t_max);
                out["sigma_min"] = *lo;
                out["sigma_max"] = *hi;
                out["t_max"] = *t_max;
            }
        } else if (*kind == "table") {
            r.check_keys(in, f, {"kind", "times", "nu2"});
            const auto times = in.contains("times") ? r.vector(in.at("times"), f + ".times") : std::nullopt;
            const auto nu2 = in.contains("nu2") ? r.vector(in.at("nu2"), f + ".nu2") : std::nullopt;
            if (!in.contains("times")) r.fail(f + ".times", "required");
            if (!in.contains("nu2")) r.fail(f + ".nu2", "required");
            if (times && nu2) {
                NoiseSchedule::table(*times, *nu2);
                out["times"] = *times;
                out["nu2"] = *nu2;
            }
        } else {
            r.fail(f + ".kind", "unknown kind '" + *kind + "'");
        }
    } catch (const DomainError& e) {
        r.fail(f, e.what());
    }
    return out;
}

inline Json normalize_output(SchemaReader& r, const Json& in, std::size_t i, const std::optional<Json>& dist) {
    const std::string f = "outputs[" + std::to_string(i) + "]";
    if (!in.is_object()) {
        r.fail(f, "must be an object");
        return {};
    }
    const auto kind = r.string(in, "kind", f + ".kind");
    const auto path = r.string(in, "path", f + ".path");
    Json out;
    if (kind) out["kind"] = *kind;
    if (path) {
        if (path->empty()) r.fail(f + ".path", "must not be empty");
        else if (std::filesystem::path(*path).is_absolute()) r.fail(f + ".path", "must be relative to the output root");
        out["path"] = *path;
    }
    if (!kind) return out;
    auto positive_int = [&](const std::string& key, std::int64_t def) {
        const auto v = r.integer(in, key, f + "." + key, def);
        if (v && *v < 1) r.fail(f + "." + key, "must be >= 1");
        if (v) out[key] = *v;
    };
    if (*kind == "entropy-profile" || *kind == "divergence-sweep") {
        r.check_keys(in, f, {"kind", "path"});
    } else if (*kind == "fixed-point-tree") {
        r.check_keys(in, f, {"kind", "path", "n_grid", "sigma2_hi", "sigma2_lo"});
        positive_int("n_grid", 400);
        if (out.contains("n_grid") && out["n_grid"].get<std::int64_t>() < 2) r.fail(f + ".n_grid", "must be >= 2");
        for (const char* key : {"sigma2_hi", "sigma2_lo"})
            if (in.contains(key)) {
                const auto v = r.number(in, key, f + "." + key);
                if (v && !(*v > 0.0)) r.fail(f + "." + key, "must be positive");
                if (v) out[key] = *v;
            }
        if (dist && dist->value("kind", "") != "delta-mixture" && dist->value("kind", "") != "pointcloud")
            r.fail(f + ".kind", "fixed-point-tree needs mixture data");
    } else if (*kind == "trajectory-ensemble") {
        r.check_keys(in, f, {"kind", "path", "n_trajectories", "n_steps", "mode"});
        positive_int("n_trajectories", 100);
        positive_int("n_steps", 500);
        const auto mode = r.string(in, "mode", f + ".mode", std::string("reverse-sde"));
        if (mode && *mode != "reverse-sde" && *mode != "reverse-ode")
            r.fail(f + ".mode", "must be 'reverse-sde' or 'reverse-ode'");
        if (mode) out["mode"] = *mode;
    } else if (*kind == "fisher-sweep") {
        r.check_keys(in, f, {"kind", "path", "x", "band_lo", "band_hi"});
        if (in.contains("x")) {
            const auto x = r.vector(in.at("x"), f + ".x");
            if (x) out["x"] = *x;
        }
        const auto lo = r.number(in, "band_lo", f + ".band_lo", 0.5);
        const auto hi = r.number(in, "band_hi", f + ".band_hi", 1.5);
        if (lo && hi && !(*lo >= 0.0 && *lo < *hi)) r.fail(f + ".band_lo", "need 0 <= band_lo < band_hi");
        if (lo) out["band_lo"] = *lo;
        if (hi) out["band_hi"] = *hi;
    } else if (*kind == "twentyq") {
        r.check_keys(in, f, {"kind", "path", "bits", "element", "policy"});
        const auto bits = r.integer(in, "bits", f + ".bits", 4);
        if (bits && (*bits < 0 || *bits > 10)) r.fail(f + ".bits", "must be in [0, 10]");
        if (bits) out["bits"] = *bits;
        const auto element = r.integer(in, "element", f + ".element", 0);
        if (element && bits && (*element < 0 || *element >= (std::int64_t{1} << std::max<std::int64_t>(0, *bits))))
            r.fail(f + ".element", "must index an element of the universe");
        if (element) out["element"] = *element;
        const auto policy = r.string(in, "policy", f + ".policy", std::string("fixed-element"));
        if (policy && *policy != "fixed-element" && *policy != "lazy-random")
            r.fail(f + ".policy", "must be 'fixed-element' or 'lazy-random'");
        if (policy) out["policy"] = *policy;
    } else {
        r.fail(f + ".kind", "unknown output kind '" + *kind + "'");
    }
    return out;
}

}  // namespace detail

/// Validates a parsed config and fills in defaults. Throws ValidationError
/// listing every problem found.
inline Scenario parse_scenario(const Json& doc, const std::filesystem::path& base_dir = ".") {
    detail::SchemaReader r;
    if (!doc.is_object()) throw ValidationError({"config: top level must be a JSON object"});
    r.check_keys(doc, "config", {"version", "name", "distribution", "schedule", "sigma2_grid", "estimators",
                                 "n_samples", "master_seed", "outputs"});
    Json norm;

    const auto version = r.integer(doc, "version", "version");
    if (version && *version != kScenarioVersion)
        r.fail("version", "unsupported version " + std::to_string(*version) + " (expected 1)");
    norm["version"] = kScenarioVersion;

    Scenario sc;
    sc.base_dir = base_dir;
    if (const auto name = r.string(doc, "name", "name")) {
        if (!detail::valid_name(*name)) r.fail("name", "use letters, digits, '-', '_' or '.'");
        sc.name = *name;
        norm["name"] = *name;
    }

    std::vector<std::string> kinds;
    if (!doc.contains("outputs")) {
        r.fail("outputs", "required");
    } else if (!doc.at("outputs").is_array() || doc.at("outputs").empty()) {
        r.fail("outputs", "must be a non-empty array");
    } else {
        for (const auto& o : doc.at("outputs"))
            if (o.is_object() && o.contains("kind") && o.at("kind").is_string()) kinds.push_back(o.at("kind"));
    }
    const bool only_game = !kinds.empty() && std::all_of(kinds.begin(), kinds.end(),
                                                         [](const std::string& k) { return k == "twentyq"; });

    if (doc.contains("distribution")) {
        sc.distribution = detail::normalize_distribution(r, doc.at("distribution"));
        norm["distribution"] = *sc.distribution;
    } else if (!only_game) {
        r.fail("distribution", "required");
    }

    sc.schedule = detail::normalize_schedule(r, doc.value("schedule", Json{{"kind", "constant"}}));
    norm["schedule"] = sc.schedule;

    const Json grid = doc.value("sigma2_grid", Json::object());
    if (!grid.is_object()) {
        r.fail("sigma2_grid", "must be an object");
    } else {
        r.check_keys(grid, "sigma2_grid", {"min", "max", "n", "spacing"});
        const auto lo = r.number(grid, "min", "sigma2_grid.min", 1e-2);
        const auto hi = r.number(grid, "max", "sigma2_grid.max", 1e2);
        const auto n = r.integer(grid, "n", "sigma2_grid.n", 40);
        const auto spacing = r.string(grid, "spacing", "sigma2_grid.spacing", std::string("log"));
        if (lo && !(*lo > 0.0)) r.fail("sigma2_grid.min", "must be > 0");
        if (lo && hi && !(*hi > *lo)) r.fail("sigma2_grid.max", "must exceed sigma2_grid.min");
        if (n && *n < 2) r.fail("sigma2_grid.n", "must be >= 2");
        if (spacing && *spacing != "log" && *spacing != "linear") r.fail("sigma2_grid.spacing", "must be 'log' or 'linear'");
        if (lo) sc.grid.min = *lo;
        if (hi) sc.grid.max = *hi;
        if (n) sc.grid.n = static_cast<std::size_t>(std::max<std::int64_t>(*n, 0));
        if (spacing) sc.grid.log_spacing = *spacing == "log";
        norm["sigma2_grid"] = {{"min", sc.grid.min}, {"max", sc.grid.max}, {"n", sc.grid.n},
                               {"spacing", sc.grid.log_spacing ? "log" : "linear"}};
    }

    if (!doc.contains("estimators")) {
        sc.estimators.assign(kAllEstimators.begin(), kAllEstimators.end());
    } else if (!doc.at("estimators").is_array()) {
        r.fail("estimators", "must be an array");
    } else if (doc.at("estimators").empty()) {
        r.fail("estimators", "must name at least one estimator");
    } else {
        for (const auto& e : doc.at("estimators")) {
            if (!e.is_string()) {
                r.fail("estimators", "entries must be strings");
                continue;
            }
            try {
                const Estimator est = parse_estimator(e.get<std::string>());
                if (std::find(sc.estimators.begin(), sc.estimators.end(), est) != sc.estimators.end())
                    r.fail("estimators", "duplicate '" + e.get<std::string>() + "'");
                else sc.estimators.push_back(est);
            } catch (const DomainError&) {
                r.fail("estimators", "unknown estimator '" + e.get<std::string>() + "'");
            }
        }
    }
    // Canonical order makes the hash independent of listing order.
    std::sort(sc.estimators.begin(), sc.estimators.end());
    norm["estimators"] = Json::array();
    for (Estimator e : sc.estimators) norm["estimators"].push_back(to_string(e));

    if (const auto n = r.integer(doc, "n_samples", "n_samples", 10000)) {
        if (*n < 1) r.fail("n_samples", "must be >= 1");
        else sc.n_samples = static_cast<std::size_t>(*n);
    }
    const bool needs_mc = std::any_of(kinds.begin(), kinds.end(), is_monte_carlo_output);
    if (needs_mc && sc.n_samples < 100) r.fail("n_samples", "must be >= 100 for Monte Carlo outputs");
    norm["n_samples"] = sc.n_samples;

    if (doc.contains("master_seed")) {
        const Json& s = doc.at("master_seed");
        if (s.is_number_unsigned()) sc.master_seed = s.get<std::uint64_t>();
        else if (s.is_number_integer() && s.get<std::int64_t>() >= 0) sc.master_seed = static_cast<Seed>(s.get<std::int64_t>());
        else r.fail("master_seed", "must be a non-negative integer");
    }
    norm["master_seed"] = sc.master_seed;

    norm["outputs"] = Json::array();
    std::set<std::string> paths;
    if (doc.contains("outputs") && doc.at("outputs").is_array()) {
        for (std::size_t i = 0; i < doc.at("outputs").size(); ++i) {
            Json o = detail::normalize_output(r, doc.at("outputs")[i], i, sc.distribution);
            if (o.contains("path") && !paths.insert(o["path"].get<std::string>()).second)
                r.fail("outputs[" + std::to_string(i) + "].path", "duplicate output path");
            if (o.contains("kind") && o.contains("path")) {
                OutputSpec spec{o["kind"], o["path"], o};
                spec.params.erase("kind");
                spec.params.erase("path");
                sc.outputs.push_back(std::move(spec));
            }
            norm["outputs"].push_back(std::move(o));
        }
    }

    if (!r.problems.empty()) throw ValidationError(r.problems);
    sc.normalized = std::move(norm);
    return sc;
}

inline Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(0, "cannot open '" + path.string() + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ParseError(0, path.string() + ": " + e.what());
    }
}

inline Scenario load_scenario(const std::filesystem::path& path) {
    return parse_scenario(read_json_file(path), path.parent_path().empty() ? "." : path.parent_path());
}

/// FNV-1a over the canonical (sorted-key, default-complete) JSON text.
inline std::uint64_t config_hash(const Scenario& sc) {
    const std::string text = sc.normalized.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    return s;
}

inline NoiseSchedule make_schedule(const Json& spec) {
    const std::string kind = spec.at("kind");
    if (kind == "constant") return NoiseSchedule::constant(spec.at("nu"), spec.at("t_max"));
    if (kind == "geometric") return NoiseSchedule::geometric(spec.at("sigma_min"), spec.at("sigma_max"), spec.at("t_max"));
    return NoiseSchedule::table(spec.at("times").get<std::vector<double>>(), spec.at("nu2").get<std::vector<double>>());
}

inline DataDistribution make_distribution(const Json& spec, const std::filesystem::path& base_dir = ".") {
    const std::string kind = spec.at("kind");
    if (kind == "delta-mixture")
        return DataDistribution::delta_mixture(detail::to_matrix(spec.at("points").get<std::vector<std::vector<double>>>()),
                                               detail::to_vector(spec.at("weights").get<std::vector<double>>()));
    if (kind == "gaussian-full")
        return DataDistribution::gaussian(detail::to_vector(spec.at("mean").get<std::vector<double>>()),
                                          detail::to_matrix(spec.at("covariance").get<std::vector<std::vector<double>>>()));
    if (kind == "gaussian-subspace")
        return DataDistribution::gaussian_subspace(spec.at("dim").get<Eigen::Index>(),
                                                   spec.at("data_dim").get<Eigen::Index>(), spec.at("h").get<double>());
    std::filesystem::path p = spec.at("path").get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    return load_pointcloud(p.string(), spec.at("format") == "json" ? PointCloudFormat::json : PointCloudFormat::csv);
}

/// Inverse of make_distribution for mixtures, used to embed data in outputs.
inline Json distribution_json(const DataDistribution& dist) {
    if (!dist.is_mixture()) return Json{{"kind", dist.kind_name()}};
    const auto& m = dist.mixture();
    Json pts = Json::array();
    for (Eigen::Index i = 0; i < m.points.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.points.cols(); ++j) row.push_back(m.points(i, j));
        pts.push_back(row);
    }
    Json w = Json::array();
    for (Eigen::Index i = 0; i < m.weights.size(); ++i) w.push_back(m.weights(i));
    return Json{{"kind", "delta-mixture"}, {"points", pts}, {"weights", w}};
}

}  // namespace scorelab
