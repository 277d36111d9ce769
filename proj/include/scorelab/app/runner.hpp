#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "scorelab/app/scenario.hpp"
#include "scorelab/app/tree_io.hpp"
#include "scorelab/core/parallel.hpp"
#include "scorelab/discretegame/game.hpp"
#include "scorelab/dynamics/integrate.hpp"
#include "scorelab/fixedpoints/tree.hpp"
#include "scorelab/infotheory/divergence.hpp"
#include "scorelab/infotheory/entropy.hpp"
#include "scorelab/version.hpp"

namespace scorelab {

/// Files are written to a temporary sibling and renamed into place; on
/// failure every file written so far is removed.
class OutputSet {
public:
    explicit OutputSet(std::filesystem::path root) : root_(std::move(root)) {}
    OutputSet(const OutputSet&) = delete;
    OutputSet& operator=(const OutputSet&) = delete;
    ~OutputSet() {
        if (!committed_) rollback();
    }

    std::filesystem::path write(const std::string& relative, const std::string& content) {
        const auto target = root_ / relative;
        if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
        auto tmp = target;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw Error("cannot write '" + tmp.string() + "'");
            pending_ = tmp;
            out << content;
            out.flush();
            if (!out) throw Error("write failed for '" + tmp.string() + "'");
        }
        std::filesystem::rename(tmp, target);
        pending_.clear();
        written_.push_back(target);
        return target;
    }

    void commit() { committed_ = true; }

    void rollback() noexcept {
        std::error_code ec;
        if (!pending_.empty()) std::filesystem::remove(pending_, ec);
        for (const auto& p : written_) std::filesystem::remove(p, ec);
        written_.clear();
    }

    const std::vector<std::filesystem::path>& written() const { return written_; }

private:
    std::filesystem::path root_;
    std::filesystem::path pending_;
    std::vector<std::filesystem::path> written_;
    bool committed_ = false;
};

struct RunResult {
    std::vector<std::filesystem::path> files;
    std::filesystem::path manifest;
    double wall_seconds = 0.0;
};

namespace detail {

inline std::string sibling_csv(const std::string& path) {
    std::filesystem::path p(path);
    if (p.extension() == ".json") return p.replace_extension(".csv").string();
    return path + ".csv";
}

inline double integration_floor_sigma2(const DataDistribution& dist, double lo) { return std::max(lo, dist.sigma2_floor()); }

inline std::string entropy_profile_csv(const Scenario& sc, const DataDistribution& dist, const NoiseSchedule& sched,
                                       Seed seed) {
    const auto prof = entropy_profile(dist, sched, sc.grid.values(), sc.n_samples, seed);
    std::ostringstream out;
    write_profile_csv(out, prof, sc.estimators);
    return out.str();
}

inline std::string divergence_sweep_csv(const Scenario& sc, const DataDistribution& dist, const NoiseSchedule& sched,
                                        Seed seed) {
    const auto grid = sc.grid.values();
    const double d = static_cast<double>(dist.dim());
    struct Row {
        DivergenceReport div;
        EntropyPoint ent;
    };
    const auto rows = parallel_map(grid.size(), [&](std::size_t k) {
        const double t = sched.time_at(grid[k]);
        Row r{divergence_report(dist, grid[k], sc.n_samples, substream(seed, "div")),
              entropy_point(dist, grid[k], sched.nu2(t), sc.n_samples, substream(seed, "cond"))};
        r.div.t = t;
        return r;
    });
    std::ostringstream out;
    out << "sigma2,t,div,stderr_div,div1,delta_div,stderr_delta_div,marginal_rate,stderr_marginal_rate,"
           "cond_rate_fd,stderr_cond_rate_fd,identity_residual,stderr_identity\n";
    for (const auto& r : rows) {
        const double nu2 = r.ent.nu2;
        const double marginal = -0.5 * nu2 * r.div.div.value;
        const double marginal_se = 0.5 * nu2 * r.div.div.std_error;
        const auto& cond = r.ent.finite_difference;
        const double residual = marginal - d * nu2 / (2.0 * r.div.sigma2) + cond.value;
        out << format_double(r.div.sigma2) << ',' << format_double(r.div.t) << ',' << format_double(r.div.div.value)
            << ',' << format_double(r.div.div.std_error) << ',' << format_double(r.div.div1) << ','
            << format_double(r.div.delta_div.value) << ',' << format_double(r.div.delta_div.std_error) << ','
            << format_double(marginal) << ',' << format_double(marginal_se) << ',' << format_double(cond.value) << ','
            << format_double(cond.std_error) << ',' << format_double(residual) << ','
            << format_double(combined_stderr(marginal_se, cond.std_error)) << '\n';
    }
    return out.str();
}

inline std::string fisher_sweep_csv(const Scenario& sc, const DataDistribution& dist, const Json& params) {
    Vector x = dist.mean();
    if (params.contains("x")) {
        x = to_vector(params.at("x").get<std::vector<double>>());
        if (x.size() != dist.dim()) throw DomainError("fisher-sweep: x has the wrong dimension");
    }
    const FisherBand band{params.at("band_lo").get<double>(), params.at("band_hi").get<double>()};
    std::ostringstream out;
    out << "sigma2,est_manifold_dim,n_suppressed";
    for (Eigen::Index i = 1; i <= dist.dim(); ++i) out << ",eig_" << i;
    out << '\n';
    for (double s2 : sc.grid.values()) {
        const auto f = fisher_spectrum(dist, x, s2, band);
        out << format_double(s2) << ',' << f.est_manifold_dim << ',' << count_suppressed(f);
        for (Eigen::Index i = 0; i < f.eigenvalues.size(); ++i) out << ',' << format_double(f.eigenvalues(i));
        out << '\n';
    }
    return out.str();
}

inline Json tree_document(const Scenario& sc, const DataDistribution& dist, const NoiseSchedule& sched,
                          const Json& params, FixedPointTree& tree) {
    const double hi = params.value("sigma2_hi", sc.grid.max);
    const double lo = params.value("sigma2_lo", sc.grid.min);
    tree = trace_tree(dist, sched, sched.time_at(hi), sched.time_at(lo),
                      static_cast<std::size_t>(params.at("n_grid").get<std::int64_t>()));
    Json doc = tree_to_json(tree);
    doc["data"] = distribution_json(dist);
    doc["schedule"] = sc.schedule;
    doc["dim"] = dist.dim();
    return doc;
}

inline std::string trajectory_csv(const Scenario& sc, const DataDistribution& dist, const NoiseSchedule& sched,
                                  const Json& params, Seed seed) {
    const double t_start = sched.time_at(sc.grid.max);
    const double t_end = sched.time_at(integration_floor_sigma2(dist, sc.grid.min));
    const auto mode = params.at("mode") == "reverse-ode" ? TrajectoryMode::reverse_ode : TrajectoryMode::reverse_sde;
    const auto ens = reverse_ensemble(dist, sched, t_start, t_end, params.at("n_steps").get<std::size_t>(), mode,
                                      params.at("n_trajectories").get<std::size_t>(), seed, true);
    std::ostringstream out;
    write_trajectories_csv(out, ens.trajectories);
    return out.str();
}

inline std::string twentyq_csv(const Json& params, Seed seed) {
    const auto universe = balanced_universe(params.at("bits").get<unsigned>());
    const auto policy = params.at("policy") == "lazy-random" ? OraclePolicy::lazy_random : OraclePolicy::fixed_element;
    const auto rec = play_oracle(universe, params.at("element").get<std::size_t>(), policy, seed);
    std::ostringstream out;
    write_game_csv(out, rec);
    return out.str();
}

}  // namespace detail

/// Runs every output of a validated scenario under `output_root`, then
/// writes `<name>.manifest.json`. Outputs run one after another; the work
/// inside each output is parallel.
inline RunResult run_scenario(const Scenario& sc, const std::filesystem::path& output_root) {
    const auto start = std::chrono::steady_clock::now();
    OutputSet files(output_root);
    std::optional<DataDistribution> dist;
    if (sc.distribution) dist = make_distribution(*sc.distribution, sc.base_dir);
    const NoiseSchedule sched = make_schedule(sc.schedule);
    auto need_dist = [&]() -> const DataDistribution& {
        if (!dist) throw DomainError("this output needs a distribution");
        return *dist;
    };

    for (std::size_t i = 0; i < sc.outputs.size(); ++i) {
        const auto& o = sc.outputs[i];
        const Seed seed = substream(sc.master_seed, o.kind, i);
        if (o.kind == "entropy-profile") {
            files.write(o.path, detail::entropy_profile_csv(sc, need_dist(), sched, seed));
        } else if (o.kind == "divergence-sweep") {
            files.write(o.path, detail::divergence_sweep_csv(sc, need_dist(), sched, seed));
        } else if (o.kind == "fisher-sweep") {
            files.write(o.path, detail::fisher_sweep_csv(sc, need_dist(), o.params));
        } else if (o.kind == "fixed-point-tree") {
            FixedPointTree tree;
            const Json doc = detail::tree_document(sc, need_dist(), sched, o.params, tree);
            files.write(o.path, doc.dump(1) + "\n");
            std::ostringstream csv;
            write_tree_csv(csv, tree);
            files.write(detail::sibling_csv(o.path), csv.str());
        } else if (o.kind == "trajectory-ensemble") {
            files.write(o.path, detail::trajectory_csv(sc, need_dist(), sched, o.params, seed));
        } else if (o.kind == "twentyq") {
            files.write(o.path, detail::twentyq_csv(o.params, seed));
        } else {
            throw DomainError("unknown output kind '" + o.kind + "'");
        }
    }

    RunResult result;
    result.files = files.written();
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    Json manifest{{"name", sc.name},
                  {"config_hash", hex64(config_hash(sc))},
                  {"master_seed", sc.master_seed},
                  {"scorelab_version", kVersion},
                  {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                        "." + std::to_string(EIGEN_MINOR_VERSION)},
                  {"json_version", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                       std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                       std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                  {"threads", thread_count()},
                  {"wall_time_seconds", result.wall_seconds},
                  {"config", sc.normalized}};
    Json outs = Json::array();
    for (const auto& o : sc.outputs) outs.push_back({{"kind", o.kind}, {"path", o.path}});
    manifest["outputs"] = outs;
    result.manifest = files.write(sc.name + ".manifest.json", manifest.dump(1) + "\n");
    result.files = files.written();
    files.commit();
    return result;
}

}  // namespace scorelab
