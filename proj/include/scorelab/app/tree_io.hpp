#pragma once

#include <ostream>

#include <nlohmann/json.hpp>

#include "scorelab/core/format.hpp"
#include "scorelab/fixedpoints/tree.hpp"

namespace scorelab {

namespace detail {

inline nlohmann::json vector_json(const Vector& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline Vector json_vector(const nlohmann::json& a) {
    Vector v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
    return v;
}

}  // namespace detail

inline nlohmann::json tree_to_json(const FixedPointTree& tree) {
    using nlohmann::json;
    json paths = json::array();
    for (const auto& p : tree.paths) {
        json nodes = json::array();
        for (const auto& n : p.nodes)
            nodes.push_back({{"t", n.t},
                             {"sigma2", n.sigma2},
                             {"x", detail::vector_json(n.x_star)},
                             {"eigenvalues", detail::vector_json(n.eigenvalues)},
                             {"stable", n.stable},
                             {"residual", n.residual},
                             {"grid_index", n.grid_index}});
        paths.push_back({{"id", p.id},
                         {"born_from_event", p.born_from_event},
                         {"ended_by_event", p.ended_by_event},
                         {"nodes", nodes}});
    }
    json events = json::array();
    for (const auto& e : tree.branch_events)
        events.push_back({{"t_branch", e.t_branch},
                          {"sigma2_branch", e.sigma2_branch},
                          {"parent_path", e.parent_path},
                          {"child_paths", e.child_paths},
                          {"kind", to_string(e.kind)},
                          {"direction", detail::vector_json(e.direction)},
                          {"x_branch", detail::vector_json(e.x_branch)},
                          {"gap", e.gap},
                          {"critical_eigenvalue", e.critical_eigenvalue}});
    return {{"grid_t", tree.grid_t}, {"grid_sigma2", tree.grid_sigma2}, {"paths", paths}, {"branch_events", events}};
}

inline FixedPointTree tree_from_json(const nlohmann::json& doc) {
    FixedPointTree tree;
    tree.grid_t = doc.at("grid_t").get<std::vector<double>>();
    tree.grid_sigma2 = doc.at("grid_sigma2").get<std::vector<double>>();
    for (const auto& p : doc.at("paths")) {
        FixedPointPath path;
        path.id = p.at("id");
        path.born_from_event = p.at("born_from_event");
        path.ended_by_event = p.at("ended_by_event");
        for (const auto& n : p.at("nodes")) {
            FixedPointNode node;
            node.t = n.at("t");
            node.sigma2 = n.at("sigma2");
            node.x_star = detail::json_vector(n.at("x"));
            node.eigenvalues = detail::json_vector(n.at("eigenvalues"));
            node.stable = n.at("stable");
            node.residual = n.at("residual");
            node.grid_index = n.at("grid_index");
            path.nodes.push_back(std::move(node));
        }
        tree.paths.push_back(std::move(path));
    }
    for (const auto& e : doc.at("branch_events")) {
        BranchEvent ev;
        ev.t_branch = e.at("t_branch");
        ev.sigma2_branch = e.at("sigma2_branch");
        ev.parent_path = e.at("parent_path");
        ev.child_paths = e.at("child_paths").get<std::vector<int>>();
        ev.kind = e.at("kind") == "continuous" ? BranchKind::continuous : BranchKind::jump;
        ev.direction = detail::json_vector(e.at("direction"));
        ev.x_branch = detail::json_vector(e.at("x_branch"));
        ev.gap = e.at("gap");
        ev.critical_eigenvalue = e.at("critical_eigenvalue");
        tree.branch_events.push_back(std::move(ev));
    }
    return tree;
}

/// One row per node: path_id, t, sigma2, stable, lambda_max, x_1..x_D.
inline void write_tree_csv(std::ostream& out, const FixedPointTree& tree) {
    Eigen::Index d = 0;
    for (const auto& p : tree.paths)
        if (!p.nodes.empty()) d = p.nodes.front().x_star.size();
    out << "path_id,t,sigma2,stable,lambda_max";
    for (Eigen::Index i = 1; i <= d; ++i) out << ",x_" << i;
    out << '\n';
    for (const auto& p : tree.paths)
        for (const auto& n : p.nodes) {
            out << p.id << ',' << format_double(n.t) << ',' << format_double(n.sigma2) << ',' << (n.stable ? 1 : 0)
                << ',' << format_double(n.eigenvalues.maxCoeff());
            for (Eigen::Index i = 0; i < n.x_star.size(); ++i) out << ',' << format_double(n.x_star(i));
            out << '\n';
        }
}

}  // namespace scorelab
