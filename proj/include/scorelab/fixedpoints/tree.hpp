#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "scorelab/core/errors.hpp"
#include "scorelab/fixedpoints/solve.hpp"
#include "scorelab/model/schedule.hpp"

namespace scorelab {

enum class BranchKind { continuous, jump };

inline std::string to_string(BranchKind k) { return k == BranchKind::continuous ? "continuous" : "jump"; }

/// Time-ordered (decreasing t) sequence of stable fixed points.
struct FixedPointPath {
    int id = 0;
    std::vector<FixedPointNode> nodes;
    int born_from_event = -1;
    int ended_by_event = -1;
};

/// A generative decision: where `child_paths` separate from `parent_path`.
///   continuous: parent loses stability (critical eigenvalue -> 0), two
///               children emerge from the parent position.
///   jump:       a fixed point appears at finite distance `gap` from the
///               parent; the parent is the nearest fixed point just above
///               t_branch (one-sided limit convention).
struct BranchEvent {
    double t_branch = 0.0;
    double sigma2_branch = 0.0;
    int parent_path = -1;
    std::vector<int> child_paths;
    BranchKind kind = BranchKind::continuous;
    Vector direction;
    Vector x_branch;
    double gap = 0.0;
    double critical_eigenvalue = 0.0;  // parent's largest Jacobian eigenvalue at t_branch
};

struct FixedPointTree {
    std::vector<FixedPointPath> paths;
    std::vector<BranchEvent> branch_events;
    std::vector<double> grid_t;       // decreasing
    std::vector<double> grid_sigma2;  // decreasing

    /// Paths that reach the last grid node.
    std::vector<int> leaves() const {
        std::vector<int> out;
        const int last = static_cast<int>(grid_t.size()) - 1;
        for (const auto& p : paths)
            if (!p.nodes.empty() && p.nodes.back().grid_index == last) out.push_back(p.id);
        return out;
    }

    /// Node of `path` at grid index k, if the path is alive there.
    const FixedPointNode* node_at(int path, int k) const {
        for (const auto& n : paths[static_cast<std::size_t>(path)].nodes)
            if (n.grid_index == k) return &n;
        return nullptr;
    }
};

class GridRefinementError : public NumericError {
public:
    GridRefinementError(const std::string& what, std::size_t suggested_n_grid)
        : NumericError(what + "; retry with n_grid >= " + std::to_string(suggested_n_grid)),
          suggested_(suggested_n_grid) {}
    std::size_t suggested_n_grid() const noexcept { return suggested_; }

private:
    std::size_t suggested_;
};

struct TreeOptions {
    /// Child seeds at x +- spawn_factor * sigma * v along the critical eigenvector.
    double spawn_factor = 1e-4;
    /// A warm-started solve that moves more than jump_factor x the predicted
    /// drift is classified as a jump.
    double jump_factor = 10.0;
    /// Two fixed points closer than match_factor * scale are identified.
    double match_factor = 1e-6;
    /// Ascend from every data point at every grid node to catch fixed points
    /// born away from existing paths.
    bool detect_births = true;
};

namespace detail {

inline Vector canonical_direction(Vector v) {
    const double n = v.norm();
    if (n == 0.0) return v;
    v /= n;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > 1e-12) {
            if (v(i) < 0.0) v = -v;
            break;
        }
    }
    return v;
}

class TreeBuilder {
public:
    TreeBuilder(const DataDistribution& dist, const NoiseSchedule& schedule, const TreeOptions& options,
                std::size_t n_grid)
        : dist_(dist), schedule_(schedule), opt_(options), n_grid_(n_grid),
          match_tol_(options.match_factor * dist.scale()) {}

    FixedPointTree run(double t_hi, double t_lo) {
        build_grid(t_hi, t_lo);
        start();
        for (std::size_t k = 1; k < n_grid_; ++k) step(static_cast<int>(k));
        return std::move(tree_);
    }

private:
    FixedPointNode solve(const Vector& x, double s2, FixedPointStrategy strategy) const {
        FixedPointOptions o;
        o.strategy = strategy;
        o.max_iter = strategy == FixedPointStrategy::newton ? 200 : 50000;
        auto node = solve_fixed_point(dist_, x, s2, o);
        node.t = schedule_.time_at(s2);
        return node;
    }

    std::optional<FixedPointNode> try_solve(const Vector& x, double s2, FixedPointStrategy strategy) const {
        try {
            return solve(x, s2, strategy);
        } catch (const NumericError&) {
            return std::nullopt;
        }
    }

    void build_grid(double t_hi, double t_lo) {
        if (n_grid_ < 2) throw DomainError("trace_tree: n_grid must be >= 2");
        if (!(t_hi > t_lo) || !(t_lo > 0.0)) throw DomainError("trace_tree: need t_hi > t_lo > 0");
        const double hi = schedule_.sigma2(t_hi), lo = schedule_.sigma2(t_lo);
        for (std::size_t k = 0; k < n_grid_; ++k) {
            const double f = static_cast<double>(k) / static_cast<double>(n_grid_ - 1);
            double s2 = hi * std::exp(f * std::log(lo / hi));
            if (k == 0) s2 = hi;
            if (k + 1 == n_grid_) s2 = lo;
            tree_.grid_sigma2.push_back(s2);
            tree_.grid_t.push_back(k == 0 ? t_hi : (k + 1 == n_grid_ ? t_lo : schedule_.time_at(s2)));
        }
    }

    void start() {
        const double s2 = tree_.grid_sigma2[0];
        FixedPointNode root = solve(dist_.mean(), s2, FixedPointStrategy::ascent);
        root.t = tree_.grid_t[0];
        root.grid_index = 0;
        if (dist_.is_mixture()) {
            const Matrix& cols = dist_.columns();
            for (Eigen::Index j = 0; j < cols.cols(); ++j) {
                const auto other = solve(cols.col(j), s2, FixedPointStrategy::ascent);
                if ((other.x_star - root.x_star).norm() > match_tol_)
                    throw DomainError("trace_tree: several fixed points at t_hi; choose a larger t_hi");
            }
        }
        add_path({root}, -1);
    }

    int add_path(std::vector<FixedPointNode> nodes, int born_from) {
        FixedPointPath p;
        p.id = static_cast<int>(tree_.paths.size());
        p.nodes = std::move(nodes);
        p.born_from_event = born_from;
        tree_.paths.push_back(std::move(p));
        active_.push_back(tree_.paths.back().id);
        return tree_.paths.back().id;
    }

    int add_event(BranchEvent ev) {
        tree_.branch_events.push_back(std::move(ev));
        return static_cast<int>(tree_.branch_events.size()) - 1;
    }

    void end_path(int id, int event) {
        tree_.paths[static_cast<std::size_t>(id)].ended_by_event = event;
        active_.erase(std::remove(active_.begin(), active_.end(), id), active_.end());
    }

    FixedPointPath& path(int id) { return tree_.paths[static_cast<std::size_t>(id)]; }

    /// Tangent predictor from the implicit function theorem:
    /// dx/dsigma2 = -J^{-1} ds/dsigma2.
    Vector predict(const FixedPointNode& prev, double s2) const {
        if (!prev.stable) return prev.x_star;
        const double h = 1e-4 * prev.sigma2;
        const Vector ds = (score_at(dist_, prev.x_star, prev.sigma2 + h).score -
                           score_at(dist_, prev.x_star, prev.sigma2 - h).score) /
                          (2.0 * h);
        const ScoreEval ev = score_at(dist_, prev.x_star, prev.sigma2);
        const Vector dx = -ev.jacobian.ldlt().solve(ds);
        if (!dx.allFinite()) return prev.x_star;
        return prev.x_star + dx * (s2 - prev.sigma2);
    }

    bool matches(const Vector& a, const Vector& b) const { return (a - b).norm() <= match_tol_; }

    /// Position uncertainty of a converged root: solver residual tolerance
    /// over the softest Jacobian direction.
    double uncertainty(const FixedPointNode& n) const {
        const double tol = FixedPointOptions{}.tolerance * dist_.scale() / n.sigma2;
        const double soft = std::abs(n.eigenvalues.maxCoeff());
        return soft > 0.0 ? std::min(dist_.scale(), tol / soft) : dist_.scale();
    }

    bool resolvable(const FixedPointNode& n) const { return uncertainty(n) <= 1e-3 * std::sqrt(n.sigma2); }

    void step(int k) {
        const double s2 = tree_.grid_sigma2[static_cast<std::size_t>(k)];
        const double s2_prev = tree_.grid_sigma2[static_cast<std::size_t>(k - 1)];
        const std::vector<int> current = active_;
        for (int id : current)
            if (path(id).nodes.back().grid_index < k) continue_path(id, k, s2, s2_prev);
        merge_duplicates(k);
        if (opt_.detect_births && dist_.is_mixture()) detect_births(k, s2, s2_prev);
    }

    void continue_path(int id, int k, double s2, double s2_prev) {
        const FixedPointNode prev = path(id).nodes.back();
        const Vector pred = predict(prev, s2);
        auto node = try_solve(pred, s2, FixedPointStrategy::newton);
        if (!node) node = try_solve(prev.x_star, s2, FixedPointStrategy::ascent);
        if (!node)
            throw GridRefinementError("trace_tree: lost fixed-point path " + std::to_string(id) + " at sigma2 = " +
                                          std::to_string(s2),
                                      2 * n_grid_);
        node->grid_index = k;
        node->t = tree_.grid_t[static_cast<std::size_t>(k)];
        const double drift = (pred - prev.x_star).norm();
        const double moved = (node->x_star - pred).norm();
        if (moved > opt_.jump_factor * drift + match_tol_ && moved > 1e-3 * std::sqrt(s2)) {
            // Warm start snapped to a distant root.
            BranchEvent ev;
            ev.kind = BranchKind::jump;
            ev.parent_path = id;
            ev.sigma2_branch = std::sqrt(s2 * s2_prev);
            ev.t_branch = schedule_.time_at(ev.sigma2_branch);
            ev.x_branch = prev.x_star;
            ev.direction = canonical_direction(node->x_star - prev.x_star);
            ev.gap = (node->x_star - prev.x_star).norm();
            ev.critical_eigenvalue = prev.eigenvalues.maxCoeff();
            const int e = add_event(ev);
            end_path(id, e);
            const int child = add_path({*node}, e);
            tree_.branch_events[static_cast<std::size_t>(e)].child_paths.push_back(child);
            return;
        }
        if (prev.stable && !node->stable) {
            branch(id, prev, *node, k, s2, s2_prev);
            return;
        }
        path(id).nodes.push_back(*node);
    }

    /// Parent lost stability between s2_prev and s2: locate the critical point
    /// by bisection on the largest Jacobian eigenvalue, then seed children
    /// along the critical eigenvector.
    void branch(int id, const FixedPointNode& prev, const FixedPointNode& unstable, int k, double s2,
                double s2_prev) {
        double lo = s2, hi = s2_prev;
        FixedPointNode critical = prev;
        Vector x = prev.x_star;
        for (int it = 0; it < 100 && hi - lo > 1e-14 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            auto n = try_solve(x, mid, FixedPointStrategy::newton);
            if (!n) break;
            x = n->x_star;
            critical = *n;
            (n->stable ? hi : lo) = mid;
        }
        critical.t = schedule_.time_at(critical.sigma2);
        critical.grid_index = -1;
        const Eigen::Index top = critical.eigenvalues.size() - 1;
        const Vector v = critical.eigenvectors.col(top);

        // Seed directions span the unstable subspace: each eigenvector and the
        // diagonals of every pair, so degenerate crossings reach all children.
        std::vector<Vector> dirs;
        for (Eigen::Index i = 0; i < unstable.eigenvalues.size(); ++i)
            if (unstable.eigenvalues(i) >= -stability_threshold(unstable.sigma2))
                dirs.push_back(unstable.eigenvectors.col(i));
        if (dirs.empty()) dirs.push_back(v);
        const std::size_t n_axes = dirs.size();
        for (std::size_t i = 0; i < n_axes; ++i)
            for (std::size_t j = i + 1; j < n_axes; ++j) {
                dirs.push_back((dirs[i] + dirs[j]) / std::sqrt(2.0));
                dirs.push_back((dirs[i] - dirs[j]) / std::sqrt(2.0));
            }

        // Children too close to the critical point to be resolved are seeded
        // again at the following grid nodes.
        std::vector<FixedPointNode> kids;
        Vector base = unstable.x_star;
        for (int kk = k; kk < static_cast<int>(n_grid_) && kk <= k + 3 && kids.empty(); ++kk) {
            const double s2k = tree_.grid_sigma2[static_cast<std::size_t>(kk)];
            if (kk > k) {
                auto n = try_solve(base, s2k, FixedPointStrategy::newton);
                if (n) base = n->x_star;
            }
            kids = spawn_children(base, dirs, s2k, kk);
        }

        BranchEvent ev;
        ev.parent_path = id;
        ev.sigma2_branch = critical.sigma2;
        ev.t_branch = critical.t;
        ev.x_branch = critical.x_star;
        ev.critical_eigenvalue = critical.eigenvalues(top);
        ev.direction = canonical_direction(v);
        if (kids.size() >= 2) {
            ev.kind = BranchKind::continuous;
            ev.gap = 0.0;
        } else {
            ev.kind = BranchKind::jump;
            ev.gap = kids.empty() ? 0.0 : (kids.front().x_star - critical.x_star).norm();
        }
        path(id).nodes.push_back(critical);
        const int e = add_event(ev);
        end_path(id, e);
        for (auto& c : kids) {
            const bool known = std::any_of(active_.begin(), active_.end(), [&](int a) {
                const auto& last = path(a).nodes.back();
                return last.grid_index == c.grid_index && matches(last.x_star, c.x_star);
            });
            if (known) continue;
            std::vector<FixedPointNode> nodes;
            if (ev.kind == BranchKind::continuous) nodes.push_back(critical);
            nodes.push_back(c);
            const int child = add_path(std::move(nodes), e);
            tree_.branch_events[static_cast<std::size_t>(e)].child_paths.push_back(child);
        }
    }

    std::vector<FixedPointNode> spawn_children(const Vector& from, const std::vector<Vector>& dirs, double s2,
                                               int k) const {
        const double delta = opt_.spawn_factor * std::sqrt(s2);
        std::vector<FixedPointNode> kids;
        // Pitchfork children emerge within a noise width of the parent;
        // anything farther is left to birth detection.
        const double reach = std::sqrt(s2);
        auto accept = [&](const std::optional<FixedPointNode>& n) {
            return n && n->stable && resolvable(*n) && !matches(n->x_star, from) &&
                   (n->x_star - from).norm() <= 2.0 * reach;
        };
        for (const Vector& v : dirs)
        for (double sign : {1.0, -1.0}) {
            // Newton from offsets growing by decades until it leaves the
            // unstable parent; plain ascent from the smallest offset otherwise.
            std::optional<FixedPointNode> c;
            for (double d = delta; d <= reach && !c; d *= 10.0) {
                auto n = try_solve(from + sign * d * v, s2, FixedPointStrategy::newton);
                if (accept(n)) c = n;
            }
            if (!c) {
                auto n = try_solve(from + sign * delta * v, s2, FixedPointStrategy::ascent);
                if (accept(n)) c = n;
            }
            if (!c) continue;
            c->grid_index = k;
            c->t = tree_.grid_t[static_cast<std::size_t>(k)];
            bool dup = false;
            for (const auto& other : kids) dup = dup || matches(other.x_star, c->x_star);
            if (!dup) kids.push_back(*c);
        }
        return kids;
    }

    void merge_duplicates(int k) {
        std::sort(active_.begin(), active_.end());
        for (std::size_t i = 0; i < active_.size(); ++i) {
            for (std::size_t j = i + 1; j < active_.size(); ++j) {
                const auto& a = path(active_[i]).nodes.back();
                const auto& b = path(active_[j]).nodes.back();
                if (a.grid_index == k && b.grid_index == k && matches(a.x_star, b.x_star)) {
                    // Two paths collapsed onto one root: keep the older path.
                    if (path(active_[j]).nodes.size() > 1) path(active_[j]).nodes.pop_back();
                    end_path(active_[j], -1);
                    --j;
                }
            }
        }
    }

    /// Continuations of the active paths at an intermediate sigma2.
    std::vector<Vector> active_positions(double s2) const {
        std::vector<Vector> out;
        for (int id : active_) {
            const auto& last = tree_.paths[static_cast<std::size_t>(id)].nodes;
            // Node before the newest one lies above s2 on the grid.
            const auto& base = last.size() >= 2 && last.back().sigma2 < s2 ? last[last.size() - 2] : last.back();
            auto n = try_solve(base.x_star, s2, FixedPointStrategy::newton);
            out.push_back(n ? n->x_star : base.x_star);
        }
        return out;
    }

    bool is_new(const Vector& x, const std::vector<Vector>& known) const {
        return std::none_of(known.begin(), known.end(), [&](const Vector& q) { return matches(q, x); });
    }

    void detect_births(int k, double s2, double s2_prev) {
        const Matrix& cols = dist_.columns();
        std::vector<Vector> known;
        for (int id : active_) known.push_back(path(id).nodes.back().x_star);
        for (Eigen::Index j = 0; j < cols.cols(); ++j) {
            auto found = try_solve(cols.col(j), s2, FixedPointStrategy::ascent);
            if (!found || !found->stable || !resolvable(*found) || !is_new(found->x_star, known)) continue;
            found->grid_index = k;
            found->t = tree_.grid_t[static_cast<std::size_t>(k)];
            known.push_back(found->x_star);
            record_birth(cols.col(j), *found, s2, s2_prev);
        }
    }

    void record_birth(const Vector& seed, const FixedPointNode& found, double s2, double s2_prev) {
        // Bisection for the largest sigma2 at which the ascent from `seed`
        // still lands on a root distinct from every active path.
        double lo = s2, hi = s2_prev;
        FixedPointNode born = found;
        for (int it = 0; it < 40 && hi - lo > 1e-10 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            auto n = try_solve(seed, mid, FixedPointStrategy::ascent);
            if (n && n->stable && resolvable(*n) && is_new(n->x_star, active_positions(mid))) {
                lo = mid;
                born = *n;
            } else {
                hi = mid;
            }
        }
        born.t = schedule_.time_at(born.sigma2);
        born.grid_index = born.sigma2 == s2 ? found.grid_index : -1;

        const auto above = active_positions(hi);
        int parent = -1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < active_.size(); ++i) {
            const double d = (above[i] - born.x_star).norm();
            if (d < best) {
                best = d;
                parent = active_[i];
            }
        }
        BranchEvent ev;
        ev.parent_path = parent;
        ev.sigma2_branch = born.sigma2;
        ev.t_branch = born.t;
        if (parent < 0) {
            // Every earlier root has vanished: nothing to branch from.
            ev.kind = BranchKind::jump;
            ev.x_branch = born.x_star;
            ev.direction = Vector::Zero(born.x_star.size());
            ev.critical_eigenvalue = born.eigenvalues.maxCoeff();
        } else {
            const auto& pn = path(parent).nodes;
            const double parent_drift =
                pn.size() >= 2 ? (pn.back().x_star - pn[pn.size() - 2].x_star).norm() : 0.0;
            const auto slot = std::find(active_.begin(), active_.end(), parent) - active_.begin();
            ev.x_branch = above[static_cast<std::size_t>(slot)];
            ev.gap = best;
            ev.kind = best <= opt_.jump_factor * parent_drift + match_tol_ ? BranchKind::continuous : BranchKind::jump;
            ev.direction = canonical_direction(born.x_star - ev.x_branch);
            ev.critical_eigenvalue = make_node(dist_, ev.x_branch, hi).eigenvalues.maxCoeff();
        }
        const int e = add_event(ev);
        std::vector<FixedPointNode> nodes{born};
        if (born.grid_index != found.grid_index) nodes.push_back(found);
        const int child = add_path(std::move(nodes), e);
        tree_.branch_events[static_cast<std::size_t>(e)].child_paths.push_back(child);
    }

    const DataDistribution& dist_;
    const NoiseSchedule& schedule_;
    TreeOptions opt_;
    std::size_t n_grid_;
    double match_tol_;
    FixedPointTree tree_;
    std::vector<int> active_;
};

}  // namespace detail

/// Sweeps t downward from t_hi to t_lo on a grid geometric in sigma^2,
/// continuing every stable fixed point and recording branch events.
inline FixedPointTree trace_tree(const DataDistribution& dist, const NoiseSchedule& schedule, double t_hi,
                                 double t_lo, std::size_t n_grid, const TreeOptions& options = {}) {
    return detail::TreeBuilder(dist, schedule, options, n_grid).run(t_hi, t_lo);
}

/// Path id owning each data point at grid index k: the stable fixed point
/// reached by ascent from the data point (its basin of attraction).
inline std::vector<int> equivalence_classes(const DataDistribution& dist, const FixedPointTree& tree, int k) {
    if (!dist.is_mixture()) throw UnsupportedError("equivalence_classes: mixture data required");
    const Matrix& pts = dist.columns();
    const double s2 = tree.grid_sigma2.at(static_cast<std::size_t>(k));
    const double tol = 1e-5 * dist.scale();
    std::vector<int> out;
    for (Eigen::Index j = 0; j < pts.cols(); ++j) {
        const auto node = solve_fixed_point(dist, pts.col(j), s2);
        int owner = -1;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : tree.paths) {
            const auto* n = tree.node_at(p.id, k);
            if (!n) continue;
            const double d = (n->x_star - node.x_star).norm();
            if (d < best) {
                best = d;
                owner = p.id;
            }
        }
        out.push_back(best <= tol ? owner : -1);
    }
    return out;
}

}  // namespace scorelab
