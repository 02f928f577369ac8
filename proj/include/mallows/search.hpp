#pragma once

// Best-first search over center prefixes. Nodes hold a prefix of the
// consensus order; the child inversion count is obtained in constant time
// from a sibling of the parent (the "uncle" recursion), so each node costs
// one Q read. Supports known dispersion, constant dispersion (consensus
// ranking), and joint center/dispersion estimation, with pluggable
// admissible cost-to-go bounds, an expansion budget, an anytime hybrid
// that finishes greedily, and a factorial brute-force oracle.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "mallows/model.hpp"
#include "mallows/permutation.hpp"
#include "mallows/suff_stats.hpp"

namespace mallows {

enum class Mode { known_theta, constant_theta, joint };
enum class Heuristic { zero, known_theta_bound, constant_theta_bound };

/// How the cost-to-go bound computed at an expansion attaches to children.
/// `child_level` bounds the remaining cost from the child itself and is
/// admissible for every heuristic. `parent_level` adds the parent's full
/// bound to the child's cost; it can exceed the child's true cost to go,
/// so optimality is not guaranteed with the non-zero heuristics.
enum class BoundApplication { child_level, parent_level };

/// Joint-mode objective: `surrogate` accumulates theta_j * V_j only;
/// `full_nll` adds ln psi_j(theta_j) per stage (per-sample negative
/// log-likelihood up to scale).
enum class JointObjective { surrogate, full_nll };

struct SearchOptions {
    Mode mode = Mode::constant_theta;
    std::vector<double> theta;  // required in known_theta mode, length n-1
    Heuristic heuristic = Heuristic::zero;
    BoundApplication bound = BoundApplication::child_level;
    JointObjective objective = JointObjective::surrogate;
    std::optional<long long> budget;  // max node expansions
    double theta_cap = kThetaCap;
    const ThetaTable* theta_table = nullptr;  // joint mode; exact solver when null
};

struct SearchResult {
    Permutation pi0;
    std::vector<double> theta;  // echoed (known/constant) or estimated (joint)
    double cost = 0.0;
    long long nodes_expanded = 0;
    long long nodes_created = 0;
    bool optimal = false;
    int deepest_level = 0;       // frontier state at termination
    long long q_accesses = 0;    // instrumentation
    double wall_time = 0.0;      // seconds
};

namespace detail {

struct Node {
    std::int32_t parent;  // index into arena, -1 for root
    std::int16_t item;    // last item of the prefix, -1 for root
    std::int16_t level;   // prefix length
    double v;             // V_level at this node
    double theta;         // stage dispersion used for the cost edge
    double cost;          // C = accumulated edges
    double bound;         // L = C + attached cost-to-go bound
    // V values of this node and its siblings, indexed by item; shared by
    // all children of one expansion.
    std::shared_ptr<const std::vector<double>> sibling_v;
};

class SearchState {
public:
    SearchState(const QMatrix& Q, const SearchOptions& opt) : Q_(Q), opt_(opt), n_(Q.size()) {
        if (opt.mode == Mode::known_theta && static_cast<int>(opt.theta.size()) != n_ - 1)
            throw std::invalid_argument("searchpi: known_theta mode needs n-1 theta values");
        if (opt.mode == Mode::joint && opt.heuristic != Heuristic::zero)
            throw std::invalid_argument("searchpi: joint mode supports only the zero heuristic");
        if (opt.heuristic == Heuristic::constant_theta_bound && opt.mode != Mode::constant_theta)
            throw std::invalid_argument("searchpi: constant_theta_bound requires constant_theta mode");
        if (opt.heuristic == Heuristic::known_theta_bound && opt.mode != Mode::known_theta)
            throw std::invalid_argument("searchpi: known_theta_bound requires known_theta mode");
        if (opt.budget && *opt.budget <= 0) throw std::invalid_argument("searchpi: budget must be positive");
        if (opt.heuristic == Heuristic::constant_theta_bound) precompute_level_bounds();
        if (opt.heuristic == Heuristic::known_theta_bound) {
            q_max_ = 0.0;
            for (int j = 0; j < n_; ++j)
                for (int l = 0; l < n_; ++l)
                    if (j != l) q_max_ = std::max(q_max_, Q_(j, l));
        }
    }

    double stage_theta(int level, double v) const {
        // level is the 1-based stage index of the edge being costed.
        switch (opt_.mode) {
            case Mode::known_theta: return opt_.theta[static_cast<std::size_t>(level - 1)];
            case Mode::constant_theta: return 1.0;
            case Mode::joint: {
                const int m = n_ - level + 1;
                if (m < 2) return 0.0;
                const double vb = std::clamp(v, 0.0, static_cast<double>(m - 1));
                const double t = opt_.theta_table ? opt_.theta_table->lookup(vb, m)
                                                  : solve_theta(vb, m, opt_.theta_cap);
                return std::clamp(t, 0.0, opt_.theta_cap);
            }
        }
        return 1.0;
    }

    double edge_cost(int level, double v) const {
        const double t = stage_theta(level, v);
        double c = t * v;
        if (opt_.mode == Mode::joint && opt_.objective == JointObjective::full_nll)
            c += log_psi_j(t, n_ - level + 1);
        return c;
    }

    /// Cost-to-go bound below a node at `from_level`, given the minimum
    /// child V seen at the expansion of the level-`expand_level` node.
    double heuristic_value(int expand_level, int from_level, double v_min) const {
        switch (opt_.heuristic) {
            case Heuristic::zero: return 0.0;
            case Heuristic::constant_theta_bound:
                return level_bound_[static_cast<std::size_t>(from_level)];
            case Heuristic::known_theta_bound: {
                double a = 0.0;
                for (int jp = from_level + 1; jp <= n_ - 1; ++jp) {
                    const double b = v_min - static_cast<double>(jp - expand_level) * q_max_;
                    if (b <= 0.0) continue;
                    a += opt_.theta[static_cast<std::size_t>(jp - 1)] * b;
                }
                return a;
            }
        }
        return 0.0;
    }

    const QMatrix& Q_;
    const SearchOptions& opt_;
    int n_;
    double q_max_ = 0.0;
    std::vector<double> level_bound_;  // constant-theta bound per level
    long long q_accesses = 0;

private:
    void precompute_level_bounds() {
        std::vector<double> off;
        off.reserve(static_cast<std::size_t>(n_) * (n_ - 1));
        for (int j = 0; j < n_; ++j)
            for (int l = 0; l < n_; ++l)
                if (j != l) off.push_back(Q_(j, l));
        std::sort(off.begin(), off.end());
        std::vector<double> prefix(off.size() + 1, 0.0);
        for (std::size_t i = 0; i < off.size(); ++i) prefix[i + 1] = prefix[i] + off[i];
        level_bound_.assign(static_cast<std::size_t>(n_) + 1, 0.0);
        for (int j = 0; j <= n_; ++j) {
            const long long k = static_cast<long long>(n_ - j - 1) * (n_ - j) / 2;
            level_bound_[static_cast<std::size_t>(j)] = (k > 0) ? prefix[static_cast<std::size_t>(k)] : 0.0;
        }
    }
};

inline void prefix_of(const std::vector<Node>& arena, std::int32_t idx, std::vector<int>& out) {
    out.clear();
    while (idx >= 0) {
        const Node& nd = arena[static_cast<std::size_t>(idx)];
        if (nd.item >= 0) out.push_back(nd.item);
        idx = nd.parent;
    }
    std::reverse(out.begin(), out.end());
}

/// Queue order: smallest bound first; ties deeper level first, then
/// lexicographically smallest prefix, for determinism.
struct QueueEntry {
    double bound;
    std::int16_t level;
    std::int32_t idx;
};

struct QueueCompare {
    const std::vector<Node>* arena;
    bool operator()(const QueueEntry& a, const QueueEntry& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
        if (a.level != b.level) return a.level < b.level;  // deeper first
        thread_local std::vector<int> pa, pb;
        prefix_of(*arena, a.idx, pa);
        prefix_of(*arena, b.idx, pb);
        return pa > pb;
    }
};

}  // namespace detail

/// Greedy descent: at each level pick the unused item with the smallest V
/// (lowest index on ties), starting from the given prefix. `child_v` must
/// hold V values at level prefix.size()+1 for every unused item; pass the
/// root-level column sums when the prefix is empty. Appends to cost and
/// returns the completed item order. One Q read per candidate per level.
inline std::vector<int> greedy_complete(const QMatrix& Q, const detail::SearchState& st,
                                        std::vector<int> prefix, std::vector<double> child_v,
                                        double& cost, long long& q_accesses) {
    const int n = Q.size();
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    for (int r : prefix) used[static_cast<std::size_t>(r)] = 1;
    while (static_cast<int>(prefix.size()) < n) {
        const int level = static_cast<int>(prefix.size()) + 1;
        int best = -1;
        for (int r = 0; r < n; ++r)
            if (!used[static_cast<std::size_t>(r)] &&
                (best < 0 || child_v[static_cast<std::size_t>(r)] < child_v[static_cast<std::size_t>(best)]))
                best = r;
        cost += st.edge_cost(level, child_v[static_cast<std::size_t>(best)]);
        used[static_cast<std::size_t>(best)] = 1;
        prefix.push_back(best);
        if (static_cast<int>(prefix.size()) == n) break;
        for (int r = 0; r < n; ++r)
            if (!used[static_cast<std::size_t>(r)]) {
                child_v[static_cast<std::size_t>(r)] -= Q(best, r);
                ++q_accesses;
            }
    }
    return prefix;
}

namespace detail {

inline std::vector<double> root_child_v(const QMatrix& Q, long long& q_accesses) {
    const int n = Q.size();
    std::vector<double> v(static_cast<std::size_t>(n), 0.0);
    for (int r = 0; r < n; ++r)
        for (int l = 0; l < n; ++l)
            if (l != r) {
                v[static_cast<std::size_t>(r)] += Q(l, r);
                ++q_accesses;
            }
    return v;
}

}  // namespace detail

/// Best-first estimation of the central permutation (and, in joint mode,
/// the dispersions). Terminal nodes live at level n-1: the last item is
/// implied and its stage contributes zero cost. With a budget, the run
/// stops after that many expansions and finishes greedily from the deepest
/// frontier node (ties: smallest bound), reporting optimal = false.
inline SearchResult searchpi(const QMatrix& Q, const SearchOptions& opt = {}) {
    const auto t_start = std::chrono::steady_clock::now();
    const int n = Q.size();
    detail::SearchState st(Q, opt);

    std::vector<detail::Node> arena;
    detail::QueueCompare cmp{&arena};
    std::priority_queue<detail::QueueEntry, std::vector<detail::QueueEntry>, detail::QueueCompare>
        frontier(cmp);

    arena.push_back({-1, -1, 0, 0.0, 0.0, 0.0, 0.0, nullptr});
    frontier.push({0.0, 0, 0});

    SearchResult res{Permutation::identity(n), {}, 0.0, 0, 0, false, 0, 0, 0.0};
    std::vector<int> prefix_buf;
    bool truncated = false;

    std::int32_t goal = -1;
    while (!frontier.empty()) {
        const detail::QueueEntry top = frontier.top();
        frontier.pop();
        const detail::Node node = arena[static_cast<std::size_t>(top.idx)];
        if (node.level == n - 1) {
            goal = top.idx;
            res.optimal = true;
            break;
        }
        if (opt.budget && res.nodes_expanded >= *opt.budget) {
            frontier.push(top);  // keep the frontier intact for the greedy finish
            truncated = true;
            break;
        }
        ++res.nodes_expanded;

        const int j = node.level;
        detail::prefix_of(arena, top.idx, prefix_buf);
        std::vector<char> used(static_cast<std::size_t>(n), 0);
        for (int r : prefix_buf) used[static_cast<std::size_t>(r)] = 1;

        // Child V values via the uncle recursion (or column sums at the root).
        auto child_v = std::make_shared<std::vector<double>>(static_cast<std::size_t>(n),
                                                             std::numeric_limits<double>::quiet_NaN());
        double v_min = std::numeric_limits<double>::infinity();
        if (j == 0) {
            *child_v = detail::root_child_v(Q, st.q_accesses);
            for (int r = 0; r < n; ++r) v_min = std::min(v_min, (*child_v)[static_cast<std::size_t>(r)]);
        } else {
            const auto& sib = *node.sibling_v;
            for (int r = 0; r < n; ++r) {
                if (used[static_cast<std::size_t>(r)]) continue;
                const double v = sib[static_cast<std::size_t>(r)] - Q(node.item, r);
                ++st.q_accesses;
                (*child_v)[static_cast<std::size_t>(r)] = v;
                v_min = std::min(v, v_min);
            }
        }

        const int bound_level = (opt.bound == BoundApplication::child_level) ? j + 1 : j;
        const double a = st.heuristic_value(j, bound_level, v_min);

        for (int r = 0; r < n; ++r) {
            if (used[static_cast<std::size_t>(r)]) continue;
            const double v = (*child_v)[static_cast<std::size_t>(r)];
            const int level = j + 1;
            const double theta = st.stage_theta(level, v);
            const double cost = node.cost + st.edge_cost(level, v);
            const double bound = cost + a;
            arena.push_back({top.idx, static_cast<std::int16_t>(r), static_cast<std::int16_t>(level),
                             v, theta, cost, bound, child_v});
            frontier.push({bound, static_cast<std::int16_t>(level),
                           static_cast<std::int32_t>(arena.size() - 1)});
            ++res.nodes_created;
            res.deepest_level = std::max(res.deepest_level, level);
        }
    }

    std::vector<int> order;
    double cost = 0.0;
    if (goal >= 0) {
        const detail::Node& g = arena[static_cast<std::size_t>(goal)];
        detail::prefix_of(arena, goal, order);
        for (int r = 0; r < n; ++r)
            if (std::find(order.begin(), order.end(), r) == order.end()) {
                order.push_back(r);
                break;
            }
        cost = g.cost;
        res.deepest_level = n - 1;
    } else if (truncated) {
        // Deepest frontier node, ties by smallest bound then queue order.
        std::vector<detail::QueueEntry> rest;
        while (!frontier.empty()) {
            rest.push_back(frontier.top());
            frontier.pop();
        }
        const detail::QueueEntry* pick = nullptr;
        for (const auto& e : rest)
            if (!pick || e.level > pick->level ||
                (e.level == pick->level && e.bound < pick->bound))
                pick = &e;
        const detail::Node& nd = arena[static_cast<std::size_t>(pick->idx)];
        detail::prefix_of(arena, pick->idx, prefix_buf);
        cost = nd.cost;
        std::vector<double> cv;
        if (nd.level == 0) {
            cv = detail::root_child_v(Q, st.q_accesses);
        } else {
            cv.assign(static_cast<std::size_t>(n), std::numeric_limits<double>::quiet_NaN());
            std::vector<char> used(static_cast<std::size_t>(n), 0);
            for (int r : prefix_buf) used[static_cast<std::size_t>(r)] = 1;
            for (int r = 0; r < n; ++r)
                if (!used[static_cast<std::size_t>(r)]) {
                    cv[static_cast<std::size_t>(r)] = (*nd.sibling_v)[static_cast<std::size_t>(r)] - Q(nd.item, r);
                    ++st.q_accesses;
                }
        }
        order = greedy_complete(Q, st, prefix_buf, std::move(cv), cost, st.q_accesses);
        res.nodes_expanded += n - 1 - nd.level;
        for (int l = nd.level; l <= n - 2; ++l) res.nodes_created += n - l;
    } else {
        throw std::logic_error("searchpi: frontier exhausted");  // unreachable
    }

    res.pi0 = Permutation::from_item_order(order);
    res.cost = cost;
    res.q_accesses = st.q_accesses;
    // Echo or estimate the stage dispersions for the returned center.
    const std::vector<double> vb = v_bar(Q, res.pi0);
    res.theta.resize(static_cast<std::size_t>(n - 1));
    for (int j = 0; j < n - 1; ++j)
        res.theta[static_cast<std::size_t>(j)] = st.stage_theta(j + 1, vb[static_cast<std::size_t>(j)]);
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return res;
}

/// Anytime hybrid: best-first until the expansion budget runs out, then a
/// greedy finish from the deepest frontier node. Identical to searchpi
/// when the budget suffices.
inline SearchResult bf_css(const QMatrix& Q, SearchOptions opt, long long node_budget) {
    if (node_budget <= 0) throw std::invalid_argument("bf_css: budget must be positive");
    opt.budget = node_budget;
    return searchpi(Q, opt);
}

/// Evaluates the mode's objective for a fixed center.
inline double objective_value(const QMatrix& Q, const Permutation& pi0, const SearchOptions& opt) {
    detail::SearchState st(Q, opt);
    const std::vector<double> vb = v_bar(Q, pi0);
    double c = 0.0;
    for (int j = 0; j < Q.size() - 1; ++j) c += st.edge_cost(j + 1, vb[static_cast<std::size_t>(j)]);
    return c;
}

/// Exhaustive oracle: evaluates every permutation, returns the argmin with
/// the lexicographically smallest item order on ties. Guarded to n <= 10.
inline SearchResult brute_force(const QMatrix& Q, const SearchOptions& opt = {}) {
    const int n = Q.size();
    if (n > 10) throw std::invalid_argument("brute_force: n too large");
    detail::SearchState st(Q, opt);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::vector<int> best_order;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
        const Permutation p = Permutation::from_item_order(order);
        const std::vector<double> vb = v_bar(Q, p);
        double c = 0.0;
        for (int j = 0; j < n - 1; ++j) c += st.edge_cost(j + 1, vb[static_cast<std::size_t>(j)]);
        if (c < best_cost) {
            best_cost = c;
            best_order = order;
        }
    } while (std::next_permutation(order.begin(), order.end()));
    SearchResult res{Permutation::from_item_order(best_order), {}, best_cost, 0, 0, true, n - 1, 0, 0.0};
    const std::vector<double> vb = v_bar(Q, res.pi0);
    res.theta.resize(static_cast<std::size_t>(n - 1));
    for (int j = 0; j < n - 1; ++j)
        res.theta[static_cast<std::size_t>(j)] = st.stage_theta(j + 1, vb[static_cast<std::size_t>(j)]);
    return res;
}

}  // namespace mallows
