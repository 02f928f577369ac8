#pragma once

// Comparison heuristics for the consensus-ranking problem: average-rank
// sort (FV), level-wise greedy descent (CSS), and randomized pivot
// partition (ACN).

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "mallows/model.hpp"
#include "mallows/permutation.hpp"
#include "mallows/search.hpp"
#include "mallows/suff_stats.hpp"

namespace mallows {

/// Average-rank sort: q_bar[l] = sum_j Q(j,l) is one less than the average
/// rank of l; items are returned in ascending q_bar order (lowest index on
/// ties). O(n^2).
inline Permutation fv(const QMatrix& Q) {
    const int n = Q.size();
    std::vector<double> qbar(static_cast<std::size_t>(n), 0.0);
    for (int l = 0; l < n; ++l)
        for (int j = 0; j < n; ++j) qbar[static_cast<std::size_t>(l)] += Q(j, l);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return qbar[static_cast<std::size_t>(a)] < qbar[static_cast<std::size_t>(b)];
    });
    return Permutation::from_item_order(std::move(order));
}

/// Greedy descent of the search tree: at each level take the unused item
/// with the smallest remaining column sum, lowest index on ties. Expands
/// exactly n-1 levels; statistics (cost, node counts, Q reads) are filled
/// under the given mode.
inline SearchResult css_greedy_run(const QMatrix& Q, const SearchOptions& opt = {}) {
    const int n = Q.size();
    detail::SearchState st(Q, opt);
    double cost = 0.0;
    std::vector<double> cv = detail::root_child_v(Q, st.q_accesses);
    std::vector<int> order = greedy_complete(Q, st, {}, std::move(cv), cost, st.q_accesses);
    SearchResult res{Permutation::from_item_order(order), {}, cost, n - 1, 0, false, n - 1,
                     st.q_accesses, 0.0};
    for (int l = 0; l <= n - 2; ++l) res.nodes_created += n - l;
    const std::vector<double> vb = v_bar(Q, res.pi0);
    res.theta.resize(static_cast<std::size_t>(n - 1));
    for (int j = 0; j < n - 1; ++j)
        res.theta[static_cast<std::size_t>(j)] = st.stage_theta(j + 1, vb[static_cast<std::size_t>(j)]);
    return res;
}

inline Permutation css_greedy(const QMatrix& Q) { return css_greedy_run(Q).pi0; }

namespace detail {

inline void acn_recurse(const QMatrix& Q, std::vector<int>& items, std::size_t lo, std::size_t hi,
                        std::mt19937_64& rng) {
    if (hi - lo <= 1) return;
    const std::size_t pi = lo + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(hi - lo));
    const int pivot = items[std::min(pi, hi - 1)];
    std::vector<int> left, right;
    for (std::size_t i = lo; i < hi; ++i) {
        const int l = items[i];
        if (l == pivot) continue;
        // l goes before the pivot iff a strict majority ranks it earlier;
        // ties fall to the right.
        (Q(l, pivot) > 0.5 ? left : right).push_back(l);
    }
    std::size_t w = lo;
    for (int l : left) items[w++] = l;
    const std::size_t mid = w;
    items[w++] = pivot;
    for (int l : right) items[w++] = l;
    acn_recurse(Q, items, lo, mid, rng);
    acn_recurse(Q, items, mid + 1, hi, rng);
}

}  // namespace detail

/// Randomized pivot partition; deterministic for a given seed.
inline Permutation acn_pivot(const QMatrix& Q, std::uint64_t seed) {
    const int n = Q.size();
    std::vector<int> items(static_cast<std::size_t>(n));
    std::iota(items.begin(), items.end(), 0);
    std::mt19937_64 rng(seed);
    detail::acn_recurse(Q, items, 0, items.size(), rng);
    return Permutation::from_item_order(std::move(items));
}

}  // namespace mallows
