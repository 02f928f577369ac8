#pragma once

// Permutation algebra: rank/item views, composition, Kendall and
// generalized distances, inversion-vector (V-code) encoding.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mallows {

/// A bijection on {0,...,n-1}. Items are 0-based internally; all file I/O
/// converts to 1-based at the boundary. The canonical view is the item
/// order (most-preferred first); ranks are derived on construction.
class Permutation {
public:
    /// Builds from the item-at-rank view: items[j] is the item at rank j.
    static Permutation from_item_order(std::vector<int> items) {
        validate(items);
        return Permutation(std::move(items));
    }

    /// Builds from the rank-of-item view: ranks[l] is the rank of item l.
    static Permutation from_ranks(const std::vector<int>& ranks) {
        validate(ranks);
        std::vector<int> items(ranks.size());
        for (std::size_t l = 0; l < ranks.size(); ++l) items[ranks[l]] = static_cast<int>(l);
        return Permutation(std::move(items));
    }

    static Permutation identity(int n) {
        if (n <= 0) throw std::invalid_argument("Permutation: n must be positive");
        std::vector<int> items(static_cast<std::size_t>(n));
        std::iota(items.begin(), items.end(), 0);
        return Permutation(std::move(items));
    }

    static Permutation reversal(int n) {
        Permutation p = identity(n);
        std::reverse(p.item_at_.begin(), p.item_at_.end());
        std::reverse(p.rank_of_.begin(), p.rank_of_.end());
        return p;
    }

    int size() const { return static_cast<int>(item_at_.size()); }

    /// rank_of(l): the rank of item l.
    int rank_of(int l) const { return rank_of_[static_cast<std::size_t>(l)]; }
    /// item_at(j): the item at rank j.
    int item_at(int j) const { return item_at_[static_cast<std::size_t>(j)]; }

    const std::vector<int>& item_order() const { return item_at_; }
    const std::vector<int>& ranks() const { return rank_of_; }

    Permutation inverse() const {
        // Swapping the two views inverts the bijection.
        Permutation q(*this);
        std::swap(q.item_at_, q.rank_of_);
        return q;
    }

    bool operator==(const Permutation& o) const { return item_at_ == o.item_at_; }
    bool operator!=(const Permutation& o) const { return !(*this == o); }

private:
    explicit Permutation(std::vector<int> items) : item_at_(std::move(items)) {
        rank_of_.resize(item_at_.size());
        for (std::size_t j = 0; j < item_at_.size(); ++j)
            rank_of_[static_cast<std::size_t>(item_at_[j])] = static_cast<int>(j);
    }

    static void validate(const std::vector<int>& v) {
        if (v.empty()) throw std::invalid_argument("Permutation: empty");
        std::vector<char> seen(v.size(), 0);
        for (int x : v) {
            if (x < 0 || x >= static_cast<int>(v.size()) || seen[static_cast<std::size_t>(x)])
                throw std::invalid_argument("Permutation: not a bijection on [n]");
            seen[static_cast<std::size_t>(x)] = 1;
        }
    }

    std::vector<int> item_at_;  // item_at_[j] = item at rank j
    std::vector<int> rank_of_;  // rank_of_[l] = rank of item l
};

/// Function composition (p*q)(l) = p(q(l)), acting on ranks.
inline Permutation compose(const Permutation& p, const Permutation& q) {
    if (p.size() != q.size()) throw std::invalid_argument("compose: size mismatch");
    const int n = p.size();
    std::vector<int> ranks(static_cast<std::size_t>(n));
    for (int l = 0; l < n; ++l) ranks[static_cast<std::size_t>(l)] = p.rank_of(q.rank_of(l));
    return Permutation::from_ranks(ranks);
}

inline Permutation inverse(const Permutation& p) { return p.inverse(); }

/// Number of item pairs ordered oppositely by p and q.
inline long long kendall_distance(const Permutation& p, const Permutation& q) {
    if (p.size() != q.size()) throw std::invalid_argument("kendall_distance: size mismatch");
    const int n = p.size();
    long long d = 0;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            const bool pa = p.rank_of(a) < p.rank_of(b);
            const bool qa = q.rank_of(a) < q.rank_of(b);
            if (pa != qa) ++d;
        }
    return d;
}

/// Inversion vector: v[j] counts items l > j ranked before j (0-based j,
/// length n-1, entry j in {0,...,n-1-j}). Uniquely encodes the permutation.
struct VCode {
    int n = 0;
    std::vector<int> v;  // length n-1
};

inline VCode v_code(const Permutation& p) {
    const int n = p.size();
    VCode c;
    c.n = n;
    c.v.assign(static_cast<std::size_t>(n - 1), 0);
    for (int j = 0; j < n - 1; ++j) {
        int cnt = 0;
        for (int l = j + 1; l < n; ++l)
            if (p.rank_of(l) < p.rank_of(j)) ++cnt;
        c.v[static_cast<std::size_t>(j)] = cnt;
    }
    return c;
}

/// Inverse of v_code. Builds the item order by inserting items from
/// largest to smallest; item j goes at position v[j] in the current list,
/// which is valid because every item already placed exceeds j.
inline Permutation decode_v(const VCode& c) {
    if (c.n <= 0 || static_cast<int>(c.v.size()) != c.n - 1)
        throw std::invalid_argument("decode_v: malformed VCode");
    for (int j = 0; j < c.n - 1; ++j) {
        const int vj = c.v[static_cast<std::size_t>(j)];
        if (vj < 0 || vj > c.n - 1 - j)
            throw std::invalid_argument("decode_v: entry out of range at j=" + std::to_string(j));
    }
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(c.n));
    order.push_back(c.n - 1);
    for (int j = c.n - 2; j >= 0; --j)
        order.insert(order.begin() + c.v[static_cast<std::size_t>(j)], j);
    return Permutation::from_item_order(std::move(order));
}

/// Weighted inversion distance sum_j theta[j] * V_j(p * p0^-1).
inline double generalized_distance(const Permutation& p, const Permutation& p0,
                                   std::span<const double> theta) {
    if (p.size() != p0.size()) throw std::invalid_argument("generalized_distance: size mismatch");
    const int n = p.size();
    if (static_cast<int>(theta.size()) != n - 1)
        throw std::invalid_argument("generalized_distance: theta must have n-1 entries");
    for (double t : theta)
        if (t < 0.0) throw std::invalid_argument("generalized_distance: negative theta");
    const VCode c = v_code(compose(p, p0.inverse()));
    double d = 0.0;
    for (int j = 0; j < n - 1; ++j)
        d += theta[static_cast<std::size_t>(j)] * c.v[static_cast<std::size_t>(j)];
    return d;
}

}  // namespace mallows
