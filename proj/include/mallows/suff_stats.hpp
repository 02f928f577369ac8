#pragma once

// Sufficient statistics: pairwise-precedence matrix Q, expected inversion
// counts for a candidate center, log-likelihood, and the constructive
// proof that some center admits a non-negative dispersion estimate.

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "mallows/model.hpp"
#include "mallows/permutation.hpp"

namespace mallows {

/// q(j,l) = fraction of the sample ranking j before l. Off-diagonal pairs
/// sum to 1 and the diagonal is 0. N = 0 marks a synthetic matrix with no
/// underlying sample.
class QMatrix {
public:
    QMatrix(int n, long long N) : n_(n), N_(N), q_(static_cast<std::size_t>(n) * n, 0.0) {
        if (n < 2) throw std::invalid_argument("QMatrix: n must be >= 2");
        if (N < 0) throw std::invalid_argument("QMatrix: N must be non-negative");
    }

    int size() const { return n_; }
    long long sample_size() const { return N_; }

    double operator()(int j, int l) const { return q_[idx(j, l)]; }
    double& at(int j, int l) { return q_[idx(j, l)]; }

    /// Verifies q(j,l) + q(l,j) = 1 off-diagonal and a zero diagonal.
    void validate(double tol = 1e-9) const {
        for (int j = 0; j < n_; ++j) {
            if (std::abs((*this)(j, j)) > tol)
                throw std::invalid_argument("QMatrix: nonzero diagonal");
            for (int l = j + 1; l < n_; ++l)
                if (std::abs((*this)(j, l) + (*this)(l, j) - 1.0) > tol)
                    throw std::invalid_argument("QMatrix: pair sums must equal 1");
        }
    }

private:
    std::size_t idx(int j, int l) const { return static_cast<std::size_t>(j) * n_ + l; }

    int n_;
    long long N_;
    std::vector<double> q_;
};

/// 0/1 precedence matrix of a single permutation.
inline QMatrix q_of_perm(const Permutation& p) {
    const int n = p.size();
    QMatrix q(n, 1);
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
            if (j != l && p.rank_of(j) < p.rank_of(l)) q.at(j, l) = 1.0;
    return q;
}

/// Empirical precedence frequencies of a sample.
inline QMatrix q_matrix(std::span<const Permutation> sample) {
    if (sample.empty()) throw std::invalid_argument("q_matrix: empty sample");
    const int n = sample.front().size();
    for (const auto& p : sample)
        if (p.size() != n) throw std::invalid_argument("q_matrix: mixed sizes");
    QMatrix q(n, static_cast<long long>(sample.size()));
    for (const auto& p : sample)
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l)
                if (j != l && p.rank_of(j) < p.rank_of(l)) q.at(j, l) += 1.0;
    const double inv = 1.0 / static_cast<double>(sample.size());
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
            if (j != l) q.at(j, l) *= inv;
    return q;
}

/// Expected inversion counts given center pi0:
/// v_bar[j] = sum over items l outside the first j+1 ranks of Q(l, r_j),
/// where r_j is the item pi0 places at rank j.
inline std::vector<double> v_bar(const QMatrix& Q, const Permutation& pi0) {
    const int n = Q.size();
    if (pi0.size() != n) throw std::invalid_argument("v_bar: size mismatch");
    std::vector<double> out(static_cast<std::size_t>(n - 1), 0.0);
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    for (int j = 0; j < n - 1; ++j) {
        const int rj = pi0.item_at(j);
        used[static_cast<std::size_t>(rj)] = 1;
        double s = 0.0;
        for (int l = 0; l < n; ++l)
            if (!used[static_cast<std::size_t>(l)]) s += Q(l, rj);
        out[static_cast<std::size_t>(j)] = s;
    }
    return out;
}

/// Sample log-likelihood from the sufficient statistics:
/// -N * sum_j [theta_j * v_bar_j + ln psi_j(theta_j)].
inline double log_likelihood(const QMatrix& Q, long long N, std::span<const double> theta,
                             const Permutation& pi0) {
    const int n = Q.size();
    if (static_cast<int>(theta.size()) != n - 1)
        throw std::invalid_argument("log_likelihood: theta must have n-1 entries");
    for (double t : theta)
        if (t < 0.0) throw std::invalid_argument("log_likelihood: negative theta");
    const std::vector<double> vb = v_bar(Q, pi0);
    double s = 0.0;
    for (int j = 0; j < n - 1; ++j)
        s += theta[static_cast<std::size_t>(j)] * vb[static_cast<std::size_t>(j)] +
             log_psi_j(theta[static_cast<std::size_t>(j)], n - j);
    return -static_cast<double>(N) * s;
}

/// Constructive center with all ML dispersions non-negative: repeatedly
/// take the remaining item whose remaining column sum is smallest (<=
/// (remaining-1)/2 always exists since the off-diagonal entries of any
/// valid Q total n(n-1)/2), ties to the lowest index.
inline Permutation nonneg_theta_center(const QMatrix& Q) {
    const int n = Q.size();
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(n));
    for (int step = 0; step < n; ++step) {
        int best = -1;
        double best_sum = 0.0;
        for (int r = 0; r < n; ++r) {
            if (used[static_cast<std::size_t>(r)]) continue;
            double s = 0.0;
            for (int l = 0; l < n; ++l)
                if (!used[static_cast<std::size_t>(l)]) s += Q(l, r);
            if (best < 0 || s < best_sum - 1e-15) {
                best = r;
                best_sum = s;
            }
        }
        used[static_cast<std::size_t>(best)] = 1;
        order.push_back(best);
    }
    return Permutation::from_item_order(std::move(order));
}

}  // namespace mallows
