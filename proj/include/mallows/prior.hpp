#pragma once

// Conjugate prior over (pi0, theta): an equivalent sample size nu and a
// precedence matrix Gamma. The posterior blends Gamma with the data's Q,
// so MAP estimation is just the search run on the blended matrix.

#include <span>
#include <stdexcept>
#include <vector>

#include "mallows/model.hpp"
#include "mallows/permutation.hpp"
#include "mallows/search.hpp"
#include "mallows/suff_stats.hpp"

namespace mallows {

struct PriorParams {
    double nu;      // equivalent sample size, > 0
    QMatrix gamma;  // prior precedence matrix

    PriorParams(double nu_, QMatrix gamma_) : nu(nu_), gamma(std::move(gamma_)) {
        if (nu <= 0.0) throw std::invalid_argument("PriorParams: nu must be positive");
        gamma.validate();
    }
};

/// The all-1/2 precedence matrix: non-informative in the center,
/// smoothing in the dispersions.
inline QMatrix gamma_uniform(int n) {
    QMatrix g(n, 0);
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
            if (j != l) g.at(j, l) = 0.5;
    return g;
}

/// Expected precedence matrix E[Q] under a model, by exhaustive
/// enumeration. Guarded to n <= 8.
inline QMatrix expected_q(const GMModel& model) {
    const int n = model.size();
    if (n > 8) throw std::invalid_argument("expected_q: n too large for enumeration");
    QMatrix g(n, 0);
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    do {
        const Permutation p = Permutation::from_item_order(order);
        const double w = std::exp(log_pmf(model, p));
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l)
                if (j != l && p.rank_of(j) < p.rank_of(l)) g.at(j, l) += w;
    } while (std::next_permutation(order.begin(), order.end()));
    return g;
}

/// Unnormalized log prior density: -nu * [sum_j theta_j * v_bar(Gamma,
/// pi0)_j + ln psi(theta)].
inline double log_prior(const PriorParams& params, const Permutation& pi0,
                        std::span<const double> theta) {
    const int n = params.gamma.size();
    if (pi0.size() != n || static_cast<int>(theta.size()) != n - 1)
        throw std::invalid_argument("log_prior: size mismatch");
    for (double t : theta)
        if (t < 0.0) throw std::invalid_argument("log_prior: negative theta");
    const std::vector<double> vb = v_bar(params.gamma, pi0);
    double s = 0.0;
    for (int j = 0; j < n - 1; ++j)
        s += theta[static_cast<std::size_t>(j)] * vb[static_cast<std::size_t>(j)] +
             log_psi_j(theta[static_cast<std::size_t>(j)], n - j);
    return -params.nu * s;
}

/// Closed-form posterior: (nu + N, (N Q + nu Gamma) / (N + nu)).
inline PriorParams posterior_update(const PriorParams& params, std::span<const Permutation> sample) {
    if (sample.empty()) return params;
    const QMatrix Q = q_matrix(sample);
    const int n = params.gamma.size();
    if (Q.size() != n) throw std::invalid_argument("posterior_update: size mismatch");
    const double N = static_cast<double>(sample.size());
    const double total = N + params.nu;
    QMatrix blended(n, 0);
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
            if (j != l) blended.at(j, l) = (N * Q(j, l) + params.nu * params.gamma(j, l)) / total;
    return PriorParams(total, std::move(blended));
}

/// MAP center (and dispersions): the search on the blended matrix.
inline SearchResult map_estimate(const PriorParams& params, std::span<const Permutation> sample,
                                 const SearchOptions& opt = {}) {
    const PriorParams post = posterior_update(params, sample);
    return searchpi(post.gamma, opt);
}

}  // namespace mallows
