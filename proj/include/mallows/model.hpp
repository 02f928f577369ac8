#pragma once

// Generalized Mallows distribution: normalization, log-probability,
// per-stage marginals, the mean inversion count and its numerical
// inverse (theta estimation), and exact sampling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "mallows/permutation.hpp"

namespace mallows {

/// Dispersion values above this are treated as infinite concentration:
/// exp(-50) is far below double-precision relevance for any statistic here.
inline constexpr double kThetaCap = 50.0;

/// Stage normalizer (1 - e^{-m t}) / (1 - e^{-t}); the limit at t = 0 is m.
/// m is the number of admissible inversion counts at this stage (n - j + 1
/// for 1-based stage j).
inline double psi_j(double theta_j, int m) {
    if (m <= 0) throw std::invalid_argument("psi_j: m must be positive");
    if (theta_j == 0.0) return static_cast<double>(m);
    if (std::abs(theta_j) < 1e-6) {
        // Two-term series around 0; the naive ratio loses precision here.
        return m * (1.0 - 0.5 * (m - 1) * theta_j +
                    (m - 1) * (2 * m - 1) / 12.0 * theta_j * theta_j);
    }
    return std::expm1(-static_cast<double>(m) * theta_j) / std::expm1(-theta_j);
}

inline double log_psi_j(double theta_j, int m) { return std::log(psi_j(theta_j, m)); }

/// P[V_j = r] = e^{-theta r} / psi_j(theta), r in {0,...,m-1}.
inline double marginal_v_pmf(double theta_j, int m, int r) {
    if (r < 0 || r >= m) throw std::invalid_argument("marginal_v_pmf: r out of range");
    return std::exp(-theta_j * r - log_psi_j(theta_j, m));
}

/// E[V_j] = 1/(e^t - 1) - m/(e^{m t} - 1); the limit at t = 0 is (m-1)/2.
inline double mean_v(double theta_j, int m) {
    if (m <= 0) throw std::invalid_argument("mean_v: m must be positive");
    if (std::abs(theta_j) < 1e-6) {
        // 1/(e^x-1) = 1/x - 1/2 + x/12 - x^3/720 + ...
        const double t = theta_j;
        const double md = static_cast<double>(m);
        return (md - 1.0) / 2.0 - (md * md - 1.0) * t / 12.0 +
               (md * md * md * md - 1.0) * t * t * t / 720.0;
    }
    const double a = 1.0 / std::expm1(theta_j);
    const double mt = static_cast<double>(m) * theta_j;
    const double b = (mt > 700.0) ? 0.0 : static_cast<double>(m) / std::expm1(mt);
    return a - b;
}

/// Inverts mean_v on theta >= 0 by bisection. Values of v_bar at or above
/// the uniform mean (m-1)/2 clamp to 0; values below mean_v(cap) clamp to
/// the cap (the ML estimate diverges as v_bar -> 0).
inline double solve_theta(double v_bar, int m, double theta_cap = kThetaCap) {
    if (m <= 0) throw std::invalid_argument("solve_theta: m must be positive");
    if (v_bar < 0.0 || v_bar > static_cast<double>(m - 1))
        throw std::invalid_argument("solve_theta: v_bar out of [0, m-1]");
    if (v_bar >= (m - 1) / 2.0) return 0.0;
    if (v_bar <= mean_v(theta_cap, m)) return theta_cap;
    double lo = 0.0, hi = theta_cap;  // mean_v is strictly decreasing on [lo, hi]
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (mean_v(mid, m) > v_bar)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Tabulated inverse of mean_v, keyed by m (so one table serves any n with
/// n <= m_max + 1). Knots are uniform in theta, which keeps the
/// interpolation error small even near v_bar -> 0 where theta(v_bar) is
/// steep; see solve_theta for the exact map.
class ThetaTable {
public:
    ThetaTable() = default;

    /// resolution is the theta knot spacing.
    static ThetaTable build(int m_max, double resolution = 1e-2, double theta_cap = kThetaCap) {
        if (m_max < 2) throw std::invalid_argument("ThetaTable: m_max must be >= 2");
        if (resolution <= 0.0) throw std::invalid_argument("ThetaTable: resolution must be positive");
        ThetaTable t;
        t.m_max_ = m_max;
        t.step_ = resolution;
        t.cap_ = theta_cap;
        const int k = static_cast<int>(std::ceil(theta_cap / resolution)) + 1;
        t.vbar_.assign(static_cast<std::size_t>(m_max + 1), {});
        for (int m = 2; m <= m_max; ++m) {
            auto& col = t.vbar_[static_cast<std::size_t>(m)];
            col.resize(static_cast<std::size_t>(k));
            for (int i = 0; i < k; ++i)
                col[static_cast<std::size_t>(i)] = mean_v(std::min(i * resolution, theta_cap), m);
        }
        return t;
    }

    int m_max() const { return m_max_; }
    double resolution() const { return step_; }
    double theta_cap() const { return cap_; }

    /// theta with mean_v(theta, m) ~= v_bar, linear interpolation between knots.
    double lookup(double v_bar, int m) const {
        if (m < 2 || m > m_max_) throw std::invalid_argument("ThetaTable: m out of range");
        if (v_bar < 0.0 || v_bar > static_cast<double>(m - 1))
            throw std::invalid_argument("ThetaTable: v_bar out of [0, m-1]");
        const auto& col = vbar_[static_cast<std::size_t>(m)];
        if (v_bar >= col.front()) return 0.0;
        if (v_bar <= col.back()) return cap_;
        // col is strictly decreasing; find the bracketing knot pair.
        auto it = std::lower_bound(col.begin(), col.end(), v_bar, std::greater<double>());
        const std::size_t hi = static_cast<std::size_t>(it - col.begin());
        const std::size_t lo = hi - 1;
        const double frac = (col[lo] - v_bar) / (col[lo] - col[hi]);
        return std::min((static_cast<double>(lo) + frac) * step_, cap_);
    }

    // Serialization lives in io.hpp; these expose the raw layout for it.
    const std::vector<std::vector<double>>& columns() const { return vbar_; }
    static ThetaTable from_raw(int m_max, double step, double cap,
                               std::vector<std::vector<double>> cols) {
        ThetaTable t;
        t.m_max_ = m_max;
        t.step_ = step;
        t.cap_ = cap;
        t.vbar_ = std::move(cols);
        return t;
    }

private:
    int m_max_ = 0;
    double step_ = 0.0;
    double cap_ = kThetaCap;
    std::vector<std::vector<double>> vbar_;  // vbar_[m][i] = mean_v(i*step, m)
};

/// Model parameters: central permutation and the n-1 dispersion values.
struct GMModel {
    Permutation pi0;
    std::vector<double> theta;  // length n-1, all >= 0

    GMModel(Permutation center, std::vector<double> t) : pi0(std::move(center)), theta(std::move(t)) {
        if (static_cast<int>(theta.size()) != pi0.size() - 1)
            throw std::invalid_argument("GMModel: theta must have n-1 entries");
        for (double x : theta)
            if (x < 0.0) throw std::invalid_argument("GMModel: theta must be non-negative");
    }

    int size() const { return pi0.size(); }
};

inline double log_psi(std::span<const double> theta, int n) {
    double s = 0.0;
    for (int j = 0; j < n - 1; ++j) s += log_psi_j(theta[static_cast<std::size_t>(j)], n - j);
    return s;
}

/// log P(p) = -d_theta(p, pi0) - ln psi(theta).
inline double log_pmf(const GMModel& model, const Permutation& p) {
    if (p.size() != model.size()) throw std::invalid_argument("log_pmf: size mismatch");
    return -generalized_distance(p, model.pi0, model.theta) - log_psi(model.theta, model.size());
}

namespace detail {
/// Portable uniform double in [0,1) from a 64-bit engine draw.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}
}  // namespace detail

/// Exact sampler: draws each V_j independently from its truncated-geometric
/// marginal (inverse CDF), decodes the inversion vector, and recenters on
/// pi0. Deterministic for a given seed.
inline std::vector<Permutation> sample(const GMModel& model, int N, std::uint64_t seed) {
    if (N <= 0) throw std::invalid_argument("sample: N must be positive");
    const int n = model.size();
    // Per-stage CDF of V_j over {0,...,n-1-j}.
    std::vector<std::vector<double>> cdf(static_cast<std::size_t>(n - 1));
    for (int j = 0; j < n - 1; ++j) {
        const int m = n - j;
        auto& c = cdf[static_cast<std::size_t>(j)];
        c.resize(static_cast<std::size_t>(m));
        double acc = 0.0;
        for (int r = 0; r < m; ++r) {
            acc += marginal_v_pmf(model.theta[static_cast<std::size_t>(j)], m, r);
            c[static_cast<std::size_t>(r)] = acc;
        }
        c.back() = 1.0;
    }
    std::mt19937_64 rng(seed);
    std::vector<Permutation> out;
    out.reserve(static_cast<std::size_t>(N));
    VCode code;
    code.n = n;
    code.v.assign(static_cast<std::size_t>(n - 1), 0);
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < n - 1; ++j) {
            const auto& c = cdf[static_cast<std::size_t>(j)];
            const double u = detail::uniform01(rng);
            code.v[static_cast<std::size_t>(j)] =
                static_cast<int>(std::lower_bound(c.begin(), c.end(), u) - c.begin());
        }
        out.push_back(compose(decode_v(code), model.pi0));
    }
    return out;
}

}  // namespace mallows
