#pragma once

// Experiment harness: synthetic data generation in three regimes,
// algorithm shoot-outs, and plot-ready CSV records.

#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mallows/baselines.hpp"
#include "mallows/io.hpp"
#include "mallows/model.hpp"
#include "mallows/permutation.hpp"
#include "mallows/search.hpp"
#include "mallows/suff_stats.hpp"

namespace mallows {

enum class Regime { concentrated, near_uniform, random_q };
enum class Algorithm { bf, bf_css, css, fv, acn, brute };

inline std::string to_string(Regime r) {
    switch (r) {
        case Regime::concentrated: return "concentrated";
        case Regime::near_uniform: return "near_uniform";
        case Regime::random_q: return "random_q";
    }
    return "?";
}

inline std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::bf: return "bf";
        case Algorithm::bf_css: return "bf_css";
        case Algorithm::css: return "css";
        case Algorithm::fv: return "fv";
        case Algorithm::acn: return "acn";
        case Algorithm::brute: return "brute";
    }
    return "?";
}

inline std::string to_string(Mode m) {
    switch (m) {
        case Mode::known_theta: return "known_theta";
        case Mode::constant_theta: return "constant_theta";
        case Mode::joint: return "joint";
    }
    return "?";
}

inline std::string to_string(Heuristic h) {
    switch (h) {
        case Heuristic::zero: return "zero";
        case Heuristic::known_theta_bound: return "known_theta_bound";
        case Heuristic::constant_theta_bound: return "constant_theta_bound";
    }
    return "?";
}

struct ExperimentConfig {
    Regime regime = Regime::concentrated;
    int n = 8;
    int N = 1000;                       // sample size (ignored for random_q)
    std::vector<double> theta = {1.0};  // scalar broadcast or n-1 values
    int n_iter = 10;
    std::uint64_t seed = 0;
    std::vector<Algorithm> algorithms = {Algorithm::bf_css, Algorithm::css, Algorithm::fv,
                                         Algorithm::acn};
    Algorithm ref_algorithm = Algorithm::bf_css;
    long long budget = 1'000'000;  // bf_css truncation
    Mode mode = Mode::constant_theta;
    Heuristic heuristic = Heuristic::constant_theta_bound;
    bool timing = false;  // fill the wall_time column (breaks byte-identical output)

    void validate() const {
        if (n < 2) throw std::invalid_argument("experiment: n must be >= 2");
        if (n_iter < 1) throw std::invalid_argument("experiment: n_iter must be >= 1");
        if (regime != Regime::random_q && N < 1)
            throw std::invalid_argument("experiment: N must be >= 1");
        if (budget <= 0) throw std::invalid_argument("experiment: budget must be positive");
        for (Algorithm a : algorithms)
            if (a == Algorithm::brute && n > 10)
                throw std::invalid_argument("experiment: brute requires n <= 10");
        if (theta.size() != 1 && static_cast<int>(theta.size()) != n - 1)
            throw std::invalid_argument("experiment: theta must be scalar or n-1 values");
    }

    std::vector<double> theta_vector() const {
        if (static_cast<int>(theta.size()) == n - 1) return theta;
        return std::vector<double>(static_cast<std::size_t>(n - 1), theta.front());
    }
};

struct RunRecord {
    int replication;
    Algorithm algorithm;
    Mode mode;
    Heuristic heuristic;
    int n;
    int N;
    std::uint64_t seed;
    double cost;
    double cost_ratio;  // vs the reference algorithm in the same replication
    long long nodes_expanded;
    long long nodes_created;
    std::optional<double> wall_time;
    bool optimal;
    Permutation pi0;
    Permutation true_pi0;  // generating center; identity for random_q
};

inline void write_records_csv(std::ostream& out, std::span<const RunRecord> records) {
    out << "replication,algorithm,mode,heuristic,n,N,seed,cost,cost_ratio,nodes_expanded,"
           "nodes_created,wall_time,optimal,pi0\n";
    for (const auto& r : records) {
        out << r.replication << ',' << to_string(r.algorithm) << ',' << to_string(r.mode) << ','
            << to_string(r.heuristic) << ',' << r.n << ',' << r.N << ',' << r.seed << ','
            << io::detail::fmt(r.cost) << ',' << io::detail::fmt(r.cost_ratio) << ','
            << r.nodes_expanded << ',' << r.nodes_created << ',';
        if (r.wall_time) out << io::detail::fmt(*r.wall_time);
        out << ',' << (r.optimal ? 1 : 0) << ',';
        for (int j = 0; j < r.pi0.size(); ++j) out << (j ? " " : "") << r.pi0.item_at(j) + 1;
        out << '\n';
    }
}

namespace detail {

inline Permutation random_permutation(int n, std::mt19937_64& rng) {
    std::vector<int> items(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) items[static_cast<std::size_t>(i)] = i;
    for (int i = n - 1; i > 0; --i) {
        const int k = static_cast<int>(uniform01(rng) * (i + 1));
        std::swap(items[static_cast<std::size_t>(i)], items[static_cast<std::size_t>(std::min(k, i))]);
    }
    return Permutation::from_item_order(std::move(items));
}

inline QMatrix random_q_matrix(int n, std::mt19937_64& rng) {
    QMatrix q(n, 0);
    for (int j = 0; j < n; ++j)
        for (int l = j + 1; l < n; ++l) {
            const double u = uniform01(rng);
            q.at(j, l) = u;
            q.at(l, j) = 1.0 - u;
        }
    return q;
}

}  // namespace detail

/// One replication worth of inputs.
struct ReplicationData {
    QMatrix Q;
    Permutation true_pi0;
    std::uint64_t acn_seed;
    int N;
};

inline ReplicationData generate_replication(const ExperimentConfig& cfg, int replication) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(replication);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    if (cfg.regime == Regime::random_q) {
        QMatrix q = detail::random_q_matrix(cfg.n, rng);
        return {std::move(q), Permutation::identity(cfg.n), rng(), 0};
    }
    const Permutation pi0 = detail::random_permutation(cfg.n, rng);
    const GMModel model(pi0, cfg.theta_vector());
    const auto data = sample(model, cfg.N, rng());
    return {q_matrix(data), pi0, rng(), cfg.N};
}

inline SearchResult run_algorithm(Algorithm algo, const QMatrix& Q, const ExperimentConfig& cfg,
                                  const ReplicationData& rep) {
    SearchOptions opt;
    opt.mode = cfg.mode;
    opt.heuristic = cfg.heuristic;
    if (cfg.mode == Mode::known_theta) opt.theta = cfg.theta_vector();
    switch (algo) {
        case Algorithm::bf: return searchpi(Q, opt);
        case Algorithm::bf_css: return bf_css(Q, opt, cfg.budget);
        case Algorithm::css: return css_greedy_run(Q, opt);
        case Algorithm::brute: return brute_force(Q, opt);
        case Algorithm::fv:
        case Algorithm::acn: {
            const Permutation p =
                (algo == Algorithm::fv) ? fv(Q) : acn_pivot(Q, rep.acn_seed);
            SearchResult res{p, {}, objective_value(Q, p, opt), 0, 0, false, 0, 0, 0.0};
            return res;
        }
    }
    throw std::logic_error("run_algorithm: unknown algorithm");
}

/// Runs every configured algorithm on n_iter independently generated
/// replications. Costs are recomputed from the returned center under the
/// configured mode, so they are comparable across algorithms; ratios are
/// relative to the reference algorithm within the replication.
inline std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<RunRecord> records;
    SearchOptions eval_opt;
    eval_opt.mode = cfg.mode;
    if (cfg.mode == Mode::known_theta) eval_opt.theta = cfg.theta_vector();
    for (int rep = 0; rep < cfg.n_iter; ++rep) {
        const ReplicationData data = generate_replication(cfg, rep);
        std::vector<SearchResult> results;
        results.reserve(cfg.algorithms.size());
        double ref_cost = 0.0;
        bool have_ref = false;
        for (Algorithm a : cfg.algorithms) {
            const auto t0 = std::chrono::steady_clock::now();
            results.push_back(run_algorithm(a, data.Q, cfg, data));
            results.back().wall_time =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            const double c = objective_value(data.Q, results.back().pi0, eval_opt);
            results.back().cost = c;
            if (a == cfg.ref_algorithm) {
                ref_cost = c;
                have_ref = true;
            }
        }
        for (std::size_t i = 0; i < cfg.algorithms.size(); ++i) {
            const SearchResult& r = results[i];
            double ratio = 1.0;
            if (have_ref)
                ratio = (ref_cost != 0.0)
                            ? r.cost / ref_cost
                            : (r.cost == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
            records.push_back({rep, cfg.algorithms[i], cfg.mode, cfg.heuristic, cfg.n, data.N,
                               cfg.seed + static_cast<std::uint64_t>(rep), r.cost, ratio,
                               r.nodes_expanded, r.nodes_created,
                               cfg.timing ? std::optional<double>(r.wall_time) : std::nullopt,
                               r.optimal, r.pi0, data.true_pi0});
        }
    }
    return records;
}

}  // namespace mallows
