// Command-line front end: sampling, dispersion estimation, consensus
// search, baseline heuristics, posterior updates, and the experiment
// harness.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mallows/baselines.hpp"
#include "mallows/experiment.hpp"
#include "mallows/io.hpp"
#include "mallows/model.hpp"
#include "mallows/permutation.hpp"
#include "mallows/prior.hpp"
#include "mallows/search.hpp"
#include "mallows/suff_stats.hpp"

namespace {

using namespace mallows;

std::string perm_to_string(const Permutation& p) {
    std::ostringstream os;
    for (int j = 0; j < p.size(); ++j) os << (j ? " " : "") << p.item_at(j) + 1;
    return os.str();
}

Mode parse_mode(const std::string& s) {
    if (s == "known") return Mode::known_theta;
    if (s == "constant") return Mode::constant_theta;
    if (s == "joint") return Mode::joint;
    throw CLI::ValidationError("--mode", "expected known|constant|joint");
}

Heuristic parse_heuristic(const std::string& s) {
    if (s == "zero") return Heuristic::zero;
    if (s == "known") return Heuristic::known_theta_bound;
    if (s == "constant") return Heuristic::constant_theta_bound;
    throw CLI::ValidationError("--heuristic", "expected zero|known|constant");
}

Algorithm parse_algorithm(const std::string& s) {
    if (s == "bf") return Algorithm::bf;
    if (s == "bf_css") return Algorithm::bf_css;
    if (s == "css") return Algorithm::css;
    if (s == "fv") return Algorithm::fv;
    if (s == "acn") return Algorithm::acn;
    if (s == "brute") return Algorithm::brute;
    throw CLI::ValidationError("--algos", "unknown algorithm '" + s + "'");
}

/// Loads a Q matrix from either a rankings file or a Q CSV; exactly one
/// of the two paths must be set.
QMatrix load_q(const std::string& rankings_path, const std::string& q_path) {
    if (rankings_path.empty() == q_path.empty())
        throw CLI::ValidationError("input", "provide exactly one of --input / --q");
    if (!q_path.empty())
        return io::load_file(q_path, [](std::istream& in) { return io::read_q_csv(in); });
    const auto sample = io::load_file(
        rankings_path, [](std::istream& in) { return io::read_rankings(in); });
    return q_matrix(sample);
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw std::runtime_error("cannot open output " + path);
    return file;
}

void print_result(std::ostream& out, const std::string& algo, const SearchResult& r) {
    out << "algorithm: " << algo << '\n'
        << "pi0: " << perm_to_string(r.pi0) << '\n'
        << "cost: " << io::detail::fmt(r.cost) << '\n'
        << "theta:";
    for (double t : r.theta) out << ' ' << io::detail::fmt(t);
    out << '\n'
        << "nodes_expanded: " << r.nodes_expanded << '\n'
        << "nodes_created: " << r.nodes_created << '\n'
        << "optimal: " << (r.optimal ? 1 : 0) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Consensus ranking under the generalized Mallows model"};
    app.require_subcommand(1);

    // --- sample ---
    std::string sample_model, sample_out;
    int sample_n = 0;
    std::uint64_t seed = 0;
    auto* cmd_sample = app.add_subcommand("sample", "Draw rankings from a model file");
    cmd_sample->add_option("--model", sample_model, "model file")->required();
    cmd_sample->add_option("--N", sample_n, "number of rankings")->required();
    cmd_sample->add_option("--seed", seed, "RNG seed");
    cmd_sample->add_option("--out", sample_out, "output path (default stdout)");

    // --- estimate-theta ---
    std::string et_input, et_pi0;
    auto* cmd_et = app.add_subcommand("estimate-theta",
                                      "Per-stage ML dispersions for a fixed center");
    cmd_et->add_option("--input", et_input, "rankings file")->required();
    cmd_et->add_option("--pi0", et_pi0, "center as 1-based item order, e.g. '2 1 3'")->required();

    // --- search ---
    std::string s_input, s_q, s_mode = "constant", s_heur = "constant", s_out;
    std::string s_bound = "child", s_objective = "surrogate";
    std::vector<double> s_theta;
    long long s_budget = 0;
    bool s_audit = false;
    auto* cmd_search = app.add_subcommand("search", "Best-first consensus search");
    cmd_search->add_option("--input", s_input, "rankings file");
    cmd_search->add_option("--q", s_q, "Q matrix CSV");
    cmd_search->add_option("--mode", s_mode, "known|constant|joint");
    cmd_search->add_option("--heuristic", s_heur, "zero|known|constant");
    cmd_search->add_option("--theta", s_theta, "dispersions for known mode");
    cmd_search->add_option("--budget", s_budget, "node-expansion budget (0 = unlimited)");
    cmd_search->add_option("--bound", s_bound, "child|parent bound attachment");
    cmd_search->add_option("--objective", s_objective, "surrogate|full-nll (joint mode)");
    cmd_search->add_option("--seed", seed, "RNG seed (unused, accepted for uniformity)");
    cmd_search->add_flag("--audit", s_audit, "recompute the cost from pi0 and verify");
    cmd_search->add_option("--out", s_out, "output path (default stdout)");

    // --- baseline ---
    std::string b_input, b_q, b_algo = "fv", b_out;
    auto* cmd_base = app.add_subcommand("baseline", "FV / CSS / ACN heuristics");
    cmd_base->add_option("--input", b_input, "rankings file");
    cmd_base->add_option("--q", b_q, "Q matrix CSV");
    cmd_base->add_option("--algo", b_algo, "fv|css|acn")->required();
    cmd_base->add_option("--seed", seed, "RNG seed (acn)");
    cmd_base->add_option("--out", b_out, "output path (default stdout)");

    // --- posterior ---
    std::string p_prior, p_input, p_out;
    bool p_map = false;
    auto* cmd_post = app.add_subcommand("posterior", "Conjugate posterior update and MAP");
    cmd_post->add_option("--prior", p_prior, "prior file (nu then Gamma CSV)")->required();
    cmd_post->add_option("--input", p_input, "rankings file")->required();
    cmd_post->add_flag("--map", p_map, "also run the search on the blended matrix");
    cmd_post->add_option("--seed", seed, "RNG seed (unused, accepted for uniformity)");
    cmd_post->add_option("--out", p_out, "output path (default stdout)");

    // --- experiment ---
    ExperimentConfig cfg;
    std::string e_regime = "concentrated", e_mode = "constant", e_heur = "constant";
    std::string e_ref = "bf_css", e_out;
    std::vector<std::string> e_algos = {"bf_css", "css", "fv", "acn"};
    auto* cmd_exp = app.add_subcommand("experiment", "Replicated algorithm comparison, CSV out");
    cmd_exp->add_option("--n", cfg.n, "number of items");
    cmd_exp->add_option("--N", cfg.N, "sample size per replication");
    cmd_exp->add_option("--theta", cfg.theta, "dispersion (scalar or n-1 values)");
    cmd_exp->add_option("--regime", e_regime, "concentrated|near_uniform|random_q");
    cmd_exp->add_option("--iters", cfg.n_iter, "replications");
    cmd_exp->add_option("--seed", cfg.seed, "base seed");
    cmd_exp->add_option("--algos", e_algos, "subset of bf,bf_css,css,fv,acn,brute");
    cmd_exp->add_option("--budget", cfg.budget, "bf_css node budget");
    cmd_exp->add_option("--heuristic", e_heur, "zero|known|constant");
    cmd_exp->add_option("--mode", e_mode, "known|constant|joint");
    cmd_exp->add_option("--ref-algo", e_ref, "ratio reference algorithm");
    cmd_exp->add_flag("--timing", cfg.timing, "fill the wall_time column");
    cmd_exp->add_option("--out", e_out, "output CSV (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_sample) {
            const GMModel model =
                io::load_file(sample_model, [](std::istream& in) { return io::read_model(in); });
            const auto draws = sample(model, sample_n, seed);
            std::ofstream file;
            io::write_rankings(open_out(file, sample_out), draws);
        } else if (*cmd_et) {
            const auto rankings = io::load_file(
                et_input, [](std::istream& in) { return io::read_rankings(in); });
            std::istringstream ps(et_pi0);
            std::vector<int> items;
            int x;
            while (ps >> x) items.push_back(x - 1);
            const Permutation pi0 = Permutation::from_item_order(std::move(items));
            const QMatrix Q = q_matrix(rankings);
            const auto vb = v_bar(Q, pi0);
            const int n = Q.size();
            std::cout << "theta:";
            for (int j = 0; j < n - 1; ++j)
                std::cout << ' ' << io::detail::fmt(solve_theta(vb[static_cast<std::size_t>(j)], n - j));
            std::cout << '\n';
        } else if (*cmd_search) {
            const QMatrix Q = load_q(s_input, s_q);
            SearchOptions opt;
            opt.mode = parse_mode(s_mode);
            opt.heuristic = parse_heuristic(s_heur);
            opt.theta = s_theta;
            if (opt.mode != Mode::known_theta && !s_theta.empty())
                throw CLI::ValidationError("--theta", "only valid with --mode known");
            if (s_budget > 0) opt.budget = s_budget;
            if (s_bound == "parent")
                opt.bound = BoundApplication::parent_level;
            else if (s_bound != "child")
                throw CLI::ValidationError("--bound", "expected child|parent");
            if (s_objective == "full-nll")
                opt.objective = JointObjective::full_nll;
            else if (s_objective != "surrogate")
                throw CLI::ValidationError("--objective", "expected surrogate|full-nll");
            const SearchResult res = searchpi(Q, opt);
            if (s_audit) {
                const double recomputed = objective_value(Q, res.pi0, opt);
                if (std::abs(recomputed - res.cost) > 1e-9)
                    throw std::runtime_error("audit failed: cost does not match pi0");
            }
            std::ofstream file;
            print_result(open_out(file, s_out), s_budget > 0 ? "bf_css" : "bf", res);
        } else if (*cmd_base) {
            const QMatrix Q = load_q(b_input, b_q);
            SearchOptions opt;  // costs reported under the consensus objective
            if (b_algo == "css") {
                std::ofstream file;
                print_result(open_out(file, b_out), "css", css_greedy_run(Q, opt));
            } else if (b_algo == "fv" || b_algo == "acn") {
                const Permutation p = (b_algo == "fv") ? fv(Q) : acn_pivot(Q, seed);
                SearchResult res{p, {}, objective_value(Q, p, opt), 0, 0, false, 0, 0, 0.0};
                std::ofstream file;
                print_result(open_out(file, b_out), b_algo, res);
            } else {
                throw CLI::ValidationError("--algo", "expected fv|css|acn");
            }
        } else if (*cmd_post) {
            const PriorParams prior =
                io::load_file(p_prior, [](std::istream& in) { return io::read_prior(in); });
            const auto rankings = io::load_file(
                p_input, [](std::istream& in) { return io::read_rankings(in); });
            const PriorParams post = posterior_update(prior, rankings);
            std::ofstream file;
            std::ostream& out = open_out(file, p_out);
            io::write_prior(out, post);
            if (p_map) print_result(out, "map", searchpi(post.gamma, {}));
        } else if (*cmd_exp) {
            cfg.regime = [&] {
                if (e_regime == "concentrated") return Regime::concentrated;
                if (e_regime == "near_uniform") return Regime::near_uniform;
                if (e_regime == "random_q") return Regime::random_q;
                throw CLI::ValidationError("--regime",
                                           "expected concentrated|near_uniform|random_q");
            }();
            if (cfg.regime == Regime::near_uniform) {
                // Near-uniform defaults differ from the concentrated regime.
                if (!cmd_exp->count("--theta")) cfg.theta = {0.003};
                if (!cmd_exp->count("--N")) cfg.N = 100;
                std::cerr << "near_uniform: theta = " << cfg.theta.front() << ", N = " << cfg.N
                          << '\n';
            }
            cfg.mode = parse_mode(e_mode);
            cfg.heuristic = parse_heuristic(e_heur);
            cfg.ref_algorithm = parse_algorithm(e_ref);
            cfg.algorithms.clear();
            for (const auto& a : e_algos) cfg.algorithms.push_back(parse_algorithm(a));
            const auto records = run_experiment(cfg);
            std::ofstream file;
            write_records_csv(open_out(file, e_out), records);
        }
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
