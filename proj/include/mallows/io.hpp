#pragma once

// File formats: rankings text, Q matrix CSV, model and prior files, and
// the persisted theta lookup table. Item IDs are 1-based in every file.

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mallows/model.hpp"
#include "mallows/permutation.hpp"
#include "mallows/prior.hpp"
#include "mallows/suff_stats.hpp"

namespace mallows::io {

namespace detail {
inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

[[noreturn]] inline void fail(const std::string& what, int line) {
    throw std::runtime_error(what + " (line " + std::to_string(line) + ")");
}
}  // namespace detail

/// Rankings text: one ranking per line, n whitespace-separated 1-based
/// item IDs in preference order; '#' lines are comments.
inline std::vector<Permutation> read_rankings(std::istream& in) {
    std::vector<Permutation> out;
    std::string line;
    int lineno = 0;
    int n = -1;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        std::vector<int> items;
        int x;
        while (ls >> x) items.push_back(x - 1);
        if (!ls.eof()) detail::fail("rankings: non-numeric token", lineno);
        if (n < 0) n = static_cast<int>(items.size());
        if (static_cast<int>(items.size()) != n)
            detail::fail("rankings: expected " + std::to_string(n) + " items", lineno);
        try {
            out.push_back(Permutation::from_item_order(std::move(items)));
        } catch (const std::invalid_argument&) {
            detail::fail("rankings: line is not a permutation of 1.." + std::to_string(n), lineno);
        }
    }
    if (out.empty()) throw std::runtime_error("rankings: no rankings found");
    return out;
}

inline void write_rankings(std::ostream& out, std::span<const Permutation> rankings) {
    for (const auto& p : rankings) {
        for (int j = 0; j < p.size(); ++j) out << (j ? " " : "") << p.item_at(j) + 1;
        out << '\n';
    }
}

/// Q matrix CSV: n rows of n comma-separated decimals, zero diagonal.
inline QMatrix read_q_csv(std::istream& in, double tol = 1e-9) {
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                detail::fail("q csv: bad number '" + cell + "'", lineno);
            }
        }
        rows.push_back(std::move(row));
    }
    const int n = static_cast<int>(rows.size());
    if (n < 2) throw std::runtime_error("q csv: need at least 2 rows");
    QMatrix q(n, 0);
    for (int j = 0; j < n; ++j) {
        if (static_cast<int>(rows[static_cast<std::size_t>(j)].size()) != n)
            detail::fail("q csv: expected " + std::to_string(n) + " columns", j + 1);
        for (int l = 0; l < n; ++l) q.at(j, l) = rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)];
    }
    q.validate(tol);
    return q;
}

inline void write_q_csv(std::ostream& out, const QMatrix& q) {
    for (int j = 0; j < q.size(); ++j) {
        for (int l = 0; l < q.size(); ++l) out << (l ? "," : "") << detail::fmt(q(j, l));
        out << '\n';
    }
}

/// Model file: line 1 n, line 2 the center as a 1-based item order,
/// line 3 the n-1 theta values.
inline GMModel read_model(std::istream& in) {
    int n;
    if (!(in >> n) || n < 2) throw std::runtime_error("model: bad n (line 1)");
    std::vector<int> items(static_cast<std::size_t>(n));
    for (auto& x : items) {
        if (!(in >> x)) throw std::runtime_error("model: bad center (line 2)");
        --x;
    }
    std::vector<double> theta(static_cast<std::size_t>(n - 1));
    for (auto& t : theta)
        if (!(in >> t)) throw std::runtime_error("model: bad theta (line 3)");
    return GMModel(Permutation::from_item_order(std::move(items)), std::move(theta));
}

inline void write_model(std::ostream& out, const GMModel& model) {
    out << model.size() << '\n';
    for (int j = 0; j < model.size(); ++j) out << (j ? " " : "") << model.pi0.item_at(j) + 1;
    out << '\n';
    for (std::size_t j = 0; j < model.theta.size(); ++j)
        out << (j ? " " : "") << detail::fmt(model.theta[j]);
    out << '\n';
}

/// Prior file: nu on line 1, then the Gamma CSV.
inline PriorParams read_prior(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("prior: missing nu (line 1)");
    double nu;
    try {
        nu = std::stod(line);
    } catch (const std::exception&) {
        throw std::runtime_error("prior: bad nu (line 1)");
    }
    return PriorParams(nu, read_q_csv(in));
}

inline void write_prior(std::ostream& out, const PriorParams& p) {
    out << detail::fmt(p.nu) << '\n';
    write_q_csv(out, p.gamma);
}

inline constexpr const char* kThetaTableMagic = "mallows-theta-table 1";

/// Theta table, text layout: a version header, the key line
/// "m_max step cap", then one line of mean-V knots per m.
inline void write_theta_table(std::ostream& out, const ThetaTable& t) {
    out << kThetaTableMagic << '\n';
    out << t.m_max() << ' ' << detail::fmt(t.resolution()) << ' ' << detail::fmt(t.theta_cap())
        << '\n';
    char buf[40];
    for (int m = 2; m <= t.m_max(); ++m) {
        const auto& col = t.columns()[static_cast<std::size_t>(m)];
        for (std::size_t i = 0; i < col.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", col[i]);
            out << (i ? " " : "") << buf;
        }
        out << '\n';
    }
}

inline ThetaTable read_theta_table(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kThetaTableMagic)
        throw std::runtime_error("theta table: bad or missing header");
    int m_max;
    double step, cap;
    if (!(in >> m_max >> step >> cap) || m_max < 2 || step <= 0.0)
        throw std::runtime_error("theta table: bad key line");
    std::getline(in, line);
    std::vector<std::vector<double>> cols(static_cast<std::size_t>(m_max + 1));
    for (int m = 2; m <= m_max; ++m) {
        if (!std::getline(in, line)) throw std::runtime_error("theta table: truncated");
        std::istringstream ls(line);
        double x;
        while (ls >> x) cols[static_cast<std::size_t>(m)].push_back(x);
        if (cols[static_cast<std::size_t>(m)].empty())
            throw std::runtime_error("theta table: empty column for m=" + std::to_string(m));
    }
    return ThetaTable::from_raw(m_max, step, cap, std::move(cols));
}

/// Opens `path` and applies `reader` to the stream.
template <typename Reader>
inline auto load_file(const std::string& path, Reader reader) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return reader(in);
}

}  // namespace mallows::io
