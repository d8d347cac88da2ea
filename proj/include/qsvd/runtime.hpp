// Copyright 2026 The qsvd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QSVD_RUNTIME_HPP
#define QSVD_RUNTIME_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qsvd/cost.hpp"
#include "qsvd/errors.hpp"
#include "qsvd/io.hpp"
#include "qsvd/matrix_store.hpp"

namespace qsvd {

struct MuResult {
    double mu = 0.0;
    double best_p = 0.0;      // grid point of the smallest s_p term
    double best_term = 0.0;   // sqrt(s_{2p}(A) s_{2(1-p)}(A^T)) at best_p
    double frobenius = 0.0;
    bool frobenius_won = true;
};

inline std::vector<double> default_mu_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 20; ++i) g.push_back(i * 0.05);
    return g;
}

namespace detail {

/// max over rows (or columns) of sum_j |x_j|^q, with |x|^0 counted as 1 only
/// for nonzero x.
struct PowerSums {
    const Matrix& a;
    Matrix logs;  // log|x|, -inf for zeros

    explicit PowerSums(const Matrix& m) : a(m), logs(m.rows(), m.cols()) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                const double x = std::abs(m(i, j));
                logs(i, j) = x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity();
            }
    }

    /// sqrt(s_{2p}(A) s_{2(1-p)}(A^T))
    double term(double p) const {
        const double qr = 2.0 * p, qc = 2.0 * (1.0 - p);
        Vector rows = Vector::Zero(a.rows()), cols = Vector::Zero(a.cols());
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            for (Eigen::Index j = 0; j < a.cols(); ++j) {
                const double l = logs(i, j);
                if (l == -std::numeric_limits<double>::infinity()) continue;
                rows(i) += std::exp(qr * l);
                cols(j) += std::exp(qc * l);
            }
        return std::sqrt(rows.maxCoeff() * cols.maxCoeff());
    }
};

}  // namespace detail

/// mu(A) = min(||A||_F, min_p sqrt(s_{2p}(A) s_{2(1-p)}(A^T))) over a grid of
/// p, followed by a finer pass (step 0.005) around the best grid point.
inline MuResult compute_mu(const DataMatrix& m, std::vector<double> grid = default_mu_grid()) {
    if (grid.empty()) throw PreconditionError("compute_mu: grid must be nonempty");
    for (double p : grid)
        if (!(p >= 0.0 && p <= 1.0)) throw PreconditionError("compute_mu: grid points must be in [0, 1]");
    MuResult r;
    r.frobenius = m.frobenius();
    if (m.empty() || m.nnz() == 0) return r;
    const detail::PowerSums ps(m.values());
    r.best_term = std::numeric_limits<double>::infinity();
    for (double p : grid) {
        const double t = ps.term(p);
        if (t < r.best_term) {
            r.best_term = t;
            r.best_p = p;
        }
    }
    if (grid.size() > 1) {
        const double centre = r.best_p;
        for (int i = -9; i <= 9; ++i) {
            const double p = centre + 0.005 * i;
            if (i == 0 || p < 0.0 || p > 1.0) continue;
            const double t = ps.term(p);
            if (t < r.best_term) {
                r.best_term = t;
                r.best_p = p;
            }
        }
    }
    r.frobenius_won = r.frobenius <= r.best_term;
    r.mu = std::min(r.frobenius, r.best_term);
    return r;
}

enum class GapRule { half_gap, full_gap };

struct ThresholdingEps {
    double value = 0.0;
    bool zero_gap = false;
    std::string warning;
};

/// SVE resolution separating sigma_k from sigma_{k+1} (1-based k).
inline ThresholdingEps thresholding_epsilon(const Vector& sigmas, std::size_t k, GapRule rule) {
    const auto r = static_cast<std::size_t>(sigmas.size());
    if (k < 1 || k > r) throw PreconditionError("thresholding_epsilon: need 1 <= k <= number of sigmas");
    ThresholdingEps out;
    const double sk = sigmas(static_cast<Eigen::Index>(k - 1));
    if (k == r) {
        out.value = sk / 2.0;
        return out;
    }
    const double gap = sk - sigmas(static_cast<Eigen::Index>(k));
    if (!(gap > 0.0)) {
        out.zero_gap = true;
        out.warning = "sigma_" + std::to_string(k) + " equals sigma_" + std::to_string(k + 1) +
                      ": zero gap, no resolution separates them";
        return out;
    }
    out.value = rule == GapRule::half_gap ? gap / 2.0 : gap;
    return out;
}

/// Inverts ||A - Abar|| <= sqrt(k)(eps + delta ||A||) for delta.
inline double estimate_delta(double xi, std::size_t k, double eps, double spectral = 1.0) {
    if (k == 0) throw PreconditionError("estimate_delta: k must be >= 1");
    if (!(spectral > 0.0)) throw PreconditionError("estimate_delta: spectral norm must be > 0");
    const double per = xi / std::sqrt(static_cast<double>(k));
    if (!(per > eps))
        throw InfeasibleBudgetError("estimate_delta: xi / sqrt(k) = " + format_double(per) +
                                    " does not exceed eps = " + format_double(eps));
    return (per - eps) / spectral;
}

struct RuntimeParams {
    std::optional<double> mu, best_p, spectral, frobenius, theta, thresholding_eps, p, delta, gamma;
    std::optional<std::size_t> k, n, m;
    /// Amplitude estimation precision; the sum check and binary search use
    /// gamma when unset.
    std::optional<double> eta;
    /// Rank used by the counting costs; min(n, m) when unset.
    std::optional<std::size_t> rank;
};

struct CostRow {
    std::string routine;
    std::string expression;
    double value = 0.0;
};

namespace detail {

template <class T>
T need(const std::optional<T>& v, const char* name) {
    if (!v) throw IncompleteParamsError(std::string("cost_report: missing ") + name);
    return *v;
}

}  // namespace detail

/// Unit-constant evaluation of every cost expression. Values are for trend
/// comparison only.
inline std::vector<CostRow> cost_report(const RuntimeParams& rp) {
    using detail::need;
    const double mu = need(rp.mu, "mu");
    const double A = need(rp.spectral, "spectral");
    need(rp.frobenius, "frobenius");
    const double theta = need(rp.theta, "theta");
    const double eps = need(rp.thresholding_eps, "thresholding_eps");
    const double p = need(rp.p, "p");
    const double delta = need(rp.delta, "delta");
    const double gamma = need(rp.gamma, "gamma");
    const double k = static_cast<double>(need(rp.k, "k"));
    const double n = static_cast<double>(need(rp.n, "n"));
    const double m = static_cast<double>(need(rp.m, "m"));
    const double eta = rp.eta.value_or(gamma);
    const double r = static_cast<double>(rp.rank.value_or(std::min(need(rp.n, "n"), need(rp.m, "m"))));
    const double xi = delta * std::sqrt(2.0 * k / p);
    const double pre = (A / theta) * (1.0 / std::sqrt(p)) * (mu / eps);

    return {
        {"factor_score_estimation", "(1/gamma^2)(mu/eps)", mu / (gamma * gamma * eps)},
        {"fsr_sum_check", "mu/(eps*eta*sqrt(p))", mu / (eps * eta * std::sqrt(p))},
        {"threshold_binary_search", "mu*log2(mu/eps)/(eps*eta)", mu * std::log2(mu / eps) / (eps * eta)},
        {"reduced_rank_exact", "(mu/eps)*sqrt((k+1)(r-k+1))", mu / eps * std::sqrt((k + 1.0) * (r - k + 1.0))},
        {"reduced_rank_relative", "(mu/(eps*eta))*sqrt(r/k)", mu / (eps * eta) * std::sqrt(r / k)},
        {"topk_extraction_left", "k*n*(||A||/theta)(1/sqrt(p))(mu/eps)/delta^2", pre * k * n / (delta * delta)},
        {"topk_extraction_right", "k*m*(||A||/theta)(1/sqrt(p))(mu/eps)/delta^2", pre * k * m / (delta * delta)},
        {"topk_extraction_linf", "k*(||A||/theta)(1/sqrt(p))(mu/eps)/delta^2", pre * k / (delta * delta)},
        {"pca_fitting", "mu*k^2*m/(theta*eps*xi^2)", mu * k * k * m / (theta * eps * xi * xi)},
        {"classical_baseline", "n*m*k*ln(m/eps)/sqrt(eps)", n * m * k * std::log(m / eps) / std::sqrt(eps)},
    };
}

inline std::string cost_report_csv(const RuntimeParams& rp) {
    CsvWriter w({"routine", "expression", "value"});
    for (const auto& row : cost_report(rp)) w.row(row.routine, "\"" + row.expression + "\"", row.value);
    return w.str();
}

struct LadderResult {
    std::string csv;                      // n, routine, value rows
    std::optional<std::size_t> crossover;  // first n where quantum < classical
};

/// Re-evaluates the report for each sample count n. The quantum fitting
/// cost is factor score sampling plus right-vector extraction.
inline LadderResult cost_ladder(const RuntimeParams& rp, const std::vector<std::size_t>& ladder) {
    LadderResult out;
    CsvWriter w({"n", "routine", "value"});
    for (auto n : ladder) {
        RuntimeParams q = rp;
        q.n = n;
        const auto rows = cost_report(q);
        double quantum = 0.0, classical = 0.0;
        for (const auto& row : rows) {
            w.row(n, row.routine, row.value);
            if (row.routine == "factor_score_estimation" || row.routine == "topk_extraction_right")
                quantum += row.value;
            if (row.routine == "classical_baseline") classical = row.value;
        }
        w.row(n, "quantum_total", quantum);
        if (!out.crossover && quantum < classical) out.crossover = n;
    }
    out.csv = w.str();
    return out;
}

}  // namespace qsvd

#endif  // QSVD_RUNTIME_HPP
