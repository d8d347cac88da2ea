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

#ifndef QSVD_EXPERIMENTS_HPP
#define QSVD_EXPERIMENTS_HPP

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "qsvd/apps.hpp"
#include "qsvd/errors.hpp"
#include "qsvd/io.hpp"
#include "qsvd/noise.hpp"
#include "qsvd/random.hpp"
#include "qsvd/svd_oracle.hpp"

namespace qsvd {

// ---------------------------------------------------------------------------
// k-nearest-neighbour cross-validation

struct KnnOptions {
    std::size_t neighbors = 7;
    std::size_t folds = 10;
    std::uint64_t seed = 0;
    bool stratified = true;
};

struct KnnResult {
    double accuracy = 0.0;
    std::vector<double> per_fold;
    std::vector<int> fold_of;
};

/// Seeded fold assignment. Stratified mode deals each class's shuffled
/// members round-robin, continuing the rotation across classes so fold sizes
/// stay balanced.
inline std::vector<int> assign_folds(const std::vector<int>& labels, std::size_t folds,
                                     std::uint64_t seed, bool stratified) {
    if (folds < 2) throw PreconditionError("assign_folds: folds must be >= 2");
    if (labels.size() < folds) throw PreconditionError("assign_folds: fewer samples than folds");
    Rng rng(SeedStream(seed).child("folds"));
    auto shuffle = [&](std::vector<std::size_t>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
    };
    std::vector<int> fold(labels.size(), 0);
    if (!stratified) {
        std::vector<std::size_t> idx(labels.size());
        std::iota(idx.begin(), idx.end(), 0);
        shuffle(idx);
        for (std::size_t i = 0; i < idx.size(); ++i) fold[idx[i]] = static_cast<int>(i % folds);
        return fold;
    }
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    std::size_t offset = 0;
    for (auto& [label, members] : by_class) {
        if (members.size() < folds)
            throw StratificationError("class " + std::to_string(label) + " has " +
                                      std::to_string(members.size()) + " samples, fewer than " +
                                      std::to_string(folds) + " folds");
        shuffle(members);
        for (std::size_t j = 0; j < members.size(); ++j)
            fold[members[j]] = static_cast<int>((offset + j) % folds);
        offset += members.size();
    }
    return fold;
}

namespace detail {

inline double squared_distance(const Matrix& X, Eigen::Index a, Eigen::Index b) {
    double d = 0.0;
    const double* pa = X.data() + a * X.cols();
    const double* pb = X.data() + b * X.cols();
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double t = pa[j] - pb[j];
        d += t * t;
    }
    return d;
}

/// Majority vote over the given neighbour labels, lowest label on ties.
inline int majority(const std::vector<int>& votes) {
    std::map<int, std::size_t> count;
    for (int v : votes) ++count[v];
    int best = 0;
    std::size_t best_n = 0;
    for (const auto& [label, n] : count)
        if (n > best_n) {
            best = label;
            best_n = n;
        }
    return best;
}

}  // namespace detail

/// Euclidean kNN with ties among distances broken by the lower sample index
/// and ties among votes by the lower label.
inline KnnResult knn_cv(const Matrix& X, const std::vector<int>& labels, KnnOptions o = {}) {
    if (static_cast<std::size_t>(X.rows()) != labels.size())
        throw ShapeError("knn_cv: " + std::to_string(X.rows()) + " samples but " +
                         std::to_string(labels.size()) + " labels");
    if (o.neighbors < 1) throw PreconditionError("knn_cv: neighbors must be >= 1");
    KnnResult out;
    out.fold_of = assign_folds(labels, o.folds, o.seed, o.stratified);

    std::vector<std::pair<double, Eigen::Index>> cand;
    std::vector<int> votes;
    for (std::size_t f = 0; f < o.folds; ++f) {
        std::vector<Eigen::Index> train, test;
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            (out.fold_of[static_cast<std::size_t>(i)] == static_cast<int>(f) ? test : train).push_back(i);
        if (train.empty() || test.empty()) throw StratificationError("knn_cv: empty fold");
        const std::size_t kk = std::min(o.neighbors, train.size());
        std::size_t correct = 0;
        for (auto t : test) {
            cand.clear();
            for (auto r : train) cand.emplace_back(detail::squared_distance(X, t, r), r);
            std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(kk), cand.end());
            votes.clear();
            for (std::size_t j = 0; j < kk; ++j) votes.push_back(labels[static_cast<std::size_t>(cand[j].second)]);
            if (detail::majority(votes) == labels[static_cast<std::size_t>(t)]) ++correct;
        }
        out.per_fold.push_back(static_cast<double>(correct) / static_cast<double>(test.size()));
    }
    out.accuracy = std::accumulate(out.per_fold.begin(), out.per_fold.end(), 0.0) /
                   static_cast<double>(out.per_fold.size());
    return out;
}

// ---------------------------------------------------------------------------
// Rank correlation

struct SpearmanResult {
    double rho = 0.0;
    double p_value = 1.0;  // two-sided, t approximation with n - 2 dof
};

/// Ranks starting at 1 with ties sharing their average rank.
inline std::vector<double> average_ranks(const std::vector<double>& x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::vector<double> rank(x.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) rank[order[t]] = avg;
        i = j + 1;
    }
    return rank;
}

inline SpearmanResult spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ShapeError("spearman: length mismatch");
    if (x.size() < 3) throw PreconditionError("spearman: need at least 3 points");
    const auto rx = average_ranks(x), ry = average_ranks(y);
    const auto n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    SpearmanResult r;
    if (!(sxx > 0.0 && syy > 0.0)) return r;  // a constant series has no rank correlation
    r.rho = sxy / std::sqrt(sxx * syy);
    if (std::abs(r.rho) >= 1.0) {
        r.p_value = 0.0;
        return r;
    }
    const double t = r.rho * std::sqrt((n - 2.0) / (1.0 - r.rho * r.rho));
    const boost::math::students_t dist(n - 2.0);
    r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    return r;
}

// ---------------------------------------------------------------------------
// Accuracy under Frobenius perturbation

struct SweepRow {
    double xi = 0.0;
    double observed_error = 0.0;  // mean ||Y - Ybar||_F over trials
    double accuracy = 0.0;        // mean over trials
    double accuracy_std = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    SpearmanResult trend;  // rank correlation of xi against accuracy

    std::string csv() const {
        CsvWriter w({"xi", "observed_error", "accuracy", "accuracy_std"});
        for (const auto& r : rows) w.row(r.xi, r.observed_error, r.accuracy, r.accuracy_std);
        return w.str();
    }
};

/// Perturbs the representation Y at each xi and re-runs the same
/// cross-validation (fixed folds), `trials` times per grid point.
inline SweepResult accuracy_vs_error_sweep(const Matrix& Y, const std::vector<int>& labels,
                                           const std::vector<double>& xi_grid, std::size_t trials,
                                           std::uint64_t seed, KnnOptions knn = {}) {
    if (xi_grid.empty()) throw PreconditionError("accuracy_vs_error_sweep: grid must be nonempty");
    if (trials < 1) throw PreconditionError("accuracy_vs_error_sweep: trials must be >= 1");
    const SeedStream seeds(seed);
    knn.seed = seeds.child("folds");
    SweepResult out;
    for (std::size_t g = 0; g < xi_grid.size(); ++g) {
        SweepRow row;
        row.xi = xi_grid[g];
        std::vector<double> acc;
        double err = 0.0;
        for (std::size_t t = 0; t < trials; ++t) {
            const Matrix Yp = perturb_matrix_frobenius(Y, row.xi, seeds.child("perturb", g * trials + t));
            err += (Yp - Y).norm();
            acc.push_back(knn_cv(Yp, labels, knn).accuracy);
            if (row.xi == 0.0) break;  // deterministic: every trial is identical
        }
        const auto n = static_cast<double>(acc.size());
        row.observed_error = err / n;
        row.accuracy = std::accumulate(acc.begin(), acc.end(), 0.0) / n;
        double ss = 0.0;
        for (double a : acc) ss += (a - row.accuracy) * (a - row.accuracy);
        row.accuracy_std = acc.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
        out.rows.push_back(row);
    }
    if (out.rows.size() >= 3) {
        std::vector<double> xs, ys;
        for (const auto& r : out.rows) {
            xs.push_back(r.xi);
            ys.push_back(r.accuracy);
        }
        out.trend = spearman(xs, ys);
    }
    return out;
}

inline SweepResult accuracy_vs_error_sweep(const DataMatrix& m, const std::vector<int>& labels,
                                           const PcaModel& model, const std::vector<double>& xi_grid,
                                           std::size_t trials, std::uint64_t seed, KnnOptions knn = {}) {
    const Matrix Y = pca_transform_matrix(model, m).Y;
    return accuracy_vs_error_sweep(Y, labels, xi_grid, trials, seed, knn);
}

// ---------------------------------------------------------------------------
// Factor score ratio distribution

inline std::string fsr_distribution_csv(const SvdModel& s) {
    CsvWriter w({"rank", "sigma", "factor_score", "ratio", "cumulative"});
    const Vector ratios = s.ratios();
    double cum = 0.0;
    for (Eigen::Index i = 0; i < s.rank(); ++i) {
        cum += ratios(i);
        w.row(i + 1, s.sigmas(i), s.sigmas(i) * s.sigmas(i), ratios(i), cum);
    }
    return w.str();
}

inline void fsr_distribution_report(const SvdModel& s, const std::filesystem::path& out) {
    CsvWriter::write_text(out, fsr_distribution_csv(s));
}

}  // namespace qsvd

#endif  // QSVD_EXPERIMENTS_HPP
