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

#ifndef QSVD_APPS_HPP
#define QSVD_APPS_HPP

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qsvd/bounds.hpp"
#include "qsvd/cost.hpp"
#include "qsvd/errors.hpp"
#include "qsvd/matrix_store.hpp"
#include "qsvd/noise.hpp"
#include "qsvd/qsim.hpp"
#include "qsvd/random.hpp"
#include "qsvd/svd_oracle.hpp"

namespace qsvd {

/// What decides how many factors a model keeps.
struct FitTarget {
    enum class Kind { variance, components, threshold };
    Kind kind = Kind::variance;
    double value = 0.85;

    static FitTarget variance(double p) { return {Kind::variance, p}; }
    static FitTarget components(std::size_t k) { return {Kind::components, static_cast<double>(k)}; }
    static FitTarget threshold(double theta) { return {Kind::threshold, theta}; }
};

inline const char* to_string(FitTarget::Kind k) {
    switch (k) {
        case FitTarget::Kind::variance: return "variance";
        case FitTarget::Kind::components: return "components";
        case FitTarget::Kind::threshold: return "threshold";
    }
    return "?";
}

struct FitOptions {
    double gamma = 0.0316;
    double eps = 0.01;
    double delta = 0.1;
    /// When > 0, delta is derived as xi sqrt(p) / sqrt(2k) after selection.
    double xi = 0.0;
    double wald_z = 2.0;
    std::uint64_t seed = 0;
    SveConfig sve{};
    TomographyNorm norm = TomographyNorm::l2;
    NoiseShape shape = NoiseShape::random;
    ThetaPlacement placement = ThetaPlacement::midpoint;
    /// Variance targets: use the threshold binary search instead of
    /// factor-score sampling, with this eta.
    bool binary_search = false;
    double eta = 0.01;
};

struct ThresholdChoice {
    double theta = 0.0;
    std::size_t k_selected = 0;  // as seen by the selection step
    double p_selected = 0.0;     // estimated (variance) or exact retained mass
    std::optional<SpectralSample> sample;
    CostLedger cost;
};

/// Resolves a FitTarget into a threshold theta on the estimated spectrum.
inline ThresholdChoice choose_threshold(const SvdModel& s, FitTarget target, const FitOptions& o) {
    if (s.rank() == 0) throw EmptyRetentionError("choose_threshold: matrix has rank 0");
    const SeedStream seeds(o.seed);
    const auto spectrum = o.sve.round(s, o.eps);
    ThresholdChoice c;
    switch (target.kind) {
        case FitTarget::Kind::variance: {
            if (o.binary_search) {
                auto r = binary_search_threshold(s, target.value, o.eps, o.eta, seeds.child("search"),
                                                 AmplitudeMode::additive, o.sve.mu);
                c.cost.append(r.cost);
                if (!r.theta)
                    throw UnreachableTargetError("binary search found no threshold for p = " +
                                                 format_double(target.value));
                c.theta = *r.theta > 0.0 ? *r.theta : spectrum.buckets.back().value;
            } else {
                const auto N = wald_sample_size(o.gamma, o.wald_z);
                auto sample = sample_factor_scores(s, o.gamma, o.eps, N, seeds.child("sample"), o.sve);
                const auto sel = select_k_for_variance(sample, target.value, o.placement);
                c.cost.append(sample.cost);
                c.theta = sel.theta > 0.0 ? sel.theta : sel.last_sigma_hat;
                c.k_selected = sel.k;
                c.p_selected = sel.p_est;
                c.sample = std::move(sample);
                return c;
            }
            break;
        }
        case FitTarget::Kind::components: {
            if (!(target.value >= 1.0)) throw PreconditionError("choose_threshold: k must be >= 1");
            const auto k = std::min<std::size_t>(static_cast<std::size_t>(target.value),
                                                 static_cast<std::size_t>(s.rank()));
            c.theta = spectrum.sigma_hat[k - 1];
            break;
        }
        case FitTarget::Kind::threshold:
            if (!(target.value > 0.0)) throw PreconditionError("choose_threshold: theta must be > 0");
            c.theta = target.value;
            break;
    }
    c.k_selected = spectrum.count_at_or_above(c.theta);
    c.p_selected = spectrum.mass_at_or_above(c.theta);
    return c;
}

/// Corollary substitution delta = xi sqrt(p) / sqrt(2k).
inline double delta_from_xi(double xi, double p, std::size_t k) {
    if (!(xi > 0.0) || k == 0) throw PreconditionError("delta_from_xi: xi > 0 and k >= 1 required");
    return xi * std::sqrt(p) / std::sqrt(2.0 * static_cast<double>(k));
}

namespace detail {

inline double resolve_delta(const FitOptions& o, const SvdModel& s, double theta) {
    if (!(o.xi > 0.0)) return o.delta;
    const auto spectrum = o.sve.round(s, o.eps);
    const auto k = spectrum.count_at_or_above(theta);
    if (k == 0) throw EmptyRetentionError("no estimated singular value >= theta");
    return std::min(delta_from_xi(o.xi, spectrum.mass_at_or_above(theta), k), 0.999);
}

inline nlohmann::ordered_json fit_meta(const char* model, double theta, double eps, double delta,
                                       double gamma, double p, std::size_t k, std::uint64_t seed) {
    nlohmann::ordered_json j;
    j["model"] = model;
    j["theta"] = theta;
    j["epsilon"] = eps;
    j["delta"] = delta;
    j["gamma"] = gamma;
    j["p"] = p;
    j["k"] = k;
    j["seed"] = seed;
    return j;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// PCA

struct PcaModel {
    Eigen::MatrixXd components;  // m x k, columns of Vbar
    Vector sigmas;               // sigma_hat
    Vector ratios;               // sigma_hat^2 / ||A||_F^2
    double p_retained = 0.0;     // sum of ratios
    double p_exact = 0.0;        // oracle mass of the retained indices
    double p_selected = 0.0;     // estimate the selection step stopped at
    std::size_t k = 0;
    std::vector<Eigen::Index> indices;
    double theta = 0.0, epsilon = 0.0, delta = 0.0, gamma = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t measurements_used = 0;
    FitTarget target{};
    CostLedger cost;

    void export_to(const std::filesystem::path& dir) const {
        std::filesystem::create_directories(dir);
        write_matrix_csv(dir / "components.csv", components);
        CsvWriter w({"index", "sigma_hat", "ratio"});
        for (Eigen::Index j = 0; j < sigmas.size(); ++j) w.row(indices[static_cast<std::size_t>(j)], sigmas(j), ratios(j));
        w.save(dir / "sigmas.csv");
        auto meta = detail::fit_meta("pca", theta, epsilon, delta, gamma, p_retained, k, seed);
        meta["p_exact"] = p_exact;
        meta["target"] = to_string(target.kind);
        meta["target_value"] = target.value;
        CsvWriter::write_text(dir / "meta.json", meta.dump(2) + "\n");
    }
};

inline PcaModel pca_fit(const SvdModel& s, FitTarget target, const FitOptions& o) {
    auto choice = choose_threshold(s, target, o);
    const double delta = detail::resolve_delta(o, s, choice.theta);
    ExtractionOptions eo;
    eo.sve = o.sve;
    eo.shape = o.shape;
    const auto ex = extract_topk(s, choice.theta, o.eps, delta, Side::right, o.norm,
                                 SeedStream(o.seed).child("extract"), eo);
    PcaModel m;
    m.components = ex.V_hat;
    m.sigmas = ex.sigma_hats;
    m.ratios = ex.factor_scores / (s.frobenius * s.frobenius);
    m.p_retained = m.ratios.sum();
    m.p_exact = ex.p_retained;
    m.p_selected = choice.p_selected;
    m.k = ex.k;
    m.indices = ex.indices;
    m.theta = choice.theta;
    m.epsilon = o.eps;
    m.delta = delta;
    m.gamma = o.gamma;
    m.seed = o.seed;
    m.measurements_used = ex.measurements_used;
    m.target = target;
    m.cost = choice.cost;
    m.cost.append(ex.cost);
    const double mu = o.sve.resolved_mu(s);
    const double xi = o.xi > 0.0 ? o.xi : delta * std::sqrt(2.0 * static_cast<double>(m.k) / std::max(m.p_exact, 1e-300));
    const double kd = static_cast<double>(m.k);
    m.cost.add({"pca_fitting", "mu*k^2*m/(theta*eps*xi^2)",
                sub({{"mu", mu}, {"k", kd}, {"m", static_cast<double>(s.cols())}, {"theta", m.theta},
                     {"eps", o.eps}, {"xi", xi}}),
                mu * kd * kd * static_cast<double>(s.cols()) / (m.theta * o.eps * xi * xi)});
    return m;
}

inline PcaModel pca_fit(const DataMatrix& a, FitTarget target, const FitOptions& o) {
    return pca_fit(compute_svd(a), target, o);
}

struct VectorProjection {
    Vector y;
    double norm_est = 0.0;
    double state_error_bound = std::numeric_limits<double>::infinity();
    bool undefined_state = false;
};

/// y = Vbar_k^T a. The norm of y is estimated through the amplitude ||y|| /
/// ||a|| (which lies in [0, 1]) to relative error eta.
inline VectorProjection pca_transform_vector(const PcaModel& model, const Vector& a, double eta,
                                             std::uint64_t seed) {
    if (a.size() != model.components.rows())
        throw ShapeError("pca_transform_vector: vector has " + std::to_string(a.size()) +
                         " entries, model expects " + std::to_string(model.components.rows()));
    VectorProjection out;
    out.y = model.components.transpose() * a;
    const double ny = out.y.norm(), na = a.norm();
    if (!(ny > 0.0)) {
        out.undefined_state = true;
        return out;
    }
    const double ratio = std::min(1.0, ny / na);
    const auto mode = eta > 0.0 ? AmplitudeMode::relative : AmplitudeMode::exact;
    out.norm_est = na * amplitude_estimate(ratio, eta, mode, seed);
    out.state_error_bound = na / ny * std::sqrt(2.0 * static_cast<double>(model.k)) * model.delta;
    return out;
}

struct MatrixProjection {
    Eigen::MatrixXd Y;
    double xi_bound = 0.0;
    double p = 0.0;
};

inline MatrixProjection pca_transform_matrix(const PcaModel& model, const DataMatrix& a) {
    if (a.cols() != model.components.rows())
        throw ShapeError("pca_transform_matrix: matrix has " + std::to_string(a.cols()) +
                         " columns, model expects " + std::to_string(model.components.rows()));
    MatrixProjection out;
    out.Y = a.values() * model.components;
    const double ny = out.Y.norm();
    out.p = a.frobenius() > 0.0 ? ny * ny / (a.frobenius() * a.frobenius()) : 0.0;
    out.xi_bound = ny > 0.0 ? a.frobenius() / ny * std::sqrt(2.0 * static_cast<double>(model.k)) * model.delta
                            : std::numeric_limits<double>::infinity();
    return out;
}

struct RepresentabilityRow {
    double p = 0.0;
    std::size_t k_p = 0;
    double alpha = 0.0;
    double beta = 0.0;
    std::size_t zero_rows = 0;
};

/// For each p: the least k whose cumulative ratio reaches p, and the fraction
/// alpha of nonzero rows keeping at least beta of their norm in the top-k
/// right singular subspace. beta defaults to p; `beta_offset` shifts it.
inline std::vector<RepresentabilityRow> pca_representability(const DataMatrix& a, const SvdModel& s,
                                                             const std::vector<double>& p_grid,
                                                             double beta_offset = 0.0) {
    for (double p : p_grid)
        if (!(p > 0.0 && p <= 1.0)) throw PreconditionError("pca_representability: p must be in (0, 1]");
    if (a.cols() != s.cols()) throw ShapeError("pca_representability: model and matrix disagree");
    const Vector ratios = s.ratios();
    std::vector<std::size_t> ks;
    for (double p : p_grid) {
        double acc = 0.0;
        std::size_t k = 0;
        while (k < static_cast<std::size_t>(ratios.size()) && acc < p * (1.0 - 1e-12))
            acc += ratios(static_cast<Eigen::Index>(k++));
        ks.push_back(std::max<std::size_t>(k, 1));
    }
    const auto kmax = static_cast<Eigen::Index>(ks.empty() ? 1 : *std::max_element(ks.begin(), ks.end()));
    const Eigen::MatrixXd proj = a.values() * s.V.leftCols(kmax);
    // cumulative squared projection norms per row
    Eigen::MatrixXd cum = proj.array().square();
    for (Eigen::Index j = 1; j < kmax; ++j) cum.col(j) += cum.col(j - 1);

    std::vector<RepresentabilityRow> out;
    for (std::size_t g = 0; g < p_grid.size(); ++g) {
        RepresentabilityRow r;
        r.p = p_grid[g];
        r.k_p = ks[g];
        r.beta = p_grid[g] + beta_offset;
        std::size_t ok = 0, counted = 0;
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            const double na = a.row_norms()(i);
            if (!(na > 0.0)) {
                ++r.zero_rows;
                continue;
            }
            ++counted;
            if (std::sqrt(cum(i, static_cast<Eigen::Index>(r.k_p) - 1)) / na >= r.beta) ++ok;
        }
        r.alpha = counted ? static_cast<double>(ok) / static_cast<double>(counted) : 0.0;
        out.push_back(r);
    }
    return out;
}

// ---------------------------------------------------------------------------
// CA

struct CaModel {
    Eigen::MatrixXd row_coords;  // D_X^{-1/2} Ubar
    Eigen::MatrixXd col_coords;  // D_Y^{-1/2} Vbar
    Eigen::MatrixXd U_hat, V_hat;
    Vector sigmas, ratios;
    double bound_row = 0.0, bound_col = 0.0;
    double p_retained = 0.0;
    std::size_t k = 0;
    double theta = 0.0, epsilon = 0.0, delta = 0.0, gamma = 0.0;
    std::uint64_t seed = 0;
    CaMatrix table;
    CostLedger cost;

    void export_to(const std::filesystem::path& dir) const {
        std::filesystem::create_directories(dir);
        write_matrix_csv(dir / "row_coords.csv", row_coords);
        write_matrix_csv(dir / "col_coords.csv", col_coords);
        CsvWriter w({"factor", "sigma_hat", "ratio"});
        for (Eigen::Index j = 0; j < sigmas.size(); ++j) w.row(j, sigmas(j), ratios(j));
        w.save(dir / "sigmas.csv");
        auto meta = detail::fit_meta("ca", theta, epsilon, delta, gamma, p_retained, k, seed);
        meta["bound_row"] = bound_row;
        meta["bound_col"] = bound_col;
        meta["dropped_rows"] = table.dropped_rows;
        meta["dropped_cols"] = table.dropped_cols;
        CsvWriter::write_text(dir / "meta.json", meta.dump(2) + "\n");
    }
};

inline CaModel ca_fit(const ContingencyTable& t, FitTarget target, const FitOptions& o,
                      CaOptions ca_opts = {}) {
    CaModel m;
    m.table = build_ca_matrix(t, ca_opts);
    const auto s = compute_svd(m.table.residuals);
    if (s.rank() == 0)
        throw EmptyRetentionError("ca_fit: residual matrix is zero (independent table), nothing to retain");
    const auto choice = choose_threshold(s, target, o);
    const double delta = detail::resolve_delta(o, s, choice.theta);
    ExtractionOptions eo;
    eo.sve = o.sve;
    eo.shape = o.shape;
    const auto ex = extract_topk(s, choice.theta, o.eps, delta, Side::both, o.norm,
                                 SeedStream(o.seed).child("extract"), eo);
    m.U_hat = ex.U_hat;
    m.V_hat = ex.V_hat;
    m.row_coords = m.table.row_scale().asDiagonal() * ex.U_hat;
    m.col_coords = m.table.col_scale().asDiagonal() * ex.V_hat;
    m.sigmas = ex.sigma_hats;
    m.ratios = ex.ratios;
    m.p_retained = ex.p_retained;
    m.k = ex.k;
    m.theta = choice.theta;
    m.epsilon = o.eps;
    m.delta = delta;
    m.gamma = o.gamma;
    m.seed = o.seed;
    m.bound_row = bound_DU(inv_sqrt_diag_frobenius(m.table.row_marginals), delta, m.k);
    m.bound_col = bound_DU(inv_sqrt_diag_frobenius(m.table.col_marginals), delta, m.k);
    m.cost = choice.cost;
    m.cost.append(ex.cost);
    return m;
}

// ---------------------------------------------------------------------------
// LSA

struct LsaModel {
    Eigen::MatrixXd word_space;   // Ubar Sbar
    Eigen::MatrixXd doc_space;    // Vbar Sbar
    Eigen::MatrixXd word_half;    // Ubar Sbar^{1/2}
    Eigen::MatrixXd doc_half;     // Vbar Sbar^{1/2}
    Eigen::MatrixXd fold_matrix;  // Ubar Sbar^{-1}
    Eigen::MatrixXd U_hat, V_hat;
    Vector sigmas;
    std::size_t k = 0;
    double theta = 0.0, epsilon = 0.0, delta = 0.0, gamma = 0.0;
    std::uint64_t seed = 0;
    BoundPair bound_us, bound_us_half;
    double bound_us_inv = 0.0;
    CostLedger cost;

    void export_to(const std::filesystem::path& dir) const {
        std::filesystem::create_directories(dir);
        write_matrix_csv(dir / "word_space.csv", word_space);
        write_matrix_csv(dir / "doc_space.csv", doc_space);
        write_matrix_csv(dir / "word_half.csv", word_half);
        write_matrix_csv(dir / "doc_half.csv", doc_half);
        write_matrix_csv(dir / "fold_matrix.csv", fold_matrix);
        write_matrix_csv(dir / "sigmas.csv", Eigen::MatrixXd(sigmas));
        auto meta = detail::fit_meta("lsa", theta, epsilon, delta, gamma, 0.0, k, seed);
        meta["bound_US"] = bound_us.tight;
        meta["bound_US_half"] = bound_us_half.tight;
        meta["bound_US_inv"] = bound_us_inv;
        CsvWriter::write_text(dir / "meta.json", meta.dump(2) + "\n");
    }
};

inline constexpr std::size_t kDefaultLsaComponents = 100;

inline LsaModel lsa_fit(const SvdModel& s, std::optional<FitTarget> target, const FitOptions& o) {
    const auto t = target.value_or(FitTarget::components(kDefaultLsaComponents));
    const auto choice = choose_threshold(s, t, o);
    if (!(choice.theta > o.eps))
        throw PreconditionError("lsa_fit: theta (" + format_double(choice.theta) +
                                ") must exceed eps (" + format_double(o.eps) + ") to invert sigma_hat");
    const double delta = detail::resolve_delta(o, s, choice.theta);
    ExtractionOptions eo;
    eo.sve = o.sve;
    eo.shape = o.shape;
    const auto ex = extract_topk(s, choice.theta, o.eps, delta, Side::both, o.norm,
                                 SeedStream(o.seed).child("extract"), eo);
    LsaModel m;
    m.U_hat = ex.U_hat;
    m.V_hat = ex.V_hat;
    m.sigmas = ex.sigma_hats;
    m.k = ex.k;
    m.word_space = ex.U_hat * m.sigmas.asDiagonal();
    m.doc_space = ex.V_hat * m.sigmas.asDiagonal();
    const Vector half = m.sigmas.array().sqrt();
    m.word_half = ex.U_hat * half.asDiagonal();
    m.doc_half = ex.V_hat * half.asDiagonal();
    m.fold_matrix = ex.U_hat * m.sigmas.cwiseInverse().asDiagonal();
    m.theta = choice.theta;
    m.epsilon = o.eps;
    m.delta = delta;
    m.gamma = o.gamma;
    m.seed = o.seed;
    m.bound_us = bound_US(m.sigmas, o.eps, delta);
    m.bound_us_half = bound_US_half(m.sigmas, o.eps, delta, m.theta);
    m.bound_us_inv = bound_US_inv(o.eps, delta, m.theta, m.k);
    m.cost = choice.cost;
    m.cost.append(ex.cost);
    return m;
}

inline LsaModel lsa_fit(const DataMatrix& a, std::optional<FitTarget> target, const FitOptions& o) {
    return lsa_fit(compute_svd(a), target, o);
}

/// Folds a word-count vector into the document coordinates: x^T Ubar Sbar^{-1}.
inline Vector lsa_fold_query(const LsaModel& model, const Vector& x) {
    if (x.size() != model.fold_matrix.rows())
        throw ShapeError("lsa_fold_query: query has " + std::to_string(x.size()) + " entries, model has " +
                         std::to_string(model.fold_matrix.rows()) + " words");
    return model.fold_matrix.transpose() * x;
}

enum class Similarity { cosine, inner_product };

/// Similarity of `query` against every row of `space`. Zero rows (or a zero
/// query) give cosine 0.
inline Vector similarities(const Vector& query, const Eigen::MatrixXd& space,
                           Similarity kind = Similarity::cosine) {
    if (query.size() != space.cols()) throw ShapeError("similarities: dimension mismatch");
    Vector out = space * query;
    if (kind == Similarity::cosine) {
        const double qn = query.norm();
        for (Eigen::Index i = 0; i < out.size(); ++i) {
            const double d = qn * space.row(i).norm();
            out(i) = d > 0.0 ? out(i) / d : 0.0;
        }
    }
    return out;
}

}  // namespace qsvd

#endif  // QSVD_APPS_HPP
