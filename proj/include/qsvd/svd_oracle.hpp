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

#ifndef QSVD_SVD_ORACLE_HPP
#define QSVD_SVD_ORACLE_HPP

#include <Eigen/Dense>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include "qsvd/errors.hpp"
#include "qsvd/io.hpp"
#include "qsvd/matrix_store.hpp"
#include "qsvd/random.hpp"

namespace qsvd {

/// Exact thin SVD A = U diag(sigmas) V^T restricted to the singular values
/// above the rank tolerance. Every simulated routine consumes this oracle.
struct SvdModel {
    Vector sigmas;          // non-increasing, all > rank_tol * sigma_max
    Eigen::MatrixXd U;      // n x r, orthonormal columns
    Eigen::MatrixXd V;      // m x r, orthonormal columns
    double rank_tol = 1e-10;
    double frobenius = 0.0;  // of the input matrix
    /// Degeneracy group of each index: consecutive singular values closer
    /// than 1e-12 * sigma_max share a group and their vectors span a joint
    /// subspace.
    std::vector<int> groups;
    Provenance provenance;

    Eigen::Index rank() const { return sigmas.size(); }
    Eigen::Index rows() const { return U.rows(); }
    Eigen::Index cols() const { return V.rows(); }
    double sigma_max() const { return sigmas.size() ? sigmas(0) : 0.0; }

    /// Sum of squared singular values, i.e. the total variance.
    double total_variance() const { return sigmas.squaredNorm(); }

    /// Factor score ratios sigma_i^2 / sum_j sigma_j^2.
    Vector ratios() const {
        const double tv = total_variance();
        return tv > 0.0 ? Vector(sigmas.array().square() / tv) : Vector::Zero(sigmas.size());
    }

    /// Factor scores sigma_i^2.
    Vector factor_scores() const { return sigmas.array().square(); }
};

struct SvdOptions {
    /// Singular values below rank_tol * sigma_max are discarded.
    double rank_tol = 1e-10;
    double degeneracy_tol = 1e-12;
};

namespace detail {

/// Flips each pair (u_i, v_i) so that the largest-magnitude coordinate of v_i
/// is positive, ties going to the lowest index.
inline void apply_sign_convention(Eigen::MatrixXd& U, Eigen::MatrixXd& V) {
    for (Eigen::Index c = 0; c < V.cols(); ++c) {
        Eigen::Index best = 0;
        double best_abs = -1.0;
        for (Eigen::Index i = 0; i < V.rows(); ++i) {
            const double a = std::abs(V(i, c));
            if (a > best_abs) {
                best_abs = a;
                best = i;
            }
        }
        if (V(best, c) < 0.0) {
            V.col(c) = -V.col(c);
            U.col(c) = -U.col(c);
        }
    }
}

}  // namespace detail

inline SvdModel compute_svd(const DataMatrix& m, SvdOptions opts = {}) {
    if (m.empty()) throw PreconditionError("compute_svd: matrix is empty");
    if (opts.rank_tol < 0.0) throw PreconditionError("compute_svd: rank_tol must be >= 0");
    if (!m.values().allFinite()) throw NumericError("compute_svd: matrix has non-finite entries");

    const bool transposed = m.rows() < m.cols();
    Eigen::MatrixXd a = transposed ? Eigen::MatrixXd(m.values().transpose())
                                   : Eigen::MatrixXd(m.values());
    const Eigen::Index n = a.rows(), k = a.cols();

    Eigen::MatrixXd U, V;
    Vector s;
    if (n > 2 * k) {
        // Tall: QR first, then SVD of the small triangular factor.
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
        Eigen::MatrixXd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
        Eigen::BDCSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
        s = svd.singularValues();
        V = svd.matrixV();
        U = Eigen::MatrixXd::Zero(n, k);
        U.topRows(k) = svd.matrixU();
        U.applyOnTheLeft(qr.householderQ());
    } else {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
        s = svd.singularValues();
        U = svd.matrixU();
        V = svd.matrixV();
    }
    if (transposed) std::swap(U, V);

    const double smax = s.size() ? s(0) : 0.0;
    Eigen::Index r = 0;
    while (r < s.size() && smax > 0.0 && s(r) > opts.rank_tol * smax) ++r;

    SvdModel out;
    out.sigmas = s.head(r);
    out.U = U.leftCols(r);
    out.V = V.leftCols(r);
    out.rank_tol = opts.rank_tol;
    out.frobenius = m.frobenius();
    out.provenance = m.provenance();
    detail::apply_sign_convention(out.U, out.V);
    out.groups.resize(static_cast<std::size_t>(r));
    int g = 0;
    for (Eigen::Index i = 0; i < r; ++i) {
        if (i > 0 && out.sigmas(i - 1) - out.sigmas(i) >= opts.degeneracy_tol * smax) ++g;
        out.groups[static_cast<std::size_t>(i)] = g;
    }
    return out;
}

/// Builds an oracle directly from a spectrum and orthonormal factors
/// (used for synthetic spectra).
inline SvdModel make_svd_model(Vector sigmas, Eigen::MatrixXd U, Eigen::MatrixXd V) {
    SvdModel out;
    out.sigmas = std::move(sigmas);
    out.U = std::move(U);
    out.V = std::move(V);
    out.frobenius = out.sigmas.norm();
    out.groups.resize(static_cast<std::size_t>(out.sigmas.size()));
    int g = 0;
    const double smax = out.sigma_max();
    for (Eigen::Index i = 0; i < out.sigmas.size(); ++i) {
        if (i > 0 && out.sigmas(i - 1) - out.sigmas(i) >= 1e-12 * smax) ++g;
        out.groups[static_cast<std::size_t>(i)] = g;
    }
    return out;
}

inline Eigen::MatrixXd reconstruct(const SvdModel& s) {
    return s.U * s.sigmas.asDiagonal() * s.V.transpose();
}

enum class SveScale { absolute, relative_to_mu };

/// One value of the consistent-rounding grid and the singular indices that
/// land on it.
struct SpectrumBucket {
    double value = 0.0;
    std::int64_t level = 0;
    std::vector<Eigen::Index> members;
    double mass = 0.0;

    bool operator==(const SpectrumBucket&) const = default;
};

/// Singular values as a consistent phase estimation would report them:
/// deterministic rounding onto a grid of step mu / 2^bits.
struct RoundedSpectrum {
    std::vector<SpectrumBucket> buckets;  // descending by value
    std::vector<double> sigma_hat;        // per original index
    std::vector<std::size_t> bucket_of;   // per original index
    std::vector<double> ratios;           // per original index
    double resolution = 0.0;
    double scale = 1.0;
    int bits = 0;

    double step() const { return scale / std::ldexp(1.0, bits); }

    /// Exact ratio mass of the indices with sigma_hat >= theta, accumulated
    /// one index at a time in index order.
    double mass_at_or_above(double theta) const {
        double p = 0.0;
        for (std::size_t i = 0; i < sigma_hat.size(); ++i)
            if (sigma_hat[i] >= theta) p += ratios[i];
        return p;
    }

    std::size_t count_at_or_above(double theta) const {
        std::size_t k = 0;
        for (const auto& b : buckets)
            if (b.value >= theta) k += b.members.size();
        return k;
    }

    bool operator==(const RoundedSpectrum&) const = default;
};

/// Bits needed for resolution eps at scale mu: ceil(log2(mu / eps)).
inline int sve_bits(double eps, double mu) {
    if (!(eps > 0.0)) throw ResolutionError("sve: eps must be > 0");
    if (!(mu > 0.0)) throw ResolutionError("sve: scale mu must be > 0");
    if (eps >= mu) throw ResolutionError("sve: eps >= mu leaves zero bits of resolution");
    return static_cast<int>(std::ceil(std::log2(mu / eps)));
}

/// Rounds each sigma to the nearest multiple of mu / 2^b. In absolute mode
/// mu is 1 and the caller is expected to have pre-scaled the spectrum.
inline RoundedSpectrum sve_round(const SvdModel& s, double eps,
                                 SveScale mode = SveScale::absolute, double mu = 1.0) {
    const double scale = mode == SveScale::absolute ? 1.0 : mu;
    RoundedSpectrum out;
    out.resolution = eps;
    out.scale = scale;
    out.bits = sve_bits(eps, scale);
    // sigma_hat = level * scale / 2^b, computed as one rounded product followed
    // by an exact power-of-two scaling, so that tau * scale with tau = j / 2^b
    // compares equal to the bucket value of level j.
    auto value_of = [&](std::int64_t level) {
        return std::ldexp(static_cast<double>(level) * scale, -out.bits);
    };

    const Vector ratios = s.ratios();
    std::map<std::int64_t, std::size_t, std::greater<>> index_of_level;
    const auto r = static_cast<std::size_t>(s.rank());
    std::vector<std::int64_t> levels(r);
    for (std::size_t i = 0; i < r; ++i) {
        levels[i] = static_cast<std::int64_t>(
            std::llround(std::ldexp(s.sigmas(static_cast<Eigen::Index>(i)) / scale, out.bits)));
        index_of_level.emplace(levels[i], 0);
    }
    std::size_t b = 0;
    for (auto& [level, idx] : index_of_level) {
        idx = b++;
        SpectrumBucket bucket;
        bucket.level = level;
        bucket.value = value_of(level);
        out.buckets.push_back(std::move(bucket));
    }
    out.sigma_hat.resize(r);
    out.bucket_of.resize(r);
    out.ratios.assign(ratios.begin(), ratios.end());
    for (std::size_t i = 0; i < r; ++i) {
        const std::size_t bi = index_of_level.at(levels[i]);
        auto& bucket = out.buckets[bi];
        bucket.members.push_back(static_cast<Eigen::Index>(i));
        bucket.mass += ratios(static_cast<Eigen::Index>(i));
        out.sigma_hat[i] = bucket.value;
        out.bucket_of[i] = bi;
    }
    return out;
}

/// Noise-free estimation: one bucket per degeneracy group, carrying the
/// group's largest singular value. Resolution and bits are reported as 0.
inline RoundedSpectrum exact_spectrum(const SvdModel& s) {
    RoundedSpectrum out;
    const Vector ratios = s.ratios();
    const auto r = static_cast<std::size_t>(s.rank());
    out.sigma_hat.resize(r);
    out.bucket_of.resize(r);
    out.ratios.assign(ratios.begin(), ratios.end());
    for (std::size_t i = 0; i < r; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        if (i == 0 || s.groups[i] != s.groups[i - 1]) {
            SpectrumBucket b;
            b.value = s.sigmas(ii);
            b.level = static_cast<std::int64_t>(out.buckets.size());
            out.buckets.push_back(std::move(b));
        }
        auto& b = out.buckets.back();
        b.members.push_back(ii);
        b.mass += ratios(ii);
        out.sigma_hat[i] = b.value;
        out.bucket_of[i] = out.buckets.size() - 1;
    }
    return out;
}

enum class EstimateMode { exact, noisy };

/// Exact mode returns sigma_max; noisy mode adds a uniform error in
/// [-eps ||A||_F, eps ||A||_F].
inline double estimate_spectral_norm(const DataMatrix& m, double eps, EstimateMode mode,
                                     std::uint64_t seed) {
    if (!m.values().allFinite()) throw NumericError("estimate_spectral_norm: non-finite entries");
    const double smax = largest_singular_value(m.values());
    if (mode == EstimateMode::exact) return smax;
    if (!(eps > 0.0)) throw PreconditionError("estimate_spectral_norm: eps must be > 0 in noisy mode");
    Rng rng(seed);
    const double half = eps * m.frobenius();
    return smax + rng.uniform(-half, half);
}

/// Writes sigmas.csv, U.csv, V.csv and meta.json under `dir`.
inline void export_svd_model(const SvdModel& s, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_matrix_csv(dir / "sigmas.csv", Eigen::MatrixXd(s.sigmas));
    write_matrix_csv(dir / "U.csv", s.U);
    write_matrix_csv(dir / "V.csv", s.V);
    nlohmann::ordered_json meta;
    meta["rank"] = s.rank();
    meta["rows"] = s.rows();
    meta["cols"] = s.cols();
    meta["rank_tol"] = s.rank_tol;
    meta["frobenius"] = s.frobenius;
    meta["sigma_max"] = s.sigma_max();
    meta["provenance"] = {{"row_mean_centered", s.provenance.row_mean_centered},
                          {"spectral_normalized", s.provenance.spectral_normalized}};
    CsvWriter::write_text(dir / "meta.json", meta.dump(2) + "\n");
}

}  // namespace qsvd

#endif  // QSVD_SVD_ORACLE_HPP
