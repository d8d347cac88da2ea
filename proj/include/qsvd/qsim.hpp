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

#ifndef QSVD_QSIM_HPP
#define QSVD_QSIM_HPP

// Classical simulators of the quantum SVD subroutines. Each routine consumes
// the exact oracle (SvdModel), reproduces the measurement statistics of the
// quantum procedure with a seeded generator, and records the cost expression
// with its parameters substituted.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "qsvd/cost.hpp"
#include "qsvd/errors.hpp"
#include "qsvd/noise.hpp"
#include "qsvd/random.hpp"
#include "qsvd/svd_oracle.hpp"

namespace qsvd {

/// How the singular value estimation grid is scaled, plus the mu(A) used in
/// the cost expressions. mu <= 0 means "use ||A||_F from the oracle".
/// eps == 0 selects the noise-free spectrum.
struct SveConfig {
    SveScale scale = SveScale::absolute;
    double mu = 0.0;

    double resolved_mu(const SvdModel& s) const { return mu > 0.0 ? mu : s.frobenius; }
    RoundedSpectrum round(const SvdModel& s, double eps) const {
        if (eps == 0.0) return exact_spectrum(s);
        return sve_round(s, eps, scale, resolved_mu(s));
    }
};

// ---------------------------------------------------------------------------
// Sampling helpers

namespace detail {

/// Multinomial counts by sequential conditional binomials.
inline std::vector<std::uint64_t> multinomial(std::uint64_t n, std::span<const double> probs,
                                              Rng& rng) {
    std::vector<std::uint64_t> counts(probs.size(), 0);
    double rest = 0.0;
    for (double p : probs) rest += p;
    for (std::size_t i = 0; i < probs.size() && n > 0; ++i) {
        if (i + 1 == probs.size() || rest <= 0.0) {
            counts[i] = n;
            break;
        }
        const double p = std::clamp(probs[i] / rest, 0.0, 1.0);
        counts[i] = rng.binomial(n, p);
        n -= counts[i];
        rest -= probs[i];
    }
    return counts;
}

class CategoricalSampler {
public:
    explicit CategoricalSampler(std::span<const double> probs) : cdf_(probs.size()) {
        double acc = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) cdf_[i] = acc += probs[i];
        for (auto& c : cdf_) c /= acc;
        cdf_.back() = 1.0;
    }

    std::size_t operator()(Rng& rng) const {
        const double u = rng.uniform();
        return static_cast<std::size_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
    }

private:
    std::vector<double> cdf_;
};

/// Number of i.i.d. draws from `q` until every category has been seen at
/// least `shots` times. Draws are batched: while the outstanding deficit is
/// large, a multinomial batch of exactly that size is drawn, which cannot
/// complete the collection before its last draw, so the returned stopping time
/// has the same law as the draw-by-draw process.
inline std::uint64_t collect_coupons(std::span<const double> q, std::uint64_t shots, Rng& rng) {
    std::vector<std::uint64_t> seen(q.size(), 0);
    std::uint64_t total = 0;
    const CategoricalSampler draw(q);
    while (true) {
        std::uint64_t deficit = 0;
        for (auto c : seen) deficit += c < shots ? shots - c : 0;
        if (deficit == 0) return total;
        if (deficit > 64) {
            const auto batch = multinomial(deficit, q, rng);
            for (std::size_t i = 0; i < q.size(); ++i) seen[i] += batch[i];
            total += deficit;
        } else {
            ++seen[draw(rng)];
            ++total;
        }
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Factor score ratio estimation

/// Number of measurements for Wald intervals of half-width gamma at
/// confidence z: ceil(z^2 / (4 gamma^2)).
inline std::uint64_t wald_sample_size(double gamma, double z = 2.0) {
    if (!(gamma > 0.0) || !(z > 0.0)) throw PreconditionError("wald_sample_size: gamma, z must be > 0");
    return static_cast<std::uint64_t>(std::ceil(z * z / (4.0 * gamma * gamma)));
}

/// The l_inf-tomography prescription ceil(36 ln(r) / gamma^2).
inline std::uint64_t tomography_sample_size(double gamma, std::size_t rank) {
    if (!(gamma > 0.0) || rank == 0) throw PreconditionError("tomography_sample_size: gamma > 0, r >= 1");
    return static_cast<std::uint64_t>(
        std::ceil(36.0 * std::log(static_cast<double>(rank)) / (gamma * gamma)));
}

/// Per-bucket statistics of a factor-score sample.
struct BucketEstimate {
    double sigma_hat = 0.0;
    std::uint64_t count = 0;       // zeta
    double wald_ratio = 0.0;       // zeta / N
    double factor_score = 0.0;     // sigma_hat^2
    double sigma_ratio = 0.0;      // sigma_hat^2 / sum_j sigma_j^2
    std::size_t multiplicity = 0;  // oracle indices in the bucket
    std::size_t bucket = 0;        // index into spectrum.buckets
    bool reported = false;         // wald_ratio > gamma
};

struct SpectralSample {
    std::vector<BucketEstimate> draws;  // observed buckets, descending sigma_hat
    std::uint64_t N = 0;
    double gamma = 0.0;
    double epsilon = 0.0;
    RoundedSpectrum spectrum;
    double total_variance = 0.0;
    CostLedger cost;

    std::uint64_t total_count() const {
        std::uint64_t t = 0;
        for (const auto& d : draws) t += d.count;
        return t;
    }
};

inline SpectralSample sample_factor_scores(const SvdModel& s, double gamma, double eps,
                                           std::uint64_t N, std::uint64_t seed,
                                           SveConfig sve = {}) {
    if (N < 1) throw PreconditionError("sample_factor_scores: N must be >= 1");
    if (!(gamma > 0.0)) throw PreconditionError("sample_factor_scores: gamma must be > 0");
    if (s.rank() == 0) throw EmptyRetentionError("sample_factor_scores: matrix has rank 0");

    SpectralSample out;
    out.N = N;
    out.gamma = gamma;
    out.epsilon = eps;
    out.spectrum = sve.round(s, eps);
    out.total_variance = s.total_variance();

    std::vector<double> masses;
    for (const auto& b : out.spectrum.buckets) masses.push_back(b.mass);
    Rng rng(seed);
    const auto counts = detail::multinomial(N, masses, rng);
    for (std::size_t b = 0; b < counts.size(); ++b) {
        if (counts[b] == 0) continue;
        const auto& bucket = out.spectrum.buckets[b];
        BucketEstimate e;
        e.sigma_hat = bucket.value;
        e.count = counts[b];
        e.wald_ratio = static_cast<double>(counts[b]) / static_cast<double>(N);
        e.factor_score = bucket.value * bucket.value;
        e.sigma_ratio = e.factor_score / out.total_variance;
        e.multiplicity = bucket.members.size();
        e.bucket = b;
        e.reported = e.wald_ratio > gamma;
        out.draws.push_back(e);
    }
    const double mu = sve.resolved_mu(s);
    out.cost.add({"factor_score_estimation", "(1/gamma^2)(mu/eps)",
                  sub({{"gamma", gamma}, {"mu", mu}, {"eps", eps}}), mu / (gamma * gamma * eps)});
    return out;
}

enum class ThetaPlacement {
    midpoint,       // halfway between the last retained and the next bucket
    last_retained,  // the least retained singular value itself
};

struct VarianceSelection {
    std::size_t k = 0;            // oracle indices with sigma_hat >= last included
    std::size_t buckets_used = 0; // observed buckets accumulated
    double p_est = 0.0;           // accumulated Wald mass
    double theta = 0.0;
    double last_sigma_hat = 0.0;
};

/// Accumulates the estimated ratios of the observed buckets, largest singular
/// value first, until they reach p_target.
inline VarianceSelection select_k_for_variance(const SpectralSample& sample, double p_target,
                                               ThetaPlacement placement = ThetaPlacement::midpoint) {
    if (!(p_target > 0.0 && p_target <= 1.0))
        throw PreconditionError("select_k_for_variance: p_target must be in (0, 1]");
    const double need = p_target * static_cast<double>(sample.N);
    std::uint64_t acc = 0;
    VarianceSelection out;
    bool reached = false;
    for (const auto& d : sample.draws) {
        acc += d.count;
        ++out.buckets_used;
        out.last_sigma_hat = d.sigma_hat;
        if (static_cast<double>(acc) >= need * (1.0 - 1e-12)) {
            reached = true;
            break;
        }
    }
    if (!reached)
        throw UnreachableTargetError("select_k_for_variance: estimated mass " +
                                     format_double(static_cast<double>(acc) / sample.N) +
                                     " < target " + format_double(p_target));
    out.p_est = static_cast<double>(acc) / static_cast<double>(sample.N);
    out.k = sample.spectrum.count_at_or_above(out.last_sigma_hat);

    const auto& buckets = sample.spectrum.buckets;
    auto below = std::find_if(buckets.begin(), buckets.end(),
                              [&](const SpectrumBucket& b) { return b.value < out.last_sigma_hat; });
    if (placement == ThetaPlacement::last_retained) {
        out.theta = out.last_sigma_hat;
    } else if (below != buckets.end()) {
        out.theta = 0.5 * (out.last_sigma_hat + below->value);
    } else {
        out.theta = out.last_sigma_hat - sample.epsilon;
    }
    return out;
}

// ---------------------------------------------------------------------------
// check on the factor score ratios' sum

struct SumCheck {
    double estimate = 0.0;
    double exact = 0.0;  // sum of ratios with sigma_hat >= theta
    bool undefined_relative = false;
    CostLedger cost;
};

inline SumCheck check_fsr_sum(const SvdModel& s, double theta, double eps, double eta,
                              AmplitudeMode mode, std::uint64_t seed, SveConfig sve = {}) {
    if (theta < 0.0) throw PreconditionError("check_fsr_sum: theta must be >= 0");
    if (mode != AmplitudeMode::exact && !(eta > 0.0))
        throw PreconditionError("check_fsr_sum: eta must be > 0");
    const auto spectrum = sve.round(s, eps);
    SumCheck out;
    out.exact = spectrum.mass_at_or_above(theta);
    if (out.exact == 0.0 && mode == AmplitudeMode::relative) {
        out.undefined_relative = true;
        out.estimate = 0.0;
    } else {
        out.estimate = amplitude_estimate(out.exact, eta, mode, seed);
    }
    const double mu = sve.resolved_mu(s);
    const double e = mode == AmplitudeMode::exact ? 1.0 : eta;
    out.cost.add({"fsr_sum_check", "mu/(eps*eta*sqrt(p))",
                  sub({{"mu", mu}, {"eps", eps}, {"eta", e}, {"p", out.exact}}),
                  out.exact > 0.0 ? mu / (eps * e * std::sqrt(out.exact))
                                  : std::numeric_limits<double>::infinity()});
    return out;
}

// ---------------------------------------------------------------------------
// binary search for the singular value threshold

struct ThresholdProbe {
    double tau = 0.0;
    double exact = 0.0;
    double estimate = 0.0;
};

struct ThresholdSearch {
    std::optional<double> theta;  // none when no threshold achieves the target
    int iterations = 0;
    int max_iterations = 0;
    bool early_exit = false;
    std::vector<ThresholdProbe> probes;
    CostLedger cost;
};

/// Bisection on tau in [0, 1] with theta = tau * mu. The singular values are
/// estimated at resolution eps on the mu-scaled grid, so at most
/// ceil(log2(mu / eps)) updates of tau are possible. Each probe estimates
/// p_tau with additive error eta / 2 (or exactly with AmplitudeMode::exact).
inline ThresholdSearch binary_search_threshold(const SvdModel& s, double p_target, double eps,
                                               double eta, std::uint64_t seed,
                                               AmplitudeMode probe_mode = AmplitudeMode::additive,
                                               double mu = 0.0) {
    if (!(p_target >= 0.0 && p_target <= 1.0))
        throw PreconditionError("binary_search_threshold: p_target must be in [0, 1]");
    if (!(eta > 0.0)) throw PreconditionError("binary_search_threshold: eta must be > 0");
    const double scale = mu > 0.0 ? mu : s.frobenius;
    if (!(eps < scale)) throw PreconditionError("binary_search_threshold: eps must be < mu");

    ThresholdSearch out;
    const auto spectrum = sve_round(s, eps, SveScale::relative_to_mu, scale);
    out.max_iterations = spectrum.bits;
    out.cost.add({"threshold_binary_search", "mu*log2(mu/eps)/(eps*eta)",
                  sub({{"mu", scale}, {"eps", eps}, {"eta", eta}}),
                  scale * std::log2(scale / eps) / (eps * eta)});

    if (std::abs(1.0 - p_target) <= eta) {
        out.theta = 0.0;
        out.early_exit = true;
        return out;
    }
    if (std::abs(0.0 - p_target) <= eta) {
        // above every estimate; a rank-one spectrum rounds sigma_1 to mu itself
        const double top = spectrum.buckets.empty() ? 0.0 : spectrum.buckets.front().value;
        out.theta = top < scale ? scale : top + spectrum.step();
        out.early_exit = true;
        return out;
    }

    const SeedStream seeds(seed);
    double lo = 0.0, hi = 1.0;
    double tau = 0.5 * (lo + hi);
    for (int it = 0; it < out.max_iterations; ++it) {
        ++out.iterations;
        const double theta = tau * scale;
        ThresholdProbe probe;
        probe.tau = tau;
        probe.exact = spectrum.mass_at_or_above(theta);
        probe.estimate = probe_mode == AmplitudeMode::exact
                             ? probe.exact
                             : amplitude_estimate(probe.exact, eta / 2.0, AmplitudeMode::additive,
                                                  seeds.child("probe", static_cast<std::uint64_t>(it)));
        out.probes.push_back(probe);
        if (std::abs(probe.estimate - p_target) <= eta / 2.0) {
            out.theta = theta;
            return out;
        }
        (probe.estimate < p_target ? hi : lo) = tau;
        tau = 0.5 * (hi + lo);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reduced rank estimation (counting)

enum class CountMode { exact, relative };

struct RetainedCount {
    std::size_t estimate = 0;
    std::size_t exact = 0;
    bool undefined_relative = false;
    CostLedger cost;
};

inline RetainedCount count_retained(const SvdModel& s, double theta, double eps, CountMode mode,
                                    double eta, std::uint64_t seed, SveConfig sve = {}) {
    if (theta < 0.0) throw PreconditionError("count_retained: theta must be >= 0");
    const auto spectrum = sve.round(s, eps);
    const double mu = sve.resolved_mu(s);
    const auto r = static_cast<double>(s.rank());
    RetainedCount out;
    out.exact = spectrum.count_at_or_above(theta);
    const auto k = static_cast<double>(out.exact);
    if (mode == CountMode::exact) {
        out.estimate = out.exact;
        out.cost.add({"reduced_rank_exact", "(mu/eps)*sqrt((k+1)(r-k+1))",
                      sub({{"mu", mu}, {"eps", eps}, {"k", k}, {"r", r}}),
                      mu / eps * std::sqrt((k + 1.0) * (r - k + 1.0))});
        return out;
    }
    if (!(eta > 0.0)) throw PreconditionError("count_retained: eta must be > 0 in relative mode");
    out.cost.add({"reduced_rank_relative", "(mu/(eps*eta))*sqrt(r/k)",
                  sub({{"mu", mu}, {"eps", eps}, {"eta", eta}, {"k", k}, {"r", r}}),
                  k > 0 ? mu / (eps * eta) * std::sqrt(r / k) : std::numeric_limits<double>::infinity()});
    if (out.exact == 0) {
        out.undefined_relative = true;
        return out;
    }
    // Estimate k/r as an amplitude to relative error eta, then round towards
    // the true count so |k_hat - k| <= eta k survives the rounding.
    const double frac = amplitude_estimate(k / r, eta, AmplitudeMode::relative, seed);
    const double khat = frac * r;
    const double lo = std::ceil(k * (1.0 - eta) - 1e-9);
    const double hi = std::floor(k * (1.0 + eta) + 1e-9);
    double rounded = khat >= k ? std::floor(khat + 1e-9) : std::ceil(khat - 1e-9);
    rounded = std::clamp(rounded, std::max(lo, 0.0), hi);
    out.estimate = static_cast<std::size_t>(rounded);
    return out;
}

// ---------------------------------------------------------------------------
// top-k singular vectors extraction

enum class Side { left, right, both };

struct ExtractionOptions {
    /// Tomography shot constant c in T = c z ln z / delta^2 (l2) or
    /// T = c ln z / delta^2 (linf).
    double shot_constant = 36.0;
    SveConfig sve{};
    NoiseShape shape = NoiseShape::random;
};

struct ExtractionResult {
    std::size_t k = 0;
    std::vector<Eigen::Index> indices;  // oracle indices, descending sigma_hat
    Vector sigma_hats;
    Vector factor_scores;  // sigma_hat^2
    Vector ratios;         // sigma_hat^2 / sum_j sigma_j^2
    Eigen::MatrixXd U_hat; // n x k when the left side was requested
    Eigen::MatrixXd V_hat; // m x k when the right side was requested
    Vector measurement_distribution;  // q_i over retained indices
    std::uint64_t shots_per_vector = 0;
    std::uint64_t measurements_used = 0;
    NoiseSpec tomography;
    TomographyNorm norm = TomographyNorm::l2;
    Side side = Side::right;
    double theta = 0.0, epsilon = 0.0, delta = 0.0;
    double p_retained = 0.0;
    CostLedger cost;
};

inline std::uint64_t tomography_shots(Eigen::Index length, double delta, TomographyNorm norm,
                                      double c) {
    const double z = static_cast<double>(length);
    const double lz = std::log(std::max(z, 2.0));
    const double t = norm == TomographyNorm::l2 ? c * z * lz / (delta * delta) : c * lz / (delta * delta);
    if (!(t < 1e18)) throw PreconditionError("tomography shot budget overflows; delta too small");
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(t)));
}

/// Measurement distribution after the second amplification:
/// q_i proportional to sigma_i^2 / sigma_hat_i^2 over the retained indices.
inline Vector extraction_distribution(const SvdModel& s, const RoundedSpectrum& spectrum,
                                      const std::vector<Eigen::Index>& retained) {
    Vector q(static_cast<Eigen::Index>(retained.size()));
    for (std::size_t j = 0; j < retained.size(); ++j) {
        const auto i = retained[j];
        const double sh = spectrum.sigma_hat[static_cast<std::size_t>(i)];
        q(static_cast<Eigen::Index>(j)) = (s.sigmas(i) * s.sigmas(i)) / (sh * sh);
    }
    return q / q.sum();
}

inline std::vector<Eigen::Index> retained_indices(const RoundedSpectrum& spectrum, double theta) {
    std::vector<Eigen::Index> out;
    for (const auto& b : spectrum.buckets)
        if (b.value >= theta) out.insert(out.end(), b.members.begin(), b.members.end());
    std::sort(out.begin(), out.end());
    return out;
}

inline ExtractionResult extract_topk(const SvdModel& s, double theta, double eps, double delta,
                                     Side side, TomographyNorm norm, std::uint64_t seed,
                                     ExtractionOptions opts = {}) {
    if (!(theta > 0.0)) throw PreconditionError("extract_topk: theta must be > 0");
    if (!(delta >= 0.0 && delta < 1.0)) throw PreconditionError("extract_topk: delta must be in [0, 1)");
    if (s.rank() == 0) throw EmptyRetentionError("extract_topk: matrix has rank 0");
    const auto spectrum = opts.sve.round(s, eps);
    const auto retained = retained_indices(spectrum, theta);
    if (retained.empty())
        throw EmptyRetentionError("extract_topk: no estimated singular value >= theta = " +
                                  format_double(theta));

    ExtractionResult out;
    out.k = retained.size();
    out.indices = retained;
    out.theta = theta;
    out.epsilon = eps;
    out.delta = delta;
    out.side = side;
    out.norm = norm;
    out.tomography = {norm == TomographyNorm::l2 ? NoiseKind::tomography_l2 : NoiseKind::tomography_linf,
                      delta, seed};
    const auto k = static_cast<Eigen::Index>(out.k);
    out.sigma_hats.resize(k);
    const double tv = s.total_variance();
    const Vector ratios = s.ratios();
    for (Eigen::Index j = 0; j < k; ++j) {
        const auto i = retained[static_cast<std::size_t>(j)];
        out.sigma_hats(j) = spectrum.sigma_hat[static_cast<std::size_t>(i)];
        out.p_retained += ratios(i);
    }
    out.factor_scores = out.sigma_hats.array().square();
    out.ratios = out.factor_scores / tv;
    out.measurement_distribution = extraction_distribution(s, spectrum, retained);

    const bool left = side != Side::right;
    const bool right = side != Side::left;
    const SeedStream seeds(seed);
    // delta == 0 is the noise-free regime: exact vectors, no shot accounting.
    if (delta > 0.0) {
        out.shots_per_vector =
            (left ? tomography_shots(s.rows(), delta, norm, opts.shot_constant) : 0) +
            (right ? tomography_shots(s.cols(), delta, norm, opts.shot_constant) : 0);
        Rng rng(seeds.child("measure"));
        const std::vector<double> q(out.measurement_distribution.data(),
                                    out.measurement_distribution.data() + k);
        out.measurements_used = detail::collect_coupons(q, out.shots_per_vector, rng);
    }

    if (left) out.U_hat.resize(s.rows(), k);
    if (right) out.V_hat.resize(s.cols(), k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const auto i = retained[static_cast<std::size_t>(j)];
        if (left)
            out.U_hat.col(j) = tomography_noise(s.U.col(i), delta, norm,
                                                seeds.child("u", static_cast<std::uint64_t>(i)), opts.shape);
        if (right)
            out.V_hat.col(j) = tomography_noise(s.V.col(i), delta, norm,
                                                seeds.child("v", static_cast<std::uint64_t>(i)), opts.shape);
    }

    const double mu = opts.sve.resolved_mu(s);
    const double pre = s.sigma_max() / theta / std::sqrt(out.p_retained) * mu / eps;
    const double kd = static_cast<double>(out.k);
    auto add_side = [&](const char* routine, double z) {
        if (norm == TomographyNorm::l2) {
            out.cost.add({routine, "(||A||/theta)(1/sqrt(p))(mu/eps)(k*z/delta^2)",
                          sub({{"||A||", s.sigma_max()}, {"theta", theta}, {"p", out.p_retained},
                               {"mu", mu}, {"eps", eps}, {"k", kd}, {"z", z}, {"delta", delta}}),
                          pre * kd * z / (delta * delta)});
        } else {
            out.cost.add({routine, "(||A||/theta)(1/sqrt(p))(mu/eps)(k/delta^2)",
                          sub({{"||A||", s.sigma_max()}, {"theta", theta}, {"p", out.p_retained},
                               {"mu", mu}, {"eps", eps}, {"k", kd}, {"delta", delta}}),
                          pre * kd / (delta * delta)});
        }
    };
    if (left) add_side("topk_extraction_left", static_cast<double>(s.rows()));
    if (right) add_side("topk_extraction_right", static_cast<double>(s.cols()));
    return out;
}

struct CouponStats {
    std::size_t k = 0;
    double mean = 0.0;
    double std = 0.0;
    double benchmark = 0.0;  // k log_{2.4} k
};

inline double coupon_benchmark(std::size_t k) {
    if (k < 2) return 1.0;
    const auto kd = static_cast<double>(k);
    return kd * std::log(kd) / std::log(2.4);
}

/// Repeats "measure until every retained singular triple was seen once"
/// `trials` times under q_i proportional to sigma_i^2 / sigma_hat_i^2.
inline CouponStats coupon_collector_trials(const SvdModel& s, double theta, double eps,
                                           std::size_t trials, std::uint64_t seed,
                                           SveConfig sve = {}) {
    if (trials < 1) throw PreconditionError("coupon_collector_trials: trials must be >= 1");
    const auto spectrum = sve.round(s, eps);
    const auto retained = retained_indices(spectrum, theta);
    if (retained.empty())
        throw EmptyRetentionError("coupon_collector_trials: no estimated singular value >= theta");
    const Vector qv = extraction_distribution(s, spectrum, retained);
    const std::vector<double> q(qv.data(), qv.data() + qv.size());

    CouponStats out;
    out.k = retained.size();
    out.benchmark = coupon_benchmark(out.k);
    const SeedStream seeds(seed);
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng(seeds.child("trial", t));
        const auto draws = static_cast<double>(detail::collect_coupons(q, 1, rng));
        sum += draws;
        sumsq += draws * draws;
    }
    const auto n = static_cast<double>(trials);
    out.mean = sum / n;
    out.std = trials > 1 ? std::sqrt(std::max(0.0, (sumsq - n * out.mean * out.mean) / (n - 1.0))) : 0.0;
    return out;
}

}  // namespace qsvd

#endif  // QSVD_QSIM_HPP
