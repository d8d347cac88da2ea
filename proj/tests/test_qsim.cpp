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

#include <gtest/gtest.h>

#include "qsvd/qsim.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace qsvd;

namespace {

SvdModel diag43() { return compute_svd(DataMatrix(synth::diag_matrix({4, 3}))); }

Vector random_spectrum(Rng& rng, Eigen::Index r, double lo = 0.01, double hi = 1.0) {
    Vector s(r);
    for (auto& x : s) x = rng.uniform(lo, hi);
    std::sort(s.begin(), s.end(), std::greater<>());
    return s;
}

}  // namespace

TEST(SampleSize, WaldAndTomography) {
    EXPECT_EQ(wald_sample_size(0.0316, 2.0), 1002u);
    EXPECT_EQ(wald_sample_size(0.5, 1.0), 1u);
    EXPECT_EQ(tomography_sample_size(0.0316, 784), 240265u);
    EXPECT_THROW(wald_sample_size(0.0), PreconditionError);
}

TEST(SampleFactorScores, DiagonalConvergence) {
    const auto sample = sample_factor_scores(diag43(), 0.001, 0.0, 1000000, 12);
    ASSERT_EQ(sample.draws.size(), 2u);
    EXPECT_NEAR(sample.draws[0].wald_ratio, 0.64, 0.002);
    EXPECT_NEAR(sample.draws[1].wald_ratio, 0.36, 0.002);
    EXPECT_EQ(sample.total_count(), 1000000u);
    EXPECT_EQ(sample.draws[0].sigma_hat, 4.0);
}

TEST(SampleFactorScores, RankOneSingleBucket) {
    Vector u(4), v(3);
    u << 1, 2, 0, 1;
    v << 1, 0, 1;
    const auto s = compute_svd(DataMatrix(Matrix(u * v.transpose())));
    for (std::uint64_t N : {1u, 17u, 1000u}) {
        const auto sample = sample_factor_scores(s, 0.1, 0.01, N, N);
        ASSERT_EQ(sample.draws.size(), 1u);
        EXPECT_EQ(sample.draws[0].wald_ratio, 1.0);
    }
}

TEST(SampleFactorScores, Deterministic) {
    Rng rng(1);
    const auto s = synth::model_from_spectrum(random_spectrum(rng, 20));
    const auto a = sample_factor_scores(s, 0.03, 0.01, 1002, 99);
    const auto b = sample_factor_scores(s, 0.03, 0.01, 1002, 99);
    ASSERT_EQ(a.draws.size(), b.draws.size());
    for (std::size_t i = 0; i < a.draws.size(); ++i) EXPECT_EQ(a.draws[i].count, b.draws[i].count);
}

TEST(SampleFactorScores, WaldCoverage) {
    Vector sig(6);
    sig << 1.0, 0.9, 0.8, 0.6, 0.5, 0.3;
    const auto s = synth::model_from_spectrum(sig);
    const double gamma = 0.0316;
    const auto N = wald_sample_size(gamma);
    const auto spectrum = exact_spectrum(s);
    std::vector<int> covered(spectrum.buckets.size(), 0);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto sample = sample_factor_scores(s, gamma, 0.0, N, seed);
        std::vector<double> est(spectrum.buckets.size(), 0.0);
        for (const auto& d : sample.draws) est[d.bucket] = d.wald_ratio;
        for (std::size_t b = 0; b < est.size(); ++b)
            if (std::abs(est[b] - spectrum.buckets[b].mass) <= gamma) ++covered[b];
    }
    for (std::size_t b = 0; b < covered.size(); ++b) EXPECT_GE(covered[b], 95) << "bucket " << b;
}

TEST(SampleFactorScores, FactorScoreErrorBound) {
    Rng rng(5);
    for (int t = 0; t < 100; ++t) {
        const auto s = synth::model_from_spectrum(random_spectrum(rng, 15));
        const double eps = rng.uniform(1e-4, 0.1);
        const auto sample = sample_factor_scores(s, 0.05, eps, 200, t);
        const double fro = s.frobenius;
        for (Eigen::Index i = 0; i < s.rank(); ++i) {
            const double sh = sample.spectrum.sigma_hat[static_cast<std::size_t>(i)];
            const double lam = s.sigmas(i) * s.sigmas(i);
            EXPECT_LE(std::abs(sh * sh - lam), 2.0 * eps * std::sqrt(lam) + eps * eps + 1e-15);
            EXPECT_LE(std::abs(sh * sh - lam) / (fro * fro), (2.0 * eps * s.sigmas(i) + eps * eps) / (fro * fro) + 1e-15);
        }
    }
}

TEST(SelectK, FirstBucketSuffices) {
    SpectralSample sample = sample_factor_scores(diag43(), 0.01, 0.0, 100, 1);
    sample.draws[0].count = 64;
    sample.draws[1].count = 36;
    const auto sel = select_k_for_variance(sample, 0.6);
    EXPECT_EQ(sel.k, 1u);
    EXPECT_DOUBLE_EQ(sel.p_est, 0.64);
    EXPECT_GT(sel.theta, 3.0);
    EXPECT_LT(sel.theta, 4.0);
    const auto all = select_k_for_variance(sample, 1.0);
    EXPECT_EQ(all.k, 2u);
    EXPECT_EQ(all.buckets_used, 2u);
}

TEST(SelectK, UnreachableTarget) {
    SpectralSample sample = sample_factor_scores(diag43(), 0.01, 0.0, 100, 1);
    sample.draws.pop_back();
    sample.draws[0].count = 64;
    EXPECT_THROW(select_k_for_variance(sample, 0.9), UnreachableTargetError);
}

TEST(CheckSum, Examples) {
    const auto s = diag43();
    EXPECT_DOUBLE_EQ(check_fsr_sum(s, 3.5, 0.0, 0.0, AmplitudeMode::exact, 0).estimate, 0.64);
    EXPECT_DOUBLE_EQ(check_fsr_sum(s, 3.5, 0.01, 0.0, AmplitudeMode::exact, 0).estimate, 0.64);
    for (auto mode : {AmplitudeMode::exact, AmplitudeMode::additive, AmplitudeMode::relative}) {
        const auto c = check_fsr_sum(s, 0.0, 0.01, 0.05, mode, 3);
        EXPECT_DOUBLE_EQ(c.exact, 1.0);
        EXPECT_LE(c.estimate, 1.0);
    }
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const double v = check_fsr_sum(s, 3.5, 0.01, 0.05, AmplitudeMode::relative, seed).estimate;
        EXPECT_GE(v, 0.608 - 1e-15);
        EXPECT_LE(v, 0.672 + 1e-15);
    }
    const auto none = check_fsr_sum(s, 5.0, 0.01, 0.05, AmplitudeMode::relative, 0);
    EXPECT_TRUE(none.undefined_relative);
    EXPECT_EQ(none.estimate, 0.0);
}

TEST(BinarySearch, DiagonalExactProbes) {
    const auto s = diag43();
    const auto r = binary_search_threshold(s, 0.64, 0.01, 0.05, 0, AmplitudeMode::exact, 5.0);
    ASSERT_TRUE(r.theta.has_value());
    EXPECT_GT(*r.theta, 3.0);
    EXPECT_LE(*r.theta, 4.0);
    EXPECT_LE(r.iterations, 9);
}

TEST(BinarySearch, EarlyExitAndNone) {
    const auto s = diag43();
    const auto full = binary_search_threshold(s, 1.0, 0.01, 0.1, 0);
    ASSERT_TRUE(full.theta.has_value());
    EXPECT_EQ(*full.theta, 0.0);
    EXPECT_TRUE(full.probes.empty());
    EXPECT_TRUE(full.early_exit);

    const auto none = binary_search_threshold(s, 0.5, 0.01, 0.01, 0, AmplitudeMode::exact, 5.0);
    EXPECT_FALSE(none.theta.has_value());
    const auto noisy = binary_search_threshold(s, 0.5, 0.01, 0.01, 0, AmplitudeMode::additive, 5.0);
    EXPECT_FALSE(noisy.theta.has_value());
}

TEST(BinarySearch, ContractOnRandomSpectra) {
    Rng rng(2024);
    for (int t = 0; t < 200; ++t) {
        const auto r = static_cast<Eigen::Index>(1 + rng.below(12));
        const auto s = synth::model_from_spectrum(random_spectrum(rng, r));
        const double eps = rng.uniform(0.002, 0.1);
        const double eta = rng.uniform(0.005, 0.08);
        const double p = rng.uniform(0.0, 1.0);
        const double mu = s.frobenius;
        for (auto mode : {AmplitudeMode::exact, AmplitudeMode::additive}) {
            const auto res = binary_search_threshold(s, p, eps, eta, t, mode);
            EXPECT_LE(res.iterations, static_cast<int>(std::ceil(std::log2(mu / eps))));
            if (res.theta) {
                const int b = oracle::grid_bits(eps, mu);
                std::vector<double> sig(s.sigmas.begin(), s.sigmas.end()), hat;
                for (double x : sig) hat.push_back(oracle::round_to_grid(x, mu, b));
                const double mass = oracle::ratio_mass(sig, hat, oracle::total_variance(sig), *res.theta);
                EXPECT_LE(std::abs(p - mass), eta + 1e-12);
            }
            if (mode == AmplitudeMode::exact) {
                const auto o = oracle::enumerate_thresholds(std::vector<double>(s.sigmas.begin(), s.sigmas.end()), mu, eps, p, eta);
                EXPECT_EQ(res.theta.has_value(), o.achievable) << "trial " << t;
            }
        }
    }
}

TEST(CountRetained, Examples) {
    const auto s = diag43();
    EXPECT_EQ(count_retained(s, 3.5, 0.01, CountMode::exact, 0.0, 0).estimate, 1u);
    EXPECT_EQ(count_retained(s, 0.0, 0.01, CountMode::exact, 0.0, 0).estimate, 2u);
    const auto none = count_retained(s, 5.0, 0.01, CountMode::relative, 0.1, 0);
    EXPECT_TRUE(none.undefined_relative);
    EXPECT_EQ(none.estimate, 0u);
}

TEST(CountRetained, ExactMatchesBruteForceOnGrid) {
    Rng rng(8);
    for (int t = 0; t < 10; ++t) {
        const auto s = synth::model_from_spectrum(random_spectrum(rng, 40));
        for (double eps : {0.0, 0.01}) {
            const auto spectrum = SveConfig{}.round(s, eps);
            for (int g = 0; g <= 1000; ++g) {
                const double theta = 1.05 * g / 1000.0;
                const auto c = count_retained(s, theta, eps, CountMode::exact, 0.0, 0);
                ASSERT_EQ(c.estimate, oracle::count_at_or_above(spectrum.sigma_hat, theta));
                if (eps == 0.0) {
                    ASSERT_EQ(c.estimate, oracle::count_at_or_above(std::vector<double>(s.sigmas.begin(), s.sigmas.end()), theta));
                }
            }
        }
    }
}

TEST(CountRetained, RelativeWithinEta) {
    Rng rng(9);
    for (int t = 0; t < 200; ++t) {
        const auto s = synth::model_from_spectrum(random_spectrum(rng, 50));
        const double eta = rng.uniform(0.01, 0.3);
        const auto c = count_retained(s, rng.uniform(0.0, 0.9), 0.01, CountMode::relative, eta, t);
        if (c.exact == 0) continue;
        EXPECT_LE(std::abs(static_cast<double>(c.estimate) - static_cast<double>(c.exact)),
                  eta * static_cast<double>(c.exact) + 1e-9);
    }
}

TEST(ExtractTopk, DiagonalExactRegime) {
    const auto s = diag43();
    const auto ex = extract_topk(s, 3.5, 1e-6, 1e-6, Side::both, TomographyNorm::l2, 1);
    ASSERT_EQ(ex.k, 1u);
    EXPECT_NEAR(ex.U_hat(0, 0), 1.0, 1e-6);
    EXPECT_NEAR(ex.V_hat(0, 0), 1.0, 1e-6);
    EXPECT_NEAR(ex.sigma_hats(0), 4.0, 1e-6);
}

TEST(ExtractTopk, BothSidesWithinDelta) {
    const auto s = diag43();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto ex = extract_topk(s, 1.0, 0.01, 0.1, Side::both, TomographyNorm::l2, seed);
        ASSERT_EQ(ex.k, 2u);
        for (Eigen::Index j = 0; j < 2; ++j) {
            EXPECT_LE((s.U.col(j) - ex.U_hat.col(j)).norm(), 0.1 + 1e-15);
            EXPECT_LE((s.V.col(j) - ex.V_hat.col(j)).norm(), 0.1 + 1e-15);
        }
        EXPECT_GT(ex.measurements_used, 0u);
    }
    EXPECT_THROW(extract_topk(s, 5.0, 0.01, 0.1, Side::both, TomographyNorm::l2, 0), EmptyRetentionError);
}

TEST(ExtractTopk, NoiseFreeEqualsOracle) {
    const DataMatrix a(synth::gaussian_matrix(12, 7, 3));
    const auto s = compute_svd(a);
    const auto ex = extract_topk(s, s.sigmas(3), 0.0, 0.0, Side::both, TomographyNorm::l2, 1);
    ASSERT_EQ(ex.k, 4u);
    EXPECT_EQ(ex.U_hat, s.U.leftCols(4));
    EXPECT_EQ(ex.V_hat, s.V.leftCols(4));
    EXPECT_EQ(ex.measurements_used, 0u);
}

TEST(ExtractTopk, MeasurementDistributionNearUniform) {
    Rng rng(31);
    for (int t = 0; t < 100; ++t) {
        const auto s = synth::model_from_spectrum(random_spectrum(rng, 20, 0.2, 1.0));
        const double theta = rng.uniform(0.2, 0.6);
        const double eps = rng.uniform(0.001, theta / 10.0);
        const auto spectrum = SveConfig{}.round(s, eps);
        const auto idx = retained_indices(spectrum, theta);
        if (idx.empty()) continue;
        const Vector q = extraction_distribution(s, spectrum, idx);
        const double k = static_cast<double>(idx.size());
        const double tv = 0.5 * (q.array() - 1.0 / k).abs().sum();
        EXPECT_LE(tv, 2.0 * eps / theta);
        EXPECT_NEAR(q.sum(), 1.0, 1e-12);
    }
}

TEST(Coupon, SingleCoupon) {
    Vector sig(1);
    sig << 1.0;
    const auto c = coupon_collector_trials(synth::model_from_spectrum(sig), 0.5, 0.01, 100, 0);
    EXPECT_EQ(c.k, 1u);
    EXPECT_EQ(c.mean, 1.0);
    EXPECT_EQ(c.std, 0.0);
}

TEST(Coupon, UniformTenMatchesHarmonic) {
    const auto s = synth::model_from_spectrum(Vector::Constant(10, 0.5));
    const auto c = coupon_collector_trials(s, 0.25, 0.0, 10000, 42);
    EXPECT_EQ(c.k, 10u);
    const double expected = 10.0 * oracle::harmonic(10);
    EXPECT_NEAR(expected, 29.2897, 1e-4);
    EXPECT_NEAR(c.mean, expected, 0.1 * expected);
    EXPECT_NEAR(coupon_benchmark(59), 274.795, 1e-3);
}

TEST(Coupon, BatchedCollectionMatchesDrawByDraw) {
    // Large shot counts go through the multinomial batches; the mean must
    // agree with the draw-by-draw process (computed here without batching).
    const std::vector<double> q = {0.5, 0.3, 0.2};
    const std::uint64_t shots = 40;
    double batched = 0.0, naive = 0.0;
    const int trials = 3000;
    for (int t = 0; t < trials; ++t) {
        Rng a(static_cast<std::uint64_t>(t));
        batched += static_cast<double>(detail::collect_coupons(q, shots, a));
        Rng b(static_cast<std::uint64_t>(t) + 1000000);
        std::vector<std::uint64_t> seen(3, 0);
        std::uint64_t draws = 0;
        while (seen[0] < shots || seen[1] < shots || seen[2] < shots) {
            const double u = b.uniform();
            ++seen[u < 0.5 ? 0 : (u < 0.8 ? 1 : 2)];
            ++draws;
        }
        naive += static_cast<double>(draws);
    }
    batched /= trials;
    naive /= trials;
    EXPECT_NEAR(batched, naive, 0.01 * naive);
}
