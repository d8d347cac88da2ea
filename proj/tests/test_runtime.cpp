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

#include <fstream>
#include <sstream>

#include "qsvd/bounds.hpp"
#include "qsvd/runtime.hpp"
#include "qsvd/svd_oracle.hpp"
#include "support/synthetic.hpp"

using namespace qsvd;

namespace {

RuntimeParams table_params() {
    RuntimeParams rp;
    rp.mu = 3.2032;
    rp.spectral = 1.0;
    rp.frobenius = 3.2032;
    rp.theta = 0.1564;
    rp.thresholding_eps = 0.0030;
    rp.p = 0.8580;
    rp.delta = 0.1124;
    rp.gamma = 0.0316;
    rp.k = 59;
    rp.n = 70000;
    rp.m = 784;
    return rp;
}

double row(const std::vector<CostRow>& rows, const std::string& name) {
    for (const auto& r : rows)
        if (r.routine == name) return r.value;
    ADD_FAILURE() << "missing row " << name;
    return 0.0;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST(ComputeMu, NeverAboveFrobenius) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const DataMatrix a(synth::gaussian_matrix(12, 7, seed));
        const auto r = compute_mu(a);
        EXPECT_LE(r.mu, a.frobenius());
        EXPECT_DOUBLE_EQ(r.frobenius, a.frobenius());
    }
}

TEST(ComputeMu, OrthonormalRowsBoundedBySqrtK) {
    for (Eigen::Index k : {1, 3, 5}) {
        const Eigen::MatrixXd vk = synth::random_orthonormal(8, k, static_cast<std::uint64_t>(k));
        Matrix padded = Matrix::Zero(8, 8);
        padded.topRows(k) = vk.transpose();
        EXPECT_LE(compute_mu(DataMatrix(padded)).mu, std::sqrt(static_cast<double>(k)) + 1e-12);
    }
}

TEST(ComputeMu, ScalarMatrix) {
    Matrix c(1, 1);
    c << -2.5;
    EXPECT_NEAR(compute_mu(DataMatrix(c)).mu, 2.5, 1e-12);
}

TEST(ComputeMu, GridValidation) {
    EXPECT_THROW(compute_mu(DataMatrix(Matrix::Ones(2, 2)), {}), PreconditionError);
    EXPECT_THROW(compute_mu(DataMatrix(Matrix::Ones(2, 2)), {1.5}), PreconditionError);
}

TEST(ThresholdingEps, Examples) {
    Vector s(2);
    s << 4, 3;
    EXPECT_EQ(thresholding_epsilon(s, 1, GapRule::half_gap).value, 0.5);
    EXPECT_EQ(thresholding_epsilon(s, 1, GapRule::full_gap).value, 1.0);
    EXPECT_EQ(thresholding_epsilon(s, 2, GapRule::half_gap).value, 1.5);
    s << 3, 3;
    const auto z = thresholding_epsilon(s, 1, GapRule::half_gap);
    EXPECT_EQ(z.value, 0.0);
    EXPECT_TRUE(z.zero_gap);
    EXPECT_FALSE(z.warning.empty());
}

TEST(ThresholdingEps, HalfGapNeverMergesBoundary) {
    Rng rng(17);
    for (int t = 0; t < 200; ++t) {
        Vector s(12);
        for (auto& x : s) x = rng.uniform(0.01, 1.0);
        std::sort(s.begin(), s.end(), std::greater<>());
        const auto model = synth::model_from_spectrum(s);
        const std::size_t k = 1 + rng.below(11);
        const auto e = thresholding_epsilon(s, k, GapRule::half_gap);
        if (e.zero_gap || !(e.value < 1.0)) continue;
        for (auto mode : {SveScale::absolute, SveScale::relative_to_mu}) {
            const double mu = mode == SveScale::absolute ? 1.0 : model.frobenius;
            if (!(e.value < mu)) continue;
            const auto r = sve_round(model, e.value, mode, mu);
            EXPECT_NE(r.bucket_of[k - 1], r.bucket_of[k]) << "trial " << t;
            EXPECT_EQ(r.count_at_or_above(r.sigma_hat[k - 1]), k);
        }
    }
}

TEST(EstimateDelta, InversionAndRoundTrip) {
    EXPECT_NEAR(estimate_delta(std::sqrt(4.0) * (0.01 + 0.1), 4, 0.01), 0.1, 1e-15);
    EXPECT_THROW(estimate_delta(0.0, 4, 0.01), InfeasibleBudgetError);
    Rng rng(2);
    for (int t = 0; t < 100; ++t) {
        const std::size_t k = 1 + rng.below(60);
        const double eps = rng.uniform(0.0, 0.01), xi = rng.uniform(0.1, 2.0);
        const double spectral = rng.uniform(0.5, 2.0);
        const double delta = estimate_delta(xi, k, eps, spectral);
        const auto b = bound_US(Vector::Constant(static_cast<Eigen::Index>(k), spectral), eps, delta, spectral);
        EXPECT_LE(b.loose, xi * (1.0 + 1e-12));
    }
}

TEST(CostReport, MissingFieldIsIncomplete) {
    RuntimeParams rp = table_params();
    rp.theta.reset();
    EXPECT_THROW(cost_report(rp), IncompleteParamsError);
}

TEST(CostReport, FormulasEvaluateIndependently) {
    const auto rows = cost_report(table_params());
    ASSERT_EQ(rows.size(), 10u);
    const double mu = 3.2032, eps = 0.003, gamma = 0.0316, p = 0.858, delta = 0.1124, theta = 0.1564;
    EXPECT_NEAR(row(rows, "factor_score_estimation"), mu / eps / (gamma * gamma), 1e-6);
    EXPECT_NEAR(row(rows, "fsr_sum_check"), mu / (eps * gamma * std::sqrt(p)), 1e-6);
    EXPECT_NEAR(row(rows, "reduced_rank_exact"), mu / eps * std::sqrt(60.0 * 726.0), 1e-6);
    EXPECT_NEAR(row(rows, "topk_extraction_right"),
                (1.0 / theta) / std::sqrt(p) * (mu / eps) * 59.0 * 784.0 / (delta * delta), 1e-3);
    EXPECT_NEAR(row(rows, "classical_baseline"), 70000.0 * 784.0 * 59.0 * std::log(784.0 / eps) / std::sqrt(eps),
                1.0);
    EXPECT_GT(row(rows, "topk_extraction_right"), row(rows, "factor_score_estimation"));
}

TEST(CostReport, ExtractionVanishesForLargeDelta) {
    RuntimeParams rp = table_params();
    double prev = std::numeric_limits<double>::infinity();
    for (double d : {1.0, 10.0, 1e3, 1e6}) {
        rp.delta = d;
        const double v = row(cost_report(rp), "topk_extraction_right");
        EXPECT_LT(v, prev);
        prev = v;
    }
    EXPECT_LT(prev, 1e-3);
}

TEST(CostReport, GoldenCsv) {
    EXPECT_EQ(cost_report_csv(table_params()), slurp(std::string(QSVD_GOLDEN_DIR) + "/cost_report.csv"));
}

TEST(CostLadder, MonotoneAndCrossover) {
    const auto l = cost_ladder(table_params(), {1000, 10000, 100000, 1000000, 10000000});
    EXPECT_NE(l.csv.find("quantum_total"), std::string::npos);
    RuntimeParams rp = table_params();
    double prev_c = 0.0;
    for (std::size_t n : {1000u, 10000u, 100000u}) {
        rp.n = n;
        const double c = row(cost_report(rp), "classical_baseline");
        EXPECT_GT(c, prev_c);
        prev_c = c;
    }
    ASSERT_TRUE(l.crossover.has_value());
}
