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

#include "qsvd/experiments.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace qsvd;

namespace {

synth::LabeledData blobs(std::uint64_t seed) {
    synth::LabeledData d;
    d.X = synth::gaussian_matrix(200, 2, seed);
    for (Eigen::Index i = 0; i < 200; ++i) {
        const int c = static_cast<int>(i % 2);
        d.labels.push_back(c);
        d.X(i, 0) += c ? 20.0 : -20.0;
    }
    return d;
}

}  // namespace

TEST(Knn, SeparableBlobs) {
    const auto d = blobs(1);
    KnnOptions o;
    o.neighbors = 1;
    EXPECT_GT(knn_cv(d.X, d.labels, o).accuracy, 0.99);
}

TEST(Knn, ShuffledLabelsNearChance) {
    const auto d = synth::synthetic_classes(1000, 10, 10, 3);
    std::vector<int> labels(1000);
    Rng rng(4);
    for (auto& l : labels) l = static_cast<int>(rng.below(10));
    // keep classes balanced enough for stratification
    for (std::size_t i = 0; i < 100; ++i) labels[i] = static_cast<int>(i % 10);
    const double acc = knn_cv(d.X, labels).accuracy;
    EXPECT_NEAR(acc, 0.1, 0.03);
}

TEST(Knn, MatchesBruteForceExactly) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto d = synth::synthetic_classes(200, 5, 4, seed);
        // coarse values create exact distance ties
        d.X = (d.X * 2.0).array().round() / 2.0;
        for (bool stratified : {true, false}) {
            KnnOptions o;
            o.seed = seed;
            o.stratified = stratified;
            const auto r = knn_cv(d.X, d.labels, o);
            const auto folds = assign_folds(d.labels, o.folds, o.seed, stratified);
            EXPECT_EQ(r.fold_of, folds);
            EXPECT_EQ(r.accuracy, oracle::knn_accuracy(d.X, d.labels, folds, o.folds, o.neighbors));
        }
    }
}

TEST(Knn, Preconditions) {
    std::vector<int> labels(20, 0);
    labels[0] = 1;
    EXPECT_THROW(knn_cv(synth::gaussian_matrix(20, 2, 1), labels), StratificationError);
    EXPECT_THROW(knn_cv(synth::gaussian_matrix(19, 2, 1), labels), ShapeError);
}

TEST(Folds, StratifiedBalance) {
    std::vector<int> labels;
    for (int i = 0; i < 103; ++i) labels.push_back(i % 3);
    const auto f = assign_folds(labels, 10, 5, true);
    std::vector<int> sizes(10, 0);
    for (int x : f) ++sizes[static_cast<std::size_t>(x)];
    EXPECT_LE(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()), 1);
}

TEST(Spearman, KnownValues) {
    const auto perfect = spearman({1, 2, 3, 4}, {10, 20, 30, 40});
    EXPECT_DOUBLE_EQ(perfect.rho, 1.0);
    EXPECT_EQ(perfect.p_value, 0.0);
    const auto inverse = spearman({1, 2, 3, 4, 5}, {5, 4, 3, 2, 1});
    EXPECT_DOUBLE_EQ(inverse.rho, -1.0);
    // ranks (1,2,3,4,5) vs (2,1,4,3,5): d^2 sum = 4, rho = 1 - 6*4/120 = 0.8
    const auto r = spearman({1, 2, 3, 4, 5}, {2, 1, 4, 3, 5});
    EXPECT_NEAR(r.rho, 0.8, 1e-12);
    EXPECT_NEAR(r.p_value, 0.1041, 1e-3);
    EXPECT_EQ(average_ranks({3, 1, 3}), (std::vector<double>{2.5, 1, 2.5}));
}

TEST(Sweep, ZeroRowIsBenchmarkAndTrendDeclines) {
    const auto d = synth::synthetic_classes(600, 20, 6, 8);
    const DataMatrix a = preprocess(DataMatrix(d.X), {true, true});
    FitOptions o;
    o.eps = 0.0;
    o.delta = 0.0;
    const auto model = pca_fit(a, FitTarget::components(5), o);
    KnnOptions knn;
    const auto sweep = accuracy_vs_error_sweep(a, d.labels, model, {0.0, 0.5, 1.0, 2.0, 4.0, 8.0}, 2, 3, knn);
    ASSERT_EQ(sweep.rows.size(), 6u);
    const Matrix Y = pca_transform_matrix(model, a).Y;
    knn.seed = SeedStream(3).child("folds");
    EXPECT_EQ(sweep.rows[0].accuracy, knn_cv(Y, d.labels, knn).accuracy);
    EXPECT_EQ(sweep.rows[0].observed_error, 0.0);
    EXPECT_LT(sweep.trend.rho, 0.0);
    EXPECT_LT(sweep.trend.p_value, 0.05);
    for (const auto& r : sweep.rows) EXPECT_LE(r.observed_error, r.xi + 1e-12);
}

TEST(FsrReport, Examples) {
    const auto diag = compute_svd(DataMatrix(synth::diag_matrix({4, 3})));
    EXPECT_EQ(fsr_distribution_csv(diag),
              "rank,sigma,factor_score,ratio,cumulative\n1,4,16,0.64,0.64\n2,3,9,0.36,1\n");
    Vector u(2), v(2);
    u << 1, 1;
    v << 1, 0;
    const auto one = compute_svd(DataMatrix(Matrix(u * v.transpose())));
    const auto csv = fsr_distribution_csv(one);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
    EXPECT_NE(csv.find(",1\n"), std::string::npos);
}
