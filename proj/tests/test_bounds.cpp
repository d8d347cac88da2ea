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

#include "qsvd/bounds.hpp"
#include "qsvd/noise.hpp"
#include "support/synthetic.hpp"

using namespace qsvd;

TEST(BoundUS, Examples) {
    Vector sig(2);
    sig << 4, 3;
    EXPECT_EQ(bound_US(sig, 0.0, 0.0).tight, 0.0);
    EXPECT_NEAR(bound_US(sig, 0.1, 0.01).tight, 0.19105, 1e-5);
    const auto mn = bound_US(Vector::Constant(59, 0.5), 0.0030, 0.1124, 1.0);
    EXPECT_NEAR(mn.loose, 0.88640, 1e-5);
}

TEST(BoundDU, Examples) {
    EXPECT_EQ(bound_DU(2.0, 0.0, 4), 0.0);
    EXPECT_DOUBLE_EQ(bound_DU(2.0, 0.1, 4), 0.4);
    EXPECT_DOUBLE_EQ(inv_sqrt_diag_frobenius(Vector::Constant(4, 0.25)), 4.0);
    EXPECT_THROW(inv_sqrt_diag_frobenius(Vector::Zero(2)), PreconditionError);
}

TEST(BoundUSHalf, Examples) {
    Vector one(1);
    one << 4;
    EXPECT_EQ(bound_US_half(one, 0.0, 0.0, 4.0).tight, 0.0);
    EXPECT_NEAR(bound_US_half(one, 0.2, 0.1, 4.0).tight, 0.25, 1e-15);
    EXPECT_THROW(bound_US_half(one, 0.2, 0.1, 0.0), PreconditionError);
    one << 1;
    double prev = 0.0;
    for (double theta : {1.0, 0.5, 0.1, 0.01}) {
        const double b = bound_US_half(one, 0.05, 0.0, theta).tight;
        EXPECT_NEAR(b, 0.05 / (2.0 * std::sqrt(theta)), 1e-15);
        EXPECT_GT(b, prev);
        prev = b;
    }
}

TEST(BoundUSInv, Examples) {
    EXPECT_EQ(bound_US_inv(0.0, 0.0, 2.0, 3), 0.0);
    EXPECT_NEAR(bound_US_inv(0.2, 0.1, 2.0, 1), 0.105556, 1e-6);
    EXPECT_THROW(bound_US_inv(2.0, 0.1, 2.0, 1), PreconditionError);
}

TEST(BoundPair, TightNeverExceedsLoose) {
    Rng rng(3);
    for (int t = 0; t < 1000; ++t) {
        Vector sig(1 + static_cast<Eigen::Index>(rng.below(20)));
        for (auto& x : sig) x = rng.uniform(0.01, 2.0);
        const double eps = rng.uniform(0.0, 0.1), delta = rng.uniform(0.0, 0.5);
        const auto us = bound_US(sig, eps, delta);
        EXPECT_LE(us.tight, us.loose + 1e-12);
        const auto half = bound_US_half(sig, eps, delta, sig.minCoeff());
        EXPECT_LE(half.tight, half.loose + 1e-12);
    }
}

TEST(VerifyBound, HoldsAndViolation) {
    const Matrix a = synth::gaussian_matrix(10, 5, 1);
    EXPECT_TRUE(verify_bound(a, a, 0.0, "same").holds);
    Matrix e = synth::gaussian_matrix(10, 5, 2);
    e *= 0.5 / e.norm();
    const auto r = verify_bound(a, Matrix(a + e), 0.4, "constructed");
    EXPECT_FALSE(r.holds);
    EXPECT_NEAR(r.observed_error, 0.5, 1e-12);
    EXPECT_THROW(verify_bound(a, Matrix(a.leftCols(4)), 1.0, "shape"), ShapeError);
    EXPECT_EQ(r.csv_row().size(), BoundReport::csv_header().size());
}

TEST(VerifyBound, UsWithInjectedNoiseAlwaysHolds) {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        Rng rng(seed);
        const auto s = compute_svd(DataMatrix(synth::gaussian_matrix(15, 6, seed)));
        const double eps = rng.uniform(0.0, 0.2), delta = rng.uniform(0.0, 0.5);
        Eigen::MatrixXd Ub(s.U.rows(), s.rank());
        Vector sb(s.rank());
        for (Eigen::Index j = 0; j < s.rank(); ++j) {
            Ub.col(j) = tomography_noise(s.U.col(j), delta, TomographyNorm::l2, seed * 31 + j);
            sb(j) = s.sigmas(j) + (rng.uniform() < 0.5 ? -eps : eps);
        }
        const Eigen::MatrixXd exact = s.U * s.sigmas.asDiagonal();
        const Eigen::MatrixXd approx = Ub * sb.asDiagonal();
        ASSERT_TRUE(verify_bound(exact, approx, bound_US(s.sigmas, eps, delta).tight, "US").holds) << seed;
    }
}
