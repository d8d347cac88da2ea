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

#ifndef QSVD_TESTS_SYNTHETIC_HPP
#define QSVD_TESTS_SYNTHETIC_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <vector>

#include "qsvd/qsvd.hpp"

namespace qsvd::synth {

inline Matrix gaussian_matrix(Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
    Rng rng(seed);
    Matrix a(n, m);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
    return a;
}

/// n x k matrix with orthonormal columns (thin Q of a Gaussian matrix).
inline Eigen::MatrixXd random_orthonormal(Eigen::Index n, Eigen::Index k, std::uint64_t seed) {
    const Eigen::MatrixXd g = gaussian_matrix(n, k, seed);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    return qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
}

/// Oracle with the given spectrum and random orthonormal factors.
inline SvdModel model_from_spectrum(const Vector& sigmas, Eigen::Index n, Eigen::Index m,
                                    std::uint64_t seed) {
    const auto r = sigmas.size();
    return make_svd_model(sigmas, random_orthonormal(n, r, seed), random_orthonormal(m, r, seed + 1));
}

/// Oracle whose factors are the leading identity columns.
inline SvdModel model_from_spectrum(const Vector& sigmas) {
    const auto r = sigmas.size();
    return make_svd_model(sigmas, Eigen::MatrixXd::Identity(r, r), Eigen::MatrixXd::Identity(r, r));
}

inline Matrix diag_matrix(std::initializer_list<double> d) {
    Matrix a = Matrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
    Eigen::Index i = 0;
    for (double v : d) {
        a(i, i) = v;
        ++i;
    }
    return a;
}

struct LabeledData {
    Matrix X;
    std::vector<int> labels;
};

/// Labelled data in a random orthonormal basis. Each class mean takes a
/// random sign pattern over `leading` decaying coordinates; rows add small
/// noise there and a weak isotropic tail over the remaining coordinates.
inline LabeledData synthetic_classes(Eigen::Index n, Eigen::Index d, int classes, std::uint64_t seed,
                                     Eigen::Index leading = 16, double decay = 0.94,
                                     double noise = 0.25, double tail = 0.03) {
    leading = std::min(leading, d);
    Rng rng(seed);
    const Eigen::MatrixXd basis = random_orthonormal(d, d, seed + 17);
    Matrix means = Matrix::Zero(classes, d);
    for (Eigen::Index c = 0; c < classes; ++c)
        for (Eigen::Index j = 0; j < leading; ++j)
            means(c, j) = std::pow(decay, static_cast<double>(j)) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    LabeledData out;
    out.X.resize(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int c = static_cast<int>(i % classes);
        out.labels.push_back(c);
        for (Eigen::Index j = 0; j < d; ++j) {
            const double sd = j < leading ? noise * std::pow(decay, static_cast<double>(j)) : tail;
            out.X(i, j) = means(c, j) + sd * rng.normal();
        }
    }
    out.X = out.X * basis.transpose();
    return out;
}

}  // namespace qsvd::synth

#endif  // QSVD_TESTS_SYNTHETIC_HPP
