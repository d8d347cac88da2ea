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

// Minimal end-to-end use of the library: build a low-rank dataset, estimate
// how many components carry 90% of the variance, extract them with simulated
// tomography noise and project the data.

#include <iostream>

#include "qsvd/qsvd.hpp"

int main() {
    qsvd::Rng rng(7);
    const Eigen::Index n = 400, m = 40, r = 6;
    qsvd::Matrix left(n, r), right(r, m);
    for (Eigen::Index i = 0; i < left.size(); ++i) left.data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < right.size(); ++i) right.data()[i] = rng.normal() / static_cast<double>(i % r + 1);
    qsvd::Matrix noise(n, m);
    for (Eigen::Index i = 0; i < noise.size(); ++i) noise.data()[i] = 0.05 * rng.normal();

    const auto data = qsvd::preprocess(qsvd::DataMatrix(left * right + noise), {true, true});
    const auto oracle = qsvd::compute_svd(data);

    qsvd::FitOptions opts;
    opts.gamma = 0.02;
    opts.eps = 0.005;
    opts.delta = 0.05;
    opts.seed = 11;
    const auto model = qsvd::pca_fit(oracle, qsvd::FitTarget::variance(0.9), opts);
    const auto proj = qsvd::pca_transform_matrix(model, data);

    std::cout << "rank " << oracle.rank() << ", retained k = " << model.k << "\n"
              << "estimated p = " << model.p_selected << ", exact p = " << model.p_exact << "\n"
              << "projection keeps " << proj.p << " of the squared norm\n"
              << "tomography measurements: " << model.measurements_used << "\n\n"
              << model.cost.text();
}
