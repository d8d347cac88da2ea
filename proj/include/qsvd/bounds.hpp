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

#ifndef QSVD_BOUNDS_HPP
#define QSVD_BOUNDS_HPP

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "qsvd/errors.hpp"
#include "qsvd/io.hpp"

namespace qsvd {

struct BoundPair {
    double tight = 0.0;  // per-column sum
    double loose = 0.0;  // sqrt(k) times the worst column
};

namespace detail {

inline void require_nonnegative(double eps, double delta, const char* who) {
    if (eps < 0.0 || delta < 0.0) throw PreconditionError(std::string(who) + ": eps, delta must be >= 0");
}

}  // namespace detail

/// ||U S - Ubar Sbar||_F bound. `spectral` is ||A||; when negative the
/// largest entry of `sigmas` is used.
inline BoundPair bound_US(const Vector& sigmas, double eps, double delta, double spectral = -1.0) {
    detail::require_nonnegative(eps, delta, "bound_US");
    const double a = spectral >= 0.0 ? spectral : (sigmas.size() ? sigmas.maxCoeff() : 0.0);
    BoundPair b;
    b.tight = std::sqrt((eps + delta * sigmas.array()).square().sum());
    b.loose = std::sqrt(static_cast<double>(sigmas.size())) * (eps + delta * a);
    return b;
}

/// ||D^{-1/2} U - D^{-1/2} Ubar||_F bound.
inline double bound_DU(double d_inv_sqrt_frobenius, double delta, std::size_t k) {
    return d_inv_sqrt_frobenius * std::sqrt(static_cast<double>(k)) * delta;
}

/// Frobenius norm of diag(marginals)^{-1/2}.
inline double inv_sqrt_diag_frobenius(const Vector& marginals) {
    if ((marginals.array() <= 0.0).any())
        throw PreconditionError("inv_sqrt_diag_frobenius: marginals must be > 0");
    return std::sqrt(marginals.cwiseInverse().sum());
}

/// ||U S^{1/2} - Ubar Sbar^{1/2}||_F bound. Every sigma must be >= theta.
inline BoundPair bound_US_half(const Vector& sigmas, double eps, double delta, double theta,
                               double spectral = -1.0) {
    detail::require_nonnegative(eps, delta, "bound_US_half");
    if (!(theta > 0.0)) throw PreconditionError("bound_US_half: theta must be > 0 (singular bound)");
    for (Eigen::Index j = 0; j < sigmas.size(); ++j)
        if (sigmas(j) < theta)
            throw PreconditionError("bound_US_half: sigma " + format_double(sigmas(j)) +
                                    " is below theta " + format_double(theta));
    const double a = spectral >= 0.0 ? spectral : (sigmas.size() ? sigmas.maxCoeff() : 0.0);
    const double tail = eps / (2.0 * std::sqrt(theta));
    BoundPair b;
    b.tight = std::sqrt((delta * sigmas.array().sqrt() + tail).square().sum());
    b.loose = std::sqrt(static_cast<double>(sigmas.size())) * (delta * std::sqrt(a) + tail);
    return b;
}

/// ||U S^{-1} - Ubar Sbar^{-1}||_F bound; requires 0 <= eps < theta.
inline double bound_US_inv(double eps, double delta, double theta, std::size_t k) {
    detail::require_nonnegative(eps, delta, "bound_US_inv");
    if (!(theta > 0.0) || !(eps < theta))
        throw PreconditionError("bound_US_inv: requires 0 <= eps < theta");
    return std::sqrt(static_cast<double>(k)) * (delta / theta + eps / (theta * theta - theta * eps));
}

/// First-order factor score ratio error from the extraction proof,
/// (2 eps sigma + eps^2) / ||A||_F^2.
inline double ratio_error_bound(double sigma, double eps, double frobenius) {
    return (2.0 * eps * sigma + eps * eps) / (frobenius * frobenius);
}

struct BoundInputs {
    double eps = 0.0;
    double delta = 0.0;
    double theta = 0.0;
    std::size_t k = 0;
    Vector sigmas;
    double spectral = 0.0;
};

struct BoundReport {
    std::string bound_name;
    double analytic_bound = 0.0;
    double observed_error = 0.0;
    bool holds = true;
    BoundInputs inputs;

    static std::vector<std::string> csv_header() {
        return {"bound", "analytic_bound", "observed_error", "holds", "eps", "delta", "theta", "k",
                "spectral", "sigmas"};
    }

    std::vector<std::string> csv_row() const {
        std::string sig;
        for (Eigen::Index i = 0; i < inputs.sigmas.size(); ++i) {
            if (i) sig += ';';
            sig += format_double(inputs.sigmas(i));
        }
        return {bound_name,
                format_double(analytic_bound),
                format_double(observed_error),
                holds ? "true" : "false",
                format_double(inputs.eps),
                format_double(inputs.delta),
                format_double(inputs.theta),
                std::to_string(inputs.k),
                format_double(inputs.spectral),
                sig};
    }
};

template <class A, class B>
BoundReport verify_bound(const Eigen::MatrixBase<A>& exact, const Eigen::MatrixBase<B>& approx,
                         double bound, std::string name, BoundInputs inputs = {}) {
    if (exact.rows() != approx.rows() || exact.cols() != approx.cols())
        throw ShapeError("verify_bound(" + name + "): shapes " + std::to_string(exact.rows()) + "x" +
                         std::to_string(exact.cols()) + " and " + std::to_string(approx.rows()) + "x" +
                         std::to_string(approx.cols()) + " differ");
    BoundReport r;
    r.bound_name = std::move(name);
    r.analytic_bound = bound;
    r.observed_error = (exact - approx).norm();
    r.holds = r.observed_error <= bound + 1e-12;
    r.inputs = std::move(inputs);
    return r;
}

}  // namespace qsvd

#endif  // QSVD_BOUNDS_HPP
