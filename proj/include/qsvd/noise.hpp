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

#ifndef QSVD_NOISE_HPP
#define QSVD_NOISE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "qsvd/errors.hpp"
#include "qsvd/io.hpp"
#include "qsvd/random.hpp"

namespace qsvd {

enum class NoiseKind {
    tomography_l2,
    tomography_linf,
    amplitude_additive,
    amplitude_relative,
    matrix_frobenius,
};

inline const char* to_string(NoiseKind k) {
    switch (k) {
        case NoiseKind::tomography_l2: return "tomography_l2";
        case NoiseKind::tomography_linf: return "tomography_linf";
        case NoiseKind::amplitude_additive: return "amplitude_additive";
        case NoiseKind::amplitude_relative: return "amplitude_relative";
        case NoiseKind::matrix_frobenius: return "matrix_frobenius";
    }
    return "?";
}

/// Which error model a routine injected and at what magnitude
/// (delta for tomography, eta for amplitude estimation, xi for matrices).
struct NoiseSpec {
    NoiseKind kind = NoiseKind::tomography_l2;
    double magnitude = 0.0;
    std::uint64_t seed = 0;
};

enum class TomographyNorm { l2, linf };

/// `random` draws the error size uniformly in [0.9 delta, delta];
/// `adversarial` always sits on the boundary.
enum class NoiseShape { random, adversarial };

namespace detail {

inline double linf_distance(const Vector& a, const Vector& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

inline Vector rotate_towards(const Vector& v, const Vector& w, double angle) {
    return std::cos(angle) * v + std::sin(angle) * w;
}

}  // namespace detail

/// Simulated state-vector tomography: returns a unit vector within `delta` of
/// `v` in the requested norm, on the same side as `v` (<v, vbar> > 0).
///
/// The estimate is `v` rotated by some angle towards a random Gaussian
/// direction orthogonal to it. The angle is chosen so the error lands in
/// [0.9 delta, delta]. In linf mode the direction is restricted to the support
/// of `v`, so the error of a vector with z nonzeros is at most delta*sqrt(z) in
/// l2; a 1-sparse vector is returned unchanged.
inline Vector tomography_noise(const Vector& v, double delta, TomographyNorm norm,
                               std::uint64_t seed, NoiseShape shape = NoiseShape::random) {
    if (std::abs(v.norm() - 1.0) > 1e-10)
        throw NormalizationError("tomography_noise: input norm is " + format_double(v.norm()));
    if (!(delta >= 0.0 && delta < 1.0))
        throw PreconditionError("tomography_noise: delta must be in [0, 1)");
    if (delta == 0.0 || v.size() < 2) return v;

    Rng rng(seed);
    Vector g(v.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        const bool on_support = norm == TomographyNorm::l2 || v(i) != 0.0;
        g(i) = on_support ? rng.normal() : 0.0;
    }
    g -= g.dot(v) * v;
    const double gn = g.norm();
    if (!(gn > 1e-300)) return v;  // support of size one
    const Vector w = g / gn;

    const double target =
        shape == NoiseShape::adversarial ? delta : delta * rng.uniform(0.9, 1.0);

    if (norm == TomographyNorm::l2) {
        // ||v - (cos a v + sin a w)|| = 2 sin(a / 2).
        const double angle = 2.0 * std::asin(target / 2.0);
        return detail::rotate_towards(v, w, angle).normalized();
    }

    // linf: bisection on the angle, capped below pi/2 to keep orientation.
    const double cap = std::numbers::pi / 2.0 * 0.999;
    auto err = [&](double a) { return detail::linf_distance(v, detail::rotate_towards(v, w, a)); };
    if (err(cap) <= target) return detail::rotate_towards(v, w, cap).normalized();
    double lo = 0.0, hi = cap;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (err(mid) <= target ? lo = mid : hi = mid);
        if (hi - lo < 1e-15) break;
    }
    Vector out = detail::rotate_towards(v, w, lo);
    out.normalize();
    // Renormalization can nudge the error past the bound by an ulp.
    while (detail::linf_distance(v, out) > delta && lo > 0.0) {
        lo *= 0.999999;
        out = detail::rotate_towards(v, w, lo).normalized();
    }
    return out;
}

enum class AmplitudeMode { exact, additive, relative };

/// Simulated amplitude estimation of a probability p: exact, p + u, or
/// p (1 + u) with u uniform in [-eta, eta], clamped to [0, 1].
inline double amplitude_estimate(double p, double eta, AmplitudeMode mode, std::uint64_t seed,
                                 NoiseShape shape = NoiseShape::random) {
    if (mode == AmplitudeMode::exact) return p;
    if (!(eta > 0.0)) throw PreconditionError("amplitude_estimate: eta must be > 0");
    Rng rng(seed);
    const double u = shape == NoiseShape::adversarial ? (rng.uniform() < 0.5 ? -eta : eta)
                                                      : rng.uniform(-eta, eta);
    const double est = mode == AmplitudeMode::additive ? p + u : p * (1.0 + u);
    return std::clamp(est, 0.0, 1.0);
}

/// Standard normal truncated to [-a, a], by rejection from the uniform.
inline double truncated_standard_normal(Rng& rng, double a) {
    if (a <= 0.0) return 0.0;
    if (a > 1.0) {
        while (true) {
            const double z = rng.normal();
            if (std::abs(z) <= a) return z;
        }
    }
    while (true) {
        const double x = rng.uniform(-a, a);
        if (rng.uniform() <= std::exp(-0.5 * x * x)) return x;
    }
}

/// Adds an independent truncated-Gaussian draw in [-xi/sqrt(nm), xi/sqrt(nm)]
/// to every entry, so the Frobenius error never exceeds xi.
template <class Derived>
Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Derived::IsRowMajor ? Eigen::RowMajor : Eigen::ColMajor>
perturb_matrix_frobenius(const Eigen::MatrixBase<Derived>& m, double xi, std::uint64_t seed) {
    if (xi < 0.0) throw PreconditionError("perturb_matrix_frobenius: xi must be >= 0");
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                  Derived::IsRowMajor ? Eigen::RowMajor : Eigen::ColMajor>
        out = m;
    if (xi == 0.0 || m.size() == 0) return out;
    const double a = xi / std::sqrt(static_cast<double>(m.rows()) * static_cast<double>(m.cols()));
    Rng rng(seed);
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) += truncated_standard_normal(rng, a);
    return out;
}

struct StateDistance {
    double raw = 0.0;               // ||x - xbar||
    double normalized_state = 0.0;  // || x/||x|| - xbar/||xbar|| ||
    double claim_bound = 0.0;       // sqrt(2) ||x - xbar|| / ||x||
    bool applicable = true;         // angle(x, xbar) < pi/2
    bool holds = true;
};

/// Distance between two vectors and between the quantum states they encode,
/// with the sqrt(2) eps / ||x|| closeness bound.
inline StateDistance state_distance(const Vector& x, const Vector& xbar) {
    if (x.size() != xbar.size()) throw ShapeError("state_distance: length mismatch");
    const double nx = x.norm();
    if (!(nx > 0.0)) throw UndefinedStateError("state_distance: ||x|| = 0");
    const double nxb = xbar.norm();
    StateDistance d;
    d.raw = (x - xbar).norm();
    d.claim_bound = std::sqrt(2.0) * d.raw / nx;
    if (!(nxb > 0.0)) {
        d.applicable = false;
        d.normalized_state = 1.0;
        d.holds = d.normalized_state <= d.claim_bound;
        return d;
    }
    d.normalized_state = (x / nx - xbar / nxb).norm();
    d.applicable = x.dot(xbar) > 0.0;
    d.holds = d.normalized_state <= d.claim_bound + 1e-15;
    return d;
}

}  // namespace qsvd

#endif  // QSVD_NOISE_HPP
