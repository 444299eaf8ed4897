#pragma once

/**
 * @file normal.hpp
 * @brief Standard normal density, distribution and quantile functions.
 */

#include <cmath>
#include <stdexcept>

namespace wwr {

inline constexpr double inv_sqrt_2pi = 0.39894228040143267794;
inline constexpr double inv_sqrt_2 = 0.70710678118654752440;

inline double norm_pdf(double x) {
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

/// Phi(x), computed through erfc so both tails keep full relative accuracy.
inline double norm_cdf(double x) {
    return 0.5 * std::erfc(-x * inv_sqrt_2);
}

/// Upper tail probability P(X > x).
inline double norm_cdf_upper(double x) {
    return 0.5 * std::erfc(x * inv_sqrt_2);
}

/// Inverse of norm_cdf on (0,1).
///
/// Solves the upper-tail equation erfc(x/sqrt(2))/2 = q for q = min(p, 1-p)
/// by Newton iteration, starting from the asymptotic tail expansion (or from
/// a cubic central expansion when q is close to 1/2). The upper-tail
/// formulation keeps the residual well conditioned arbitrarily deep into
/// either tail.
inline double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("norm_quantile: probability must lie in (0,1)");
    const double q = p < 0.5 ? p : 1.0 - p;

    double x;
    if (q < 0.1) {
        const double t = std::sqrt(-2.0 * std::log(q));
        x = t - std::log(t * t * 6.283185307179586477) / (2.0 * t);
    } else {
        const double u = (0.5 - q) / inv_sqrt_2pi;
        x = u + u * u * u / 6.0;
    }

    for (int i = 0; i < 20; ++i) {
        const double f = norm_cdf_upper(x) - q;
        const double dx = f / norm_pdf(x);
        x += dx;
        if (std::abs(dx) < 1e-15 * (1.0 + std::abs(x))) break;
    }
    return p < 0.5 ? -x : x;
}

} // namespace wwr
