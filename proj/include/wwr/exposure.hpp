#pragma once

/**
 * @file exposure.hpp
 * @brief Stylized exposure models and their closed-form marginal laws under Q.
 *
 * Three kinds are supported:
 *   forward    V_t = nu W_t, so V_t ~ N(0, nu sqrt(t))
 *   swap       Brownian bridge with moneyness drift,
 *              V_t ~ N(gamma_v t (T - t), nu sqrt(t (1 - t/T)))
 *   lognormal  dV = alpha(t) V dt + nu V dW (EPE handled in closed form)
 */

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "wwr/normal.hpp"
#include "wwr/quadrature.hpp"

namespace wwr {

enum class ExposureKind { forward, swap, lognormal };

struct ExposureSpec {
    ExposureKind kind;
    double nu;
    double gamma_v = 0.0;                     // swap only
    double maturity = 0.0;
    double v0 = 0.0;                          // lognormal only
    std::function<double(double)> alpha_fn;   // lognormal drift, empty = 0

    static ExposureSpec forward_type(double nu, double maturity) {
        ExposureSpec s{ExposureKind::forward, nu, 0.0, maturity, 0.0, {}};
        s.validate();
        return s;
    }

    static ExposureSpec swap_type(double nu, double gamma_v, double maturity) {
        ExposureSpec s{ExposureKind::swap, nu, gamma_v, maturity, 0.0, {}};
        s.validate();
        return s;
    }

    static ExposureSpec lognormal_type(double v0, double nu, double maturity,
                                       std::function<double(double)> alpha = {}) {
        ExposureSpec s{ExposureKind::lognormal, nu, 0.0, maturity, v0, std::move(alpha)};
        s.validate();
        return s;
    }

    void validate() const {
        if (!(nu > 0.0)) throw std::invalid_argument("ExposureSpec: nu must be > 0");
        if (!(maturity > 0.0)) throw std::invalid_argument("ExposureSpec: maturity must be > 0");
        if (kind == ExposureKind::lognormal && !(v0 > 0.0))
            throw std::invalid_argument("ExposureSpec: lognormal needs v0 > 0");
    }
};

struct GaussianLaw {
    double mean;
    double stdev;
};

/// E[max(X, 0)] for X ~ N(mean, stdev): sigma phi(m/s) + m Phi(m/s).
inline double gaussian_epe(const GaussianLaw& law) {
    if (!(law.stdev > 0.0))
        throw std::domain_error("gaussian_epe: stdev must be > 0");
    const double z = law.mean / law.stdev;
    return law.stdev * norm_pdf(z) + law.mean * norm_cdf(z);
}

/// Marginal law of a Gaussian exposure kind at time t under Q.
inline GaussianLaw q_law(const ExposureSpec& spec, double t) {
    if (spec.kind == ExposureKind::lognormal)
        throw std::invalid_argument("q_law: lognormal exposure is not Gaussian; use lognormal_epe");
    if (!(t >= 0.0) || t > spec.maturity)
        throw std::range_error("q_law: t=" + std::to_string(t) + " outside [0," +
                               std::to_string(spec.maturity) + "]");
    if (spec.kind == ExposureKind::forward)
        return {0.0, spec.nu * std::sqrt(t)};
    return {spec.gamma_v * t * (spec.maturity - t),
            spec.nu * std::sqrt(t * (1.0 - t / spec.maturity))};
}

/// Lognormal EPE: v0 e^{int_0^t alpha} under Q, times e^{Theta} under the
/// wrong-way measure.
inline double lognormal_epe(const ExposureSpec& spec, double Theta, double t) {
    if (spec.kind != ExposureKind::lognormal)
        throw std::invalid_argument("lognormal_epe: exposure kind is not lognormal");
    if (!(t >= 0.0)) throw std::range_error("lognormal_epe: t must be >= 0");
    const double drift =
        spec.alpha_fn ? detail::simpson(spec.alpha_fn, 0.0, t, 64) : 0.0;
    return spec.v0 * std::exp(drift + Theta);
}

/// EPE under independence (the Q-law positive part). The degenerate
/// endpoints t = 0 and swap t = T collapse to max(mean, 0) by continuity.
inline double q_epe(const ExposureSpec& spec, double t) {
    if (spec.kind == ExposureKind::lognormal) return lognormal_epe(spec, 0.0, t);
    const GaussianLaw law = q_law(spec, t);
    if (!(law.stdev > 0.0)) return std::max(law.mean, 0.0);
    return gaussian_epe(law);
}

} // namespace wwr
