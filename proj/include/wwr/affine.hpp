#pragma once

/**
 * @file affine.hpp
 * @brief Closed-form bond coefficients A(s,t), B(s,t) and their t-derivatives
 *        for OU, CIR, and JCIR intensities, plus the deterministic-shift
 *        wrapper lambda_t = y_t + psi(t).
 *
 * Everything is expressed in tau = t - s using forms that avoid e^{h tau}
 * overflow and cancel gracefully as tau -> 0 or sigma -> 0, so the boundary
 * identities A = 1, B = 0, A_t = 0, B_t = 1 at s = t hold exactly in floating
 * point rather than approximately.
 */

#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>

#include "wwr/termstructure.hpp"

namespace wwr {

/// Hull-White / Vasicek intensity: dy = kappa(theta - y)dt + sigma dW.
struct OUParams {
    double kappa;
    double theta_ltm;
    double sigma;
    double y0;

    void validate() const {
        if (!(kappa > 0.0)) throw std::invalid_argument("OUParams: kappa must be > 0");
        if (!(sigma >= 0.0)) throw std::invalid_argument("OUParams: sigma must be >= 0");
    }
};

/// Square-root diffusion: dy = kappa(theta - y)dt + sigma sqrt(y) dW.
struct CIRParams {
    double kappa;
    double theta_ltm;
    double sigma;
    double y0;

    /// 2 kappa theta - sigma^2; recorded, not required positive.
    double feller_margin() const { return 2.0 * kappa * theta_ltm - sigma * sigma; }

    void validate() const {
        if (!(kappa > 0.0)) throw std::invalid_argument("CIRParams: kappa must be > 0");
        if (!(theta_ltm >= 0.0)) throw std::invalid_argument("CIRParams: theta_ltm must be >= 0");
        if (!(sigma > 0.0)) throw std::invalid_argument("CIRParams: sigma must be > 0");
        if (!(y0 >= 0.0)) throw std::invalid_argument("CIRParams: y0 must be >= 0");
    }
};

/// CIR plus compound-Poisson jumps: rate alpha, Exp(gamma) sizes.
struct JCIRParams {
    CIRParams cir;
    double jump_rate;
    double jump_mean;

    void validate() const {
        cir.validate();
        if (!(jump_rate >= 0.0)) throw std::invalid_argument("JCIRParams: jump_rate must be >= 0");
        if (!(jump_mean > 0.0)) throw std::invalid_argument("JCIRParams: jump_mean must be > 0");
    }
};

/// Bond coefficients for P(s,t) = A e^{-B x_s} and their t-derivatives.
struct AffineCoeffs {
    double A;
    double B;
    double A_t;
    double B_t;
};

using AffineParams = std::variant<OUParams, CIRParams, JCIRParams>;

namespace detail {

inline void require_ordered(double s, double t) {
    if (!(s >= 0.0) || !(t >= s))
        throw std::invalid_argument("affine coeffs: need 0 <= s <= t, got s=" +
                                    std::to_string(s) + " t=" + std::to_string(t));
}

/// ln(1+x)/x, finite and smooth through x = 0.
inline double log1p_over(double x) {
    if (std::fabs(x) < 1e-4)
        return 1.0 + x * (-0.5 + x * (1.0 / 3.0 - 0.25 * x));
    return std::log1p(x) / x;
}

} // namespace detail

inline AffineCoeffs ou_coeffs(const OUParams& p, double s, double t) {
    detail::require_ordered(s, t);
    const double tau = t - s;
    const double B = -std::expm1(-p.kappa * tau) / p.kappa;
    const double B_t = std::exp(-p.kappa * tau);
    const double s2 = p.sigma * p.sigma;
    const double lnA = (p.theta_ltm - s2 / (2.0 * p.kappa * p.kappa)) * (B - tau)
                       - s2 * B * B / (4.0 * p.kappa);
    const double A = std::exp(lnA);
    const double A_t = A * (s2 * B * B / 2.0 - p.kappa * p.theta_ltm * B);
    return {A, B, A_t, B_t};
}

inline AffineCoeffs cir_coeffs(const CIRParams& p, double s, double t) {
    detail::require_ordered(s, t);
    const double tau = t - s;
    const double h = std::sqrt(p.kappa * p.kappa + 2.0 * p.sigma * p.sigma);
    const double em = -std::expm1(-h * tau);      // 1 - e^{-h tau}, in [0,1)
    const double kh = p.kappa + h;
    const double B = 2.0 * em / (2.0 * h * (1.0 - em) + kh * em);
    // ln A = (2 kappa theta / sigma^2) [ (kappa-h) tau / 2 - ln(1 - x) ]
    // with x = sigma^2 em / (h (kappa+h)); the sigma^2 factors cancel, which
    // keeps the expression exact in the sigma -> 0 limit.
    const double x = p.sigma * p.sigma * em / (h * kh);
    const double lnA = 2.0 * p.kappa * p.theta_ltm *
                       (-tau / kh + detail::log1p_over(-x) * em / (h * kh));
    const double A = std::exp(lnA);
    const double B_t = 1.0 - p.kappa * B - p.sigma * p.sigma * B * B / 2.0;
    const double A_t = -p.kappa * p.theta_ltm * B * A;
    return {A, B, A_t, B_t};
}

inline AffineCoeffs jcir_coeffs(const JCIRParams& p, double s, double t) {
    AffineCoeffs c = cir_coeffs(p.cir, s, t);
    if (p.jump_rate == 0.0) return c;
    const double tau = t - s;
    const double kappa = p.cir.kappa;
    const double sigma = p.cir.sigma;
    const double gamma = p.jump_mean;
    const double h = std::sqrt(kappa * kappa + 2.0 * sigma * sigma);
    const double em = -std::expm1(-h * tau);
    const double xi = (h + kappa + 2.0 * gamma) / 2.0;
    const double d = sigma * sigma - 2.0 * kappa * gamma - 2.0 * gamma * gamma;
    // Jump factor F solving (ln F)'(tau) = -alpha gamma B / (1 + gamma B).
    // The usual two-branch d != 0 / d = 0 formulas collapse into one
    // expression through ln(1+q)/q, which is continuous at d = 0.
    const double q = -d * em / (2.0 * xi * h);
    const double lnF = -(p.jump_rate * gamma / xi) *
                       (tau - detail::log1p_over(q) * em / h);
    const double A = c.A * std::exp(lnF);
    const double A_t = A * (-kappa * p.cir.theta_ltm * c.B -
                            p.jump_rate * gamma * c.B / (1.0 + gamma * c.B));
    return {A, c.B, A_t, c.B_t};
}

inline AffineCoeffs base_coeffs(const AffineParams& p, double s, double t) {
    return std::visit(
        [&](const auto& q) {
            using T = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<T, OUParams>) return ou_coeffs(q, s, t);
            else if constexpr (std::is_same_v<T, CIRParams>) return cir_coeffs(q, s, t);
            else return jcir_coeffs(q, s, t);
        },
        p);
}

inline double initial_value(const AffineParams& p) {
    return std::visit(
        [](const auto& q) {
            using T = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<T, JCIRParams>) return q.cir.y0;
            else return q.y0;
        },
        p);
}

inline double mean_reversion(const AffineParams& p) {
    return std::visit(
        [](const auto& q) {
            using T = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<T, JCIRParams>) return q.cir.kappa;
            else return q.kappa;
        },
        p);
}

inline void validate(const AffineParams& p) {
    std::visit([](const auto& q) { q.validate(); }, p);
}

/// E[lambda_s] for the shifted process. OU and CIR share the mean ODE; JCIR
/// adds the compensator of the compound-Poisson drift, alpha gamma per year
/// fed through the same mean reversion.
inline double mean_intensity(const AffineParams& p, const ShiftFunction& shift, double s) {
    if (!(s >= 0.0)) throw std::invalid_argument("mean_intensity: s must be >= 0");
    return std::visit(
        [&](const auto& q) {
            using T = std::decay_t<decltype(q)>;
            double kappa, theta, y0, jump = 0.0;
            if constexpr (std::is_same_v<T, JCIRParams>) {
                kappa = q.cir.kappa;
                theta = q.cir.theta_ltm;
                y0 = q.cir.y0;
                jump = q.jump_rate * q.jump_mean / kappa;
            } else {
                kappa = q.kappa;
                theta = q.theta_ltm;
                y0 = q.y0;
            }
            const double decay = std::exp(-kappa * s);
            return shift.psi(s) + y0 * decay + (theta + jump) * (1.0 - decay);
        },
        p);
}

/// Latent affine factor plus deterministic shift: lambda_t = y_t + psi(t).
struct ShiftedAffineModel {
    AffineParams base;
    ShiftFunction shift;

    /// A^lambda, B^lambda and derivatives from the base coefficients.
    AffineCoeffs coeffs(double s, double t) const {
        AffineCoeffs c = base_coeffs(base, s, t);
        if (shift.is_zero()) return c;
        const double psi_s = shift.psi(s);
        const double psi_t = shift.psi(t);
        const double A = c.A * std::exp(c.B * psi_s - shift.integral(s, t));
        const double A_t = A * (c.A_t / c.A + c.B_t * psi_s - psi_t);
        return {A, c.B, A_t, c.B_t};
    }

    /// E[e^{-int_s^t lambda} | lambda_s] = A e^{-B lambda_s}.
    double bond(double s, double t, double lambda_s) const {
        const AffineCoeffs c = coeffs(s, t);
        return c.A * std::exp(-c.B * lambda_s);
    }

    double initial_intensity() const { return initial_value(base) + shift.psi(0.0); }

    /// P^lambda(0,t), the model's own survival curve.
    double bond0(double t) const { return bond(0.0, t, initial_intensity()); }

    /// Exact hazard of the model curve: -d/dt ln P^lambda(0,t).
    double hazard0(double t) const {
        const AffineCoeffs c = coeffs(0.0, t);
        return c.B_t * initial_intensity() - c.A_t / c.A;
    }

    double mean_intensity(double s) const { return wwr::mean_intensity(base, shift, s); }

    /// Diffusion coefficient sigma^lambda(x) of the shifted process.
    double diffusion(double x) const {
        return std::visit(
            [&](const auto& q) {
                using T = std::decay_t<decltype(q)>;
                if constexpr (std::is_same_v<T, OUParams>) return q.sigma;
                else if constexpr (std::is_same_v<T, CIRParams>)
                    return q.sigma * std::sqrt(std::max(x, 0.0));
                else return q.cir.sigma * std::sqrt(std::max(x, 0.0));
            },
            base);
    }
};

inline AffineCoeffs shifted_coeffs(const ShiftedAffineModel& m, double s, double t) {
    return m.coeffs(s, t);
}

/// Benchmark CIR parameter sets, loadable by index 1..4.
inline CIRParams table1_set(int i) {
    switch (i) {
        case 1: return {0.02, 0.161, 0.08, 0.03};
        case 2: return {0.35, 0.045, 0.15, 0.035};
        case 3: return {0.8, 0.02, 0.2, 0.01};
        case 4: return {0.5, 0.05, 0.5, 0.03};
    }
    throw std::invalid_argument("table1_set: index must be 1..4");
}

} // namespace wwr
