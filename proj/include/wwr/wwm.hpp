#pragma once

/**
 * @file wwm.hpp
 * @brief Wrong-way-measure machinery: the deterministic drift adjustment
 *        theta(s,t), its flat and bridge-weighted integrals, and the exposure
 *        law under the adjusted measure.
 *
 * theta(s,t) = rho beta_s sigma^lambda(lam(s)) *
 *              (A B_t / (A B_t lam(s) - A_t) - B)
 * where A, B are the shifted-model bond coefficients on (s,t) and lam(s) is a
 * deterministic proxy for lambda_s: either the model's implied hazard rate or
 * its mean intensity. Exposures then stay Gaussian with a shifted mean and an
 * unchanged variance.
 */

#include <atomic>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

#include "wwr/affine.hpp"
#include "wwr/exposure.hpp"
#include "wwr/quadrature.hpp"

namespace wwr {

/// Which deterministic stand-in replaces lambda_s inside theta.
enum class DriftProxy { hazard, mean_intensity };

/// Constant instantaneous correlation between the exposure and intensity
/// Brownian drivers.
struct CorrelationSpec {
    double rho;

    void validate() const {
        if (!(rho >= -1.0 && rho <= 1.0))
            throw std::invalid_argument("CorrelationSpec: |rho| must be <= 1");
    }
};

/// Deterministic drift adjustment for one (model, proxy, beta, rho) setup.
///
/// Copies are cheap and share the diagnostic flags, so a per-thread copy can
/// be used freely; all evaluation methods are const and thread-safe.
class DriftAdjustment {
public:
    DriftAdjustment(ShiftedAffineModel model, DriftProxy proxy,
                    std::function<double(double)> beta, CorrelationSpec corr)
        : model_(std::move(model)),
          proxy_(proxy),
          beta_(std::move(beta)),
          rho_(corr.rho),
          diag_(std::make_shared<Diag>()) {
        corr.validate();
        if (!beta_) throw std::invalid_argument("DriftAdjustment: beta function required");
    }

    DriftAdjustment(ShiftedAffineModel model, DriftProxy proxy, double beta,
                    CorrelationSpec corr)
        : DriftAdjustment(std::move(model), proxy,
                          [beta](double) { return beta; }, corr) {}

    double rho() const { return rho_; }
    const ShiftedAffineModel& model() const { return model_; }

    /// The proxy value lam(s): implied hazard or mean intensity.
    double proxy_value(double s) const {
        return proxy_ == DriftProxy::hazard ? model_.hazard0(s)
                                            : model_.mean_intensity(s);
    }

    double theta(double s, double t) const {
        if (rho_ == 0.0) return 0.0;
        double lam = proxy_value(s);
        if (t - s < 1e-12 && lam < 1e-8) {
            // theta(t,t) = rho beta sigma(lam)/lam blows up as lam -> 0
            diag_->floored_proxy.store(true, std::memory_order_relaxed);
            lam = 1e-8;
        }
        if (lam < 0.0) diag_->clipped_negative.store(true, std::memory_order_relaxed);
        const double sig = model_.diffusion(lam);  // clips at 0 for sqrt families
        if (sig == 0.0) return 0.0;
        const AffineCoeffs c = model_.coeffs(s, t);
        const double denom = c.A * c.B_t * lam - c.A_t;
        if (std::fabs(denom) < 1e-14)
            throw std::domain_error("drift adjustment singular at s=" + std::to_string(s) +
                                    " t=" + std::to_string(t) +
                                    " lambda=" + std::to_string(lam));
        return rho_ * beta_(s) * sig * (c.A * c.B_t / denom - c.B);
    }

    /// Theta(t) = int_0^t theta(u,t) du.
    double integrated(double t) const {
        if (t == 0.0 || rho_ == 0.0) return 0.0;
        return detail::simpson([&](double u) { return theta(u, t); }, 0.0, t, 200);
    }

    /// (t-T) int_0^t theta(u,t)/(u-T) du, the swap-bridge weighting.
    double integrated_bridge(double t, double T) const {
        if (!(t < T))
            throw std::range_error("integrated_bridge: need t < T, got t=" +
                                   std::to_string(t) + " T=" + std::to_string(T));
        if (t == 0.0 || rho_ == 0.0) return 0.0;
        const double raw =
            detail::simpson([&](double u) { return theta(u, t) / (u - T); }, 0.0, t, 200);
        return (t - T) * raw;
    }

    /// True if some sigma^lambda evaluation saw a negative proxy.
    bool clipped_negative() const {
        return diag_->clipped_negative.load(std::memory_order_relaxed);
    }

    /// True if theta(t,t) had to floor the proxy at 1e-8.
    bool floored_proxy() const {
        return diag_->floored_proxy.load(std::memory_order_relaxed);
    }

private:
    struct Diag {
        std::atomic<bool> clipped_negative{false};
        std::atomic<bool> floored_proxy{false};
    };

    ShiftedAffineModel model_;
    DriftProxy proxy_;
    std::function<double(double)> beta_;
    double rho_;
    std::shared_ptr<Diag> diag_;
};

inline double drift_adjustment(const ShiftedAffineModel& model, DriftProxy proxy,
                               const std::function<double(double)>& beta,
                               CorrelationSpec corr, double s, double t) {
    return DriftAdjustment(model, proxy, beta, corr).theta(s, t);
}

inline double integrated_adjustment(const DriftAdjustment& adj, double t) {
    return adj.integrated(t);
}

inline double integrated_adjustment_bridge(const DriftAdjustment& adj, double t, double T) {
    return adj.integrated_bridge(t, T);
}

/// Exposure law at t under the wrong-way measure: mean shifted by the
/// (possibly bridge-weighted) integrated adjustment, stdev unchanged.
inline GaussianLaw wwm_gaussian_law(const ExposureSpec& spec, const DriftAdjustment& adj,
                                    double t) {
    if (spec.kind == ExposureKind::lognormal)
        throw std::invalid_argument("wwm_gaussian_law: lognormal exposure; use lognormal_epe");
    const GaussianLaw q = q_law(spec, t);  // range checks live there
    if (spec.kind == ExposureKind::forward)
        return {q.mean + adj.integrated(t), q.stdev};
    if (t >= spec.maturity) return q;      // degenerate point mass at 0
    return {q.mean + adj.integrated_bridge(t, spec.maturity), q.stdev};
}

/// Semi-analytic EPE(t) under wrong-way risk.
inline double epe_wwm(const ExposureSpec& spec, const DriftAdjustment& adj, double t) {
    if (spec.kind == ExposureKind::lognormal)
        return lognormal_epe(spec, adj.integrated(t), t);
    const GaussianLaw law = wwm_gaussian_law(spec, adj, t);
    if (!(law.stdev > 0.0)) return std::max(law.mean, 0.0);
    return gaussian_epe(law);
}

} // namespace wwr
