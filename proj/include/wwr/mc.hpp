#pragma once

/**
 * @file mc.hpp
 * @brief Bivariate Monte Carlo benchmark: correlated exposure/intensity paths,
 *        CIR/JCIR Euler schemes, zeta-weighted EPE and CVA estimators, and the
 *        Gaussian-copula baseline.
 *
 * Reproducibility contract: every path owns a counter-based RNG substream
 * keyed by (seed, global path index), chunks of paths are fixed work units,
 * and partial sums are merged in chunk order. Output is therefore bit
 * identical for any worker count.
 */

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "wwr/affine.hpp"
#include "wwr/exposure.hpp"
#include "wwr/normal.hpp"
#include "wwr/rng.hpp"
#include "wwr/termstructure.hpp"
#include "wwr/wwm.hpp"

namespace wwr {

enum class Scheme { reflected, full_truncation };

struct SimulationPlan {
    long n_paths = 10000;   // per batch
    int n_batches = 10;
    double dt = 0.01;
    Scheme scheme = Scheme::full_truncation;
    std::uint64_t seed = 42;
    CorrelationSpec corr{0.0};
    std::vector<double> grid;   // output times, multiples of dt, ascending
    int threads = 1;            // 0 = hardware concurrency

    /// All multiples of dt in [0, horizon], endpoints included.
    static std::vector<double> uniform_grid(double horizon, double dt) {
        if (!(horizon > 0.0) || !(dt > 0.0))
            throw std::invalid_argument("uniform_grid: horizon and dt must be > 0");
        const long n = std::lround(horizon / dt);
        if (std::fabs(n * dt - horizon) > 1e-9)
            throw std::invalid_argument("uniform_grid: horizon must be a multiple of dt");
        std::vector<double> g(n + 1);
        for (long i = 0; i <= n; ++i) g[i] = i * dt;
        return g;
    }

    long step_of(double t) const {
        const long k = std::lround(t / dt);
        if (std::fabs(k * dt - t) > 1e-12)
            throw std::invalid_argument("SimulationPlan: grid time " + std::to_string(t) +
                                        " is not a multiple of dt");
        return k;
    }

    void validate() const {
        if (n_paths < 1) throw std::invalid_argument("SimulationPlan: n_paths must be >= 1");
        if (n_batches < 1) throw std::invalid_argument("SimulationPlan: n_batches must be >= 1");
        if (!(dt > 0.0)) throw std::invalid_argument("SimulationPlan: dt must be > 0");
        if (threads < 0) throw std::invalid_argument("SimulationPlan: threads must be >= 0");
        corr.validate();
        if (grid.empty()) throw std::invalid_argument("SimulationPlan: grid must be non-empty");
        long prev = -1;
        for (double t : grid) {
            const long k = step_of(t);
            if (k <= prev)
                throw std::invalid_argument("SimulationPlan: grid must be strictly ascending");
            prev = k;
        }
    }
};

/// One simulated path at a point in time.
struct PathState {
    double v = 0.0;            // exposure level
    double y = 0.0;            // latent factor (raw scheme output)
    double integral_y = 0.0;   // running trapezoid of lambda
    double pending_jump = 0.0; // compound-Poisson increment of the period
};

/// One Euler step of the latent square-root factor.
inline double step_cir(double y, double z, const CIRParams& p, double dt, Scheme scheme) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_cir: dt must be > 0");
    if (scheme == Scheme::reflected) {
        const double yp = std::max(y, 0.0);  // reflected never carries negative y
        return std::fabs(y + p.kappa * (p.theta_ltm - y) * dt +
                         p.sigma * std::sqrt(dt * yp) * z);
    }
    const double yp = std::max(y, 0.0);
    return y + p.kappa * (p.theta_ltm - yp) * dt + p.sigma * std::sqrt(dt * yp) * z;
}

/// Compound-Poisson increment over one period: N ~ Poisson(alpha dt) jumps of
/// Exp(mean gamma) size, applied after the diffusion step.
inline double simulate_jcir_increment(const JCIRParams& p, double dt, PathRng& rng) {
    if (!(dt > 0.0)) throw std::invalid_argument("simulate_jcir_increment: dt must be > 0");
    if (p.jump_rate == 0.0) return 0.0;
    const long n = rng.next_poisson(p.jump_rate * dt);
    double sum = 0.0;
    for (long i = 0; i < n; ++i) sum += rng.next_exponential(p.jump_mean);
    return sum;
}

/// Per-grid-time sums over the paths of one batch.
struct GridStats {
    double v = 0.0;
    double v2 = 0.0;
    double vpos = 0.0;
    double lambda = 0.0;
    double s = 0.0;
    double lambda_s = 0.0;
    double vpos_lambda_s = 0.0;

    void merge(const GridStats& o) {
        v += o.v;
        v2 += o.v2;
        vpos += o.vpos;
        lambda += o.lambda;
        s += o.s;
        lambda_s += o.lambda_s;
        vpos_lambda_s += o.vpos_lambda_s;
    }
};

/// Monte Carlo estimate with the Table 2 convention: value is the across-batch
/// mean, half_width twice the across-batch sample standard deviation.
struct EstimateWithCI {
    double value = 0.0;
    double half_width = 0.0;
};

inline EstimateWithCI make_estimate(const std::vector<double>& batch_values) {
    const std::size_t n = batch_values.size();
    if (n == 0) throw std::invalid_argument("make_estimate: no batches");
    double mean = 0.0;
    for (double x : batch_values) mean += x;
    mean /= static_cast<double>(n);
    if (n == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double x : batch_values) ss += (x - mean) * (x - mean);
    return {mean, 2.0 * std::sqrt(ss / static_cast<double>(n - 1))};
}

struct SimulationResult {
    std::vector<double> grid;
    long paths_per_batch = 0;
    std::vector<std::vector<GridStats>> batch_stats;  // [batch][grid index]

    std::size_t grid_index(double t) const {
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (std::fabs(grid[i] - t) < 1e-9) return i;
        throw std::invalid_argument("SimulationResult: t=" + std::to_string(t) +
                                    " is not a grid time");
    }

    /// Per-batch means of one accumulated quantity at grid index gi.
    std::vector<double> batch_means(std::size_t gi, double GridStats::*field) const {
        std::vector<double> out(batch_stats.size());
        for (std::size_t b = 0; b < batch_stats.size(); ++b)
            out[b] = batch_stats[b][gi].*field / static_cast<double>(paths_per_batch);
        return out;
    }

    GridStats pooled(std::size_t gi) const {
        GridStats g;
        for (const auto& b : batch_stats) g.merge(b[gi]);
        return g;
    }

    long total_paths() const {
        return paths_per_batch * static_cast<long>(batch_stats.size());
    }
};

namespace detail {

enum class Family { ou, cir, jcir };

struct SimSetup {
    Family family = Family::cir;
    OUParams ou{};
    CIRParams cir{};
    JCIRParams jcir{};
    bool clip_lambda = true;   // sqrt families weight with max(y,0) + psi
    std::vector<double> psi;   // psi at each step time t_k
    std::vector<double> alpha; // lognormal drift at t_k (left point)
    std::vector<long> grid_step;
    bool with_exposure = false;
    ExposureSpec spec{ExposureKind::forward, 1.0, 0.0, 1.0, 0.0, {}};
    double rho = 0.0;
    double rho_perp = 1.0;
    long n_steps = 0;
    double dt = 0.0;
    Scheme scheme = Scheme::full_truncation;
    double y0 = 0.0;
};

inline void run_chunk(const SimSetup& su, std::uint64_t seed, long first_path,
                      long count, std::vector<GridStats>& acc) {
    const double sqrt_dt = std::sqrt(su.dt);
    const double nu = su.spec.nu;
    const double T = su.spec.maturity;
    for (long p = 0; p < count; ++p) {
        PathRng rng(seed, static_cast<std::uint64_t>(first_path + p));
        PathState st;
        st.y = su.y0;
        if (su.with_exposure && su.spec.kind == ExposureKind::lognormal) st.v = su.spec.v0;
        double lam = (su.clip_lambda ? std::max(st.y, 0.0) : st.y) + su.psi[0];
        std::size_t next_rec = 0;
        for (long k = 0; k <= su.n_steps; ++k) {
            if (next_rec < su.grid_step.size() && su.grid_step[next_rec] == k) {
                GridStats& g = acc[next_rec];
                const double s = std::exp(-st.integral_y);
                const double vpos = std::max(st.v, 0.0);
                g.v += st.v;
                g.v2 += st.v * st.v;
                g.vpos += vpos;
                g.lambda += lam;
                g.s += s;
                g.lambda_s += lam * s;
                g.vpos_lambda_s += vpos * lam * s;
                ++next_rec;
            }
            if (k == su.n_steps) break;

            const double z_l = rng.next_normal();
            double z_v = 0.0;
            if (su.with_exposure) {
                const double z_p = rng.next_normal();
                z_v = su.rho * z_l + su.rho_perp * z_p;
            }

            switch (su.family) {
                case Family::ou:
                    st.y += su.ou.kappa * (su.ou.theta_ltm - st.y) * su.dt +
                            su.ou.sigma * sqrt_dt * z_l;
                    break;
                case Family::cir:
                    st.y = step_cir(st.y, z_l, su.cir, su.dt, su.scheme);
                    break;
                case Family::jcir:
                    st.y = step_cir(st.y, z_l, su.jcir.cir, su.dt, su.scheme);
                    st.pending_jump = simulate_jcir_increment(su.jcir, su.dt, rng);
                    st.y += st.pending_jump;
                    break;
            }
            const double lam_new =
                (su.clip_lambda ? std::max(st.y, 0.0) : st.y) + su.psi[k + 1];
            st.integral_y += 0.5 * (lam + lam_new) * su.dt;
            lam = lam_new;

            if (su.with_exposure) {
                const double t = k * su.dt;
                switch (su.spec.kind) {
                    case ExposureKind::forward:
                        st.v += nu * sqrt_dt * z_v;
                        break;
                    case ExposureKind::swap:
                        st.v += (su.spec.gamma_v * (T - t) - st.v / (T - t)) * su.dt +
                                nu * sqrt_dt * z_v;
                        break;
                    case ExposureKind::lognormal:
                        st.v *= std::exp((su.alpha[k] - 0.5 * nu * nu) * su.dt +
                                         nu * sqrt_dt * z_v);
                        break;
                }
            }
        }
    }
}

inline SimulationResult run(const SimulationPlan& plan, const ShiftedAffineModel& model,
                            const ExposureSpec* spec) {
    plan.validate();
    SimSetup su;
    std::visit(
        [&](const auto& q) {
            using T = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<T, OUParams>) {
                su.family = Family::ou;
                su.ou = q;
                su.clip_lambda = false;
            } else if constexpr (std::is_same_v<T, CIRParams>) {
                su.family = Family::cir;
                su.cir = q;
            } else {
                su.family = Family::jcir;
                su.jcir = q;
            }
            q.validate();
        },
        model.base);
    su.y0 = initial_value(model.base);
    su.n_steps = plan.step_of(plan.grid.back());
    su.dt = plan.dt;
    su.scheme = plan.scheme;
    su.rho = plan.corr.rho;
    su.rho_perp = std::sqrt(std::max(0.0, 1.0 - su.rho * su.rho));
    su.psi.resize(su.n_steps + 1);
    for (long k = 0; k <= su.n_steps; ++k) su.psi[k] = model.shift.psi(k * plan.dt);
    su.grid_step.reserve(plan.grid.size());
    for (double t : plan.grid) su.grid_step.push_back(plan.step_of(t));
    if (spec) {
        spec->validate();
        su.with_exposure = true;
        su.spec = *spec;
        if (su.spec.kind == ExposureKind::swap &&
            plan.grid.back() > su.spec.maturity + 1e-12)
            throw std::range_error("simulate_paths: swap exposure stepped past maturity");
        if (su.spec.kind == ExposureKind::lognormal) {
            su.alpha.assign(su.n_steps, 0.0);
            if (su.spec.alpha_fn)
                for (long k = 0; k < su.n_steps; ++k) su.alpha[k] = su.spec.alpha_fn(k * plan.dt);
        }
    }

    // Fixed-size chunks, never crossing batch boundaries; chunk c of batch b is
    // always the same set of paths, so merging slots in order is deterministic.
    constexpr long kChunk = 4096;
    struct Task {
        int batch;
        long first;   // global path index
        long count;
    };
    std::vector<Task> tasks;
    for (int b = 0; b < plan.n_batches; ++b) {
        const long base = static_cast<long>(b) * plan.n_paths;
        for (long off = 0; off < plan.n_paths; off += kChunk)
            tasks.push_back({b, base + off, std::min(kChunk, plan.n_paths - off)});
    }
    std::vector<std::vector<GridStats>> slots(
        tasks.size(), std::vector<GridStats>(plan.grid.size()));

    unsigned n_workers = plan.threads == 0
                             ? std::max(1u, std::thread::hardware_concurrency())
                             : static_cast<unsigned>(plan.threads);
    n_workers = std::min<unsigned>(n_workers, static_cast<unsigned>(tasks.size()));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1))
            run_chunk(su, plan.seed, tasks[i].first, tasks[i].count, slots[i]);
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    SimulationResult out;
    out.grid = plan.grid;
    out.paths_per_batch = plan.n_paths;
    out.batch_stats.assign(plan.n_batches, std::vector<GridStats>(plan.grid.size()));
    for (std::size_t i = 0; i < tasks.size(); ++i)
        for (std::size_t gi = 0; gi < plan.grid.size(); ++gi)
            out.batch_stats[tasks[i].batch][gi].merge(slots[i][gi]);
    return out;
}

} // namespace detail

/// Correlated (V, lambda) simulation on the plan grid.
inline SimulationResult simulate_paths(const SimulationPlan& plan,
                                       const ShiftedAffineModel& model,
                                       const ExposureSpec& spec) {
    return detail::run(plan, model, &spec);
}

/// Intensity-only simulation (survival fits, bond oracles).
inline SimulationResult simulate_intensity(const SimulationPlan& plan,
                                           const ShiftedAffineModel& model) {
    return detail::run(plan, model, nullptr);
}

/// EPE(t) = E[V+ lambda S] / (h(t) G(t)) with the given denominator values.
inline EstimateWithCI epe_wwr_mc_weighted(const SimulationResult& r, double t,
                                          double hazard_t, double survival_t) {
    const double hg = hazard_t * survival_t;
    if (!(hg > 0.0))
        throw std::domain_error("epe_wwr_mc: degenerate curve, h(t)G(t) = 0 at t=" +
                                std::to_string(t));
    const std::size_t gi = r.grid_index(t);
    std::vector<double> vals = r.batch_means(gi, &GridStats::vpos_lambda_s);
    for (double& x : vals) x /= hg;
    return make_estimate(vals);
}

inline EstimateWithCI epe_wwr_mc(const SimulationResult& r, const SurvivalCurve& curve,
                                 double t) {
    return epe_wwr_mc_weighted(r, t, curve.hazard(t), curve.survival(t));
}

/// Batch-mean of S_t = e^{-Lambda_t}.
inline EstimateWithCI mean_survival(const SimulationResult& r, double t) {
    return make_estimate(r.batch_means(r.grid_index(t), &GridStats::s));
}

/// Batch-mean of zeta_t = lambda_t S_t / (h(t) G(t)); unit expectation when
/// the curve matches the model.
inline EstimateWithCI zeta_mean_weighted(const SimulationResult& r, double t,
                                         double hazard_t, double survival_t) {
    const double hg = hazard_t * survival_t;
    if (!(hg > 0.0))
        throw std::domain_error("zeta_mean: degenerate curve at t=" + std::to_string(t));
    std::vector<double> vals = r.batch_means(r.grid_index(t), &GridStats::lambda_s);
    for (double& x : vals) x /= hg;
    return make_estimate(vals);
}

inline EstimateWithCI zeta_mean(const SimulationResult& r, const SurvivalCurve& curve,
                                double t) {
    return zeta_mean_weighted(r, t, curve.hazard(t), curve.survival(t));
}

/// CVA in upfront bps: (1-R) trapezoid of E[V+ lambda S] over the grid,
/// which equals -(1-R) int EPE dG without dividing and re-multiplying by hG.
inline EstimateWithCI mc_cva(const SimulationResult& r, double recovery) {
    if (!(recovery >= 0.0 && recovery < 1.0))
        throw std::invalid_argument("mc_cva: recovery must be in [0,1)");
    std::vector<double> vals(r.batch_stats.size());
    for (std::size_t b = 0; b < r.batch_stats.size(); ++b) {
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < r.grid.size(); ++i) {
            const double f0 = r.batch_stats[b][i].vpos_lambda_s;
            const double f1 = r.batch_stats[b][i + 1].vpos_lambda_s;
            acc += 0.5 * (f0 + f1) * (r.grid[i + 1] - r.grid[i]);
        }
        vals[b] = acc / static_cast<double>(r.paths_per_batch);
    }
    for (double& x : vals) x *= (1.0 - recovery) * 1e4;
    return make_estimate(vals);
}

/// Sample mean/variance of the exposure at t, pooled over all batches.
struct MomentEstimate {
    double mean = 0.0;
    double var = 0.0;
    long n = 0;
};

inline MomentEstimate exposure_moments(const SimulationResult& r, double t) {
    const GridStats g = r.pooled(r.grid_index(t));
    const long n = r.total_paths();
    const double mean = g.v / static_cast<double>(n);
    const double var = g.v2 / static_cast<double>(n) - mean * mean;
    return {mean, var, n};
}

/// Gaussian-copula EPE at t given the survival level G(t).
inline double copula_epe(const ExposureSpec& spec, double survival_t, double rho, double t) {
    CorrelationSpec{rho}.validate();
    const GaussianLaw q = q_law(spec, t);
    if (!(q.stdev > 0.0)) return std::max(q.mean, 0.0);
    if (!(survival_t > 0.0 && survival_t < 1.0))
        throw std::domain_error("copula_epe: need 0 < G(t) < 1, got G=" +
                                std::to_string(survival_t));
    const double mean_rho = q.mean + rho * q.stdev * norm_quantile(survival_t);
    const double stdev_rho = q.stdev * std::sqrt(1.0 - rho * rho);
    if (!(stdev_rho > 0.0)) return std::max(mean_rho, 0.0);  // |rho| = 1
    return gaussian_epe({mean_rho, stdev_rho});
}

inline double copula_epe(const ExposureSpec& spec, const SurvivalCurve& curve, double rho,
                         double t) {
    return copula_epe(spec, curve.survival(t), rho, t);
}

} // namespace wwr
