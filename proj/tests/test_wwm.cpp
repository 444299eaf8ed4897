#include "wwr/wwm.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "oracle_helpers.hpp"

using namespace wwr;

namespace {

ShiftedAffineModel set2_model() {
    return {table1_set(2), ShiftFunction::zero()};
}

DriftAdjustment set2_adjustment(double rho,
                                DriftProxy proxy = DriftProxy::hazard) {
    return DriftAdjustment(set2_model(), proxy, 0.08, CorrelationSpec{rho});
}

} // namespace

TEST(DriftAdjustment, ZeroCorrelationIsZero) {
    const DriftAdjustment adj = set2_adjustment(0.0);
    EXPECT_DOUBLE_EQ(adj.theta(1.0, 3.0), 0.0);
    EXPECT_DOUBLE_EQ(adj.integrated(3.0), 0.0);
    EXPECT_DOUBLE_EQ(adj.integrated_bridge(3.0, 5.0), 0.0);
    const ExposureSpec f = ExposureSpec::forward_type(0.08, 3.0);
    EXPECT_DOUBLE_EQ(epe_wwm(f, adj, 2.0), q_epe(f, 2.0));
}

TEST(DriftAdjustment, DiagonalClosedForm) {
    const DriftAdjustment adj = set2_adjustment(0.8);
    const ShiftedAffineModel m = set2_model();
    for (double t : {0.5, 2.0}) {
        const double lam = m.hazard0(t);
        const double expected = 0.8 * 0.08 * m.diffusion(lam) / lam;
        EXPECT_NEAR(adj.theta(t, t), expected, 1e-12);
    }
}

TEST(DriftAdjustment, MatchesOdeOracle) {
    // Rebuild theta(1,3) from scratch: coefficients by RK4, their t-derivative
    // and the hazard proxy by central differences of RK4 quantities.
    const CIRParams p = table1_set(2);
    const double s = 1.0, t = 3.0, rho = 0.8, beta = 0.08;

    const oracle::Bond b = oracle::rk4_cir(p, t - s);
    const double A_t = oracle::central_diff(
        [&](double tau) { return oracle::rk4_cir(p, tau).A; }, t - s, 1e-5);
    const double B_t = oracle::central_diff(
        [&](double tau) { return oracle::rk4_cir(p, tau).B; }, t - s, 1e-5);
    const double lam = -oracle::central_diff(
        [&](double u) { return std::log(oracle::rk4_bond_price(AffineParams{p}, u)); },
        s, 1e-4);
    const double sig = p.sigma * std::sqrt(lam);
    const double expected =
        rho * beta * sig * (b.A * B_t / (b.A * B_t * lam - A_t) - b.B);

    EXPECT_NEAR(set2_adjustment(rho).theta(s, t), expected, 1e-8);
}

TEST(DriftAdjustment, IntegralMatchesAdaptiveQuadrature) {
    const DriftAdjustment adj = set2_adjustment(0.8);
    const double direct = oracle::adaptive_simpson(
        [&](double u) { return adj.theta(u, 3.0); }, 0.0, 3.0, 1e-11);
    EXPECT_NEAR(adj.integrated(3.0), direct, 1e-7);

    const double bridge_direct =
        (3.0 - 5.0) * oracle::adaptive_simpson(
                          [&](double u) { return adj.theta(u, 3.0) / (u - 5.0); },
                          0.0, 3.0, 1e-11);
    EXPECT_NEAR(adj.integrated_bridge(3.0, 5.0), bridge_direct, 1e-7);
}

TEST(DriftAdjustment, BridgeRequiresTimeBeforeMaturity) {
    const DriftAdjustment adj = set2_adjustment(0.8);
    EXPECT_THROW(adj.integrated_bridge(5.0, 5.0), std::range_error);
    EXPECT_THROW(adj.integrated_bridge(6.0, 5.0), std::range_error);
}

TEST(DriftAdjustment, SignTracksCorrelation) {
    const DriftAdjustment pos = set2_adjustment(0.8);
    const DriftAdjustment neg = set2_adjustment(-0.8);
    for (double t : {0.5, 1.5, 3.0}) {
        EXPECT_GT(pos.integrated(t), 0.0);
        EXPECT_NEAR(neg.integrated(t), -pos.integrated(t), 1e-14);
    }
    EXPECT_GT(pos.integrated(3.0), pos.integrated(1.0));   // accumulates over time
}

TEST(DriftAdjustment, ProxiesStayCloseWhenVolIsModerate) {
    for (int set : {1, 2, 3}) {
        const ShiftedAffineModel m{table1_set(set), ShiftFunction::zero()};
        const DriftAdjustment h(m, DriftProxy::hazard, 0.08, CorrelationSpec{0.8});
        const DriftAdjustment mean(m, DriftProxy::mean_intensity, 0.08,
                                   CorrelationSpec{0.8});
        for (double t : {1.0, 3.0})
            EXPECT_NEAR(h.integrated(t), mean.integrated(t), 2e-3) << "set " << set;
    }
    // The high-vol set is the one where the proxy choice shows up.
    const ShiftedAffineModel m4{table1_set(4), ShiftFunction::zero()};
    const DriftAdjustment h4(m4, DriftProxy::hazard, 0.08, CorrelationSpec{0.8});
    const DriftAdjustment mean4(m4, DriftProxy::mean_intensity, 0.08,
                                CorrelationSpec{0.8});
    EXPECT_GT(std::fabs(h4.integrated(3.0) - mean4.integrated(3.0)), 2e-3);
}

TEST(DriftAdjustment, FlooredProxyIsFlagged) {
    // Force lambda(0) = 0 with a shift that cancels y0, then ask for theta(0,0).
    const ShiftedAffineModel m{table1_set(2), ShiftFunction({0.0, 5.0}, {-0.035})};
    const DriftAdjustment adj(m, DriftProxy::hazard, 0.08, CorrelationSpec{0.8});
    EXPECT_FALSE(adj.floored_proxy());
    const double v = adj.theta(0.0, 0.0);
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_TRUE(adj.floored_proxy());
}

TEST(DriftAdjustment, NegativeProxyIsClippedAndFlagged) {
    const ShiftedAffineModel m{table1_set(2), ShiftFunction({0.0, 5.0}, {-0.05})};
    const DriftAdjustment adj(m, DriftProxy::mean_intensity, 0.08,
                              CorrelationSpec{0.8});
    EXPECT_FALSE(adj.clipped_negative());
    EXPECT_DOUBLE_EQ(adj.theta(1.0, 2.0), 0.0);   // sigma sqrt(max(lam,0)) = 0
    EXPECT_TRUE(adj.clipped_negative());
}

TEST(DriftAdjustment, Validation) {
    EXPECT_THROW(CorrelationSpec{1.5}.validate(), std::invalid_argument);
    EXPECT_THROW(DriftAdjustment(set2_model(), DriftProxy::hazard,
                                 std::function<double(double)>{}, CorrelationSpec{0.5}),
                 std::invalid_argument);
    EXPECT_NO_THROW(CorrelationSpec{-1.0}.validate());
}

TEST(WwmLaw, ForwardShiftsMeanOnly) {
    const DriftAdjustment adj = set2_adjustment(0.8);
    const ExposureSpec f = ExposureSpec::forward_type(0.08, 3.0);
    const GaussianLaw law = wwm_gaussian_law(f, adj, 2.0);
    const GaussianLaw q = q_law(f, 2.0);
    EXPECT_DOUBLE_EQ(law.stdev, q.stdev);
    EXPECT_NEAR(law.mean - q.mean, adj.integrated(2.0), 1e-15);

    const GaussianLaw zero = wwm_gaussian_law(f, set2_adjustment(0.0), 2.0);
    EXPECT_DOUBLE_EQ(zero.mean, q.mean);
}

TEST(WwmLaw, SwapUsesBridgeWeightAndCollapsesAtMaturity) {
    const DriftAdjustment adj = set2_adjustment(0.8);
    const ExposureSpec s = ExposureSpec::swap_type(0.08, 0.001, 5.0);
    const GaussianLaw law = wwm_gaussian_law(s, adj, 3.0);
    EXPECT_NEAR(law.mean - q_law(s, 3.0).mean, adj.integrated_bridge(3.0, 5.0), 1e-15);
    const GaussianLaw at_T = wwm_gaussian_law(s, adj, 5.0);
    EXPECT_DOUBLE_EQ(at_T.mean, 0.0);
    EXPECT_DOUBLE_EQ(at_T.stdev, 0.0);
    EXPECT_DOUBLE_EQ(epe_wwm(s, adj, 5.0), 0.0);
    EXPECT_THROW(wwm_gaussian_law(ExposureSpec::lognormal_type(1.0, 0.1, 3.0), adj, 1.0),
                 std::invalid_argument);
}

TEST(EpeWwm, OrderedInCorrelation) {
    const ExposureSpec f = ExposureSpec::forward_type(0.08, 3.0);
    const double up = epe_wwm(f, set2_adjustment(0.8), 2.0);
    const double flat = epe_wwm(f, set2_adjustment(0.0), 2.0);
    const double down = epe_wwm(f, set2_adjustment(-0.8), 2.0);
    EXPECT_GT(up, flat);
    EXPECT_GT(flat, down);
    EXPECT_GT(down, 0.0);
}

TEST(EpeWwm, LognormalCompoundsTheAdjustment) {
    const ExposureSpec l = ExposureSpec::lognormal_type(100.0, 0.08, 3.0);
    const DriftAdjustment adj = set2_adjustment(0.8);
    EXPECT_DOUBLE_EQ(epe_wwm(l, adj, 0.0), 100.0);
    EXPECT_NEAR(epe_wwm(l, adj, 2.0), 100.0 * std::exp(adj.integrated(2.0)), 1e-10);
    EXPECT_GT(epe_wwm(l, adj, 2.0), 100.0);
}

TEST(DriftAdjustment, FreeFunctionsAgreeWithClass) {
    const DriftAdjustment adj = set2_adjustment(0.8);
    const double direct = drift_adjustment(set2_model(), DriftProxy::hazard,
                                           [](double) { return 0.08; },
                                           CorrelationSpec{0.8}, 1.0, 3.0);
    EXPECT_DOUBLE_EQ(direct, adj.theta(1.0, 3.0));
    EXPECT_DOUBLE_EQ(integrated_adjustment(adj, 2.0), adj.integrated(2.0));
    EXPECT_DOUBLE_EQ(integrated_adjustment_bridge(adj, 2.0, 5.0),
                     adj.integrated_bridge(2.0, 5.0));
}
