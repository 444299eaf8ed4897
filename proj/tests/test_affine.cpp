#include "wwr/affine.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracle_helpers.hpp"
#include "wwr/mc.hpp"
#include "wwr/termstructure.hpp"

using namespace wwr;

namespace {

double bond_price(const AffineParams& p, double s, double t) {
    const AffineCoeffs c = base_coeffs(p, s, t);
    return c.A * std::exp(-c.B * initial_value(p));
}

} // namespace

TEST(AffineCoeffs, IdentityAtZeroTau) {
    std::mt19937 gen(20240817);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double kappa = 0.05 + 0.95 * u(gen);
        const double theta = 0.005 + 0.2 * u(gen);
        const double sigma = 0.01 + 0.6 * u(gen);
        const double y0 = 0.001 + 0.1 * u(gen);
        const double s = 5.0 * u(gen);
        const AffineParams fams[] = {
            OUParams{kappa, theta, sigma, y0},
            CIRParams{kappa, theta, sigma, y0},
            JCIRParams{{kappa, theta, sigma, y0}, 0.3 * u(gen), 0.01 + 0.3 * u(gen)},
        };
        for (const AffineParams& p : fams) {
            const AffineCoeffs c = base_coeffs(p, s, s);
            EXPECT_DOUBLE_EQ(c.A, 1.0);
            EXPECT_DOUBLE_EQ(c.B, 0.0);
            EXPECT_DOUBLE_EQ(c.A_t, 0.0);
            EXPECT_DOUBLE_EQ(c.B_t, 1.0);
        }
        const ShiftFunction shift({0.0, 10.0}, {0.01});
        const ShiftedAffineModel m{fams[1], shift};
        const AffineCoeffs c = m.coeffs(s, s);
        EXPECT_DOUBLE_EQ(c.A, 1.0);
        EXPECT_DOUBLE_EQ(c.B, 0.0);
        EXPECT_NEAR(c.A_t, 0.0, 1e-15);
        EXPECT_DOUBLE_EQ(c.B_t, 1.0);
    }
}

TEST(AffineCoeffs, OrderingIsEnforced) {
    const CIRParams p = table1_set(2);
    EXPECT_THROW(cir_coeffs(p, 2.0, 1.0), std::invalid_argument);
    EXPECT_THROW(cir_coeffs(p, -0.5, 1.0), std::invalid_argument);
}

TEST(OUCoeffs, KnownB) {
    const OUParams p{0.5, 0.04, 0.1, 0.02};
    const AffineCoeffs c = ou_coeffs(p, 0.0, 2.0);
    EXPECT_NEAR(c.B, 2.0 * (1.0 - std::exp(-1.0)), 1e-14);
    EXPECT_NEAR(c.B_t, std::exp(-1.0), 1e-14);
}

TEST(OUCoeffs, MatchesRk4) {
    const OUParams p{0.3, 0.04, 0.1, 0.02};
    const oracle::Bond b = oracle::rk4_ou(p, 4.0);
    const AffineCoeffs c = ou_coeffs(p, 0.0, 4.0);
    EXPECT_NEAR(c.B, b.B, 1e-10);
    EXPECT_NEAR(c.A / b.A, 1.0, 1e-10);
}

TEST(OUCoeffs, DerivativesMatchLogFiniteDifference) {
    const OUParams p{0.3, 0.04, 0.1, 0.02};
    auto lnA = [&](double t) { return std::log(ou_coeffs(p, 0.0, t).A); };
    auto B = [&](double t) { return ou_coeffs(p, 0.0, t).B; };
    const AffineCoeffs c = ou_coeffs(p, 0.0, 2.0);
    EXPECT_NEAR(c.A_t / c.A, oracle::central_diff(lnA, 2.0, 1e-3), 1e-6);
    EXPECT_NEAR(c.B_t, oracle::central_diff(B, 2.0, 1e-3), 1e-6);
}

TEST(CIRCoeffs, MatchesRk4AcrossBenchmarkSets) {
    for (int set = 1; set <= 4; ++set) {
        const CIRParams p = table1_set(set);
        for (double t : {0.5, 3.0, 5.0}) {
            const oracle::Bond b = oracle::rk4_cir(p, t);
            const AffineCoeffs c = cir_coeffs(p, 0.0, t);
            EXPECT_NEAR(c.B, b.B, 1e-10) << "set " << set << " t " << t;
            EXPECT_NEAR(c.A / b.A, 1.0, 1e-10) << "set " << set << " t " << t;
        }
    }
}

TEST(CIRCoeffs, TinySigmaReachesDeterministicLimit) {
    const CIRParams p{0.35, 0.045, 1e-8, 0.035};
    const double tau = 3.0;
    const AffineCoeffs c = cir_coeffs(p, 0.0, tau);
    const double B0 = (1.0 - std::exp(-p.kappa * tau)) / p.kappa;
    const double limit = std::exp(-p.y0 * B0 - p.theta_ltm * (tau - B0));
    EXPECT_NEAR(c.B, B0, 1e-10);
    EXPECT_NEAR(c.A * std::exp(-c.B * p.y0) / limit, 1.0, 1e-10);
}

TEST(CIRCoeffs, DerivativesMatchFiniteDifferences) {
    const AffineParams fams[] = {
        AffineParams{OUParams{0.4, 0.03, 0.12, 0.025}},
        AffineParams{CIRParams{table1_set(2)}},
        AffineParams{CIRParams{table1_set(4)}},
        AffineParams{JCIRParams{table1_set(2), 0.1, 0.1}},
    };
    const double s = 0.5;
    for (const AffineParams& p : fams) {
        for (double t : {1.0, 2.5, 5.0}) {
            auto A = [&](double x) { return base_coeffs(p, s, x).A; };
            auto B = [&](double x) { return base_coeffs(p, s, x).B; };
            const AffineCoeffs c = base_coeffs(p, s, t);
            const double fdA = oracle::central_diff(A, t, 1e-5);
            const double fdB = oracle::central_diff(B, t, 1e-5);
            EXPECT_NEAR(c.A_t / fdA, 1.0, 1e-5) << "t " << t;
            EXPECT_NEAR(c.B_t / fdB, 1.0, 1e-5) << "t " << t;
        }
    }
}

TEST(CIRCoeffs, BondDecreasesInMaturityAndState) {
    const CIRParams p = table1_set(3);
    double prev = 1.0;
    for (double t = 0.5; t <= 10.0; t += 0.5) {
        const double b = bond_price(p, 0.0, t);
        EXPECT_LT(b, prev);
        EXPECT_GT(cir_coeffs(p, 0.0, t).B, 0.0);
        prev = b;
    }
}

TEST(JCIRCoeffs, NoJumpsReducesToCIR) {
    const JCIRParams p{table1_set(2), 0.0, 0.1};
    for (double t : {0.5, 3.0, 7.0}) {
        const AffineCoeffs j = jcir_coeffs(p, 0.0, t);
        const AffineCoeffs c = cir_coeffs(p.cir, 0.0, t);
        EXPECT_DOUBLE_EQ(j.A, c.A);
        EXPECT_DOUBLE_EQ(j.B, c.B);
        EXPECT_DOUBLE_EQ(j.A_t, c.A_t);
        EXPECT_DOUBLE_EQ(j.B_t, c.B_t);
    }
}

TEST(JCIRCoeffs, MatchesRk4) {
    // One case per sign of sigma^2 - 2 kappa gamma - 2 gamma^2, including the
    // exact cancellation, which is where naive closed forms lose digits.
    const JCIRParams cases[] = {
        {table1_set(2), 0.10, 0.10},                  // negative
        {{0.35, 0.045, 0.3, 0.035}, 0.20, 0.10},      // exactly zero
        {{0.35, 0.05, 0.5, 0.03}, 0.15, 0.10},        // positive
    };
    for (const JCIRParams& p : cases) {
        for (double t : {1.0, 4.0}) {
            const oracle::Bond b = oracle::rk4_jcir(p, t);
            const AffineCoeffs c = jcir_coeffs(p, 0.0, t);
            EXPECT_NEAR(c.B, b.B, 1e-10);
            EXPECT_NEAR(c.A / b.A, 1.0, 1e-10);
        }
    }
}

TEST(ShiftedModel, ZeroShiftMatchesBase) {
    const ShiftedAffineModel m{table1_set(2), ShiftFunction::zero()};
    const AffineCoeffs c = m.coeffs(0.7, 3.1);
    const AffineCoeffs base = cir_coeffs(table1_set(2), 0.7, 3.1);
    EXPECT_DOUBLE_EQ(c.A, base.A);
    EXPECT_DOUBLE_EQ(c.A_t, base.A_t);
    EXPECT_DOUBLE_EQ(m.initial_intensity(), 0.035);
}

TEST(ShiftedModel, ConstantShiftScalesBond) {
    const double shift_level = 0.012;
    const ShiftedAffineModel m{table1_set(2), ShiftFunction({0.0, 6.0}, {shift_level})};
    for (double t : {1.0, 3.7}) {
        const double base = bond_price(table1_set(2), 0.0, t);
        EXPECT_NEAR(m.bond0(t) / (base * std::exp(-shift_level * t)), 1.0, 1e-12);
    }
    const AffineCoeffs base = cir_coeffs(table1_set(2), 1.2, 4.0);
    const AffineCoeffs c = m.coeffs(1.2, 4.0);
    EXPECT_NEAR(c.A, base.A * std::exp(base.B * shift_level - shift_level * 2.8), 1e-14);
    EXPECT_DOUBLE_EQ(c.B, base.B);
}

TEST(ShiftedModel, CalibratedShiftReproducesMarket) {
    const CIRParams base = table1_set(3);
    auto model_bond = [&](double t) { return bond_price(base, 0.0, t); };
    const SurvivalCurve market =
        SurvivalCurve::sample([](double t) { return std::exp(-0.05 * t); }, 5.0, 0.5);
    const ShiftFunction psi = calibrate_shift(model_bond, market);
    EXPECT_FALSE(psi.has_negative_psi());   // market hazard sits above the model's
    const ShiftedAffineModel m{base, psi};
    for (double t : market.grid())
        EXPECT_NEAR(m.bond0(t) / market.survival(t), 1.0, 1e-10) << "t=" << t;
}

TEST(ShiftedModel, Hazard0MatchesFiniteDifference) {
    const ShiftedAffineModel models[] = {
        {table1_set(2), ShiftFunction::zero()},
        {OUParams{0.4, 0.03, 0.12, 0.025}, ShiftFunction::zero()},
        {JCIRParams{table1_set(2), 0.1, 0.1}, ShiftFunction::zero()},
        {table1_set(2), ShiftFunction({0.0, 1.0, 6.0}, {0.01, 0.004})},
    };
    for (const ShiftedAffineModel& m : models) {
        auto lng = [&](double t) { return std::log(m.bond0(t)); };
        // t = 1.3 stays inside one shift interval, so the difference quotient
        // never straddles a hazard jump.
        EXPECT_NEAR(m.hazard0(1.3), -oracle::central_diff(lng, 1.3, 1e-4), 1e-6);
        EXPECT_NEAR(m.hazard0(0.0), m.initial_intensity(), 1e-12);
    }
}

TEST(ShiftedModel, BondEndpoints) {
    const ShiftedAffineModel m{table1_set(1), ShiftFunction({0.0, 8.0}, {0.002})};
    EXPECT_DOUBLE_EQ(m.bond(2.0, 2.0, 0.05), 1.0);
    EXPECT_DOUBLE_EQ(m.bond(0.0, 3.0, m.initial_intensity()), m.bond0(3.0));
}

TEST(MeanIntensity, StartsAtInitialIntensityAndDecaysToLongTermMean) {
    const ShiftFunction shift({0.0, 60.0}, {0.004});
    const AffineParams fams[] = {
        AffineParams{OUParams{0.4, 0.03, 0.12, 0.025}},
        AffineParams{CIRParams{table1_set(2)}},
        AffineParams{JCIRParams{table1_set(2), 0.1, 0.1}},
    };
    for (const AffineParams& p : fams) {
        EXPECT_NEAR(mean_intensity(p, shift, 0.0), initial_value(p) + 0.004, 1e-14);
        const double jump = std::holds_alternative<JCIRParams>(p)
                                ? 0.1 * 0.1 / table1_set(2).kappa
                                : 0.0;
        double theta = std::visit(
            [](const auto& q) {
                if constexpr (std::is_same_v<std::decay_t<decltype(q)>, JCIRParams>)
                    return q.cir.theta_ltm;
                else
                    return q.theta_ltm;
            },
            p);
        EXPECT_NEAR(mean_intensity(p, shift, 50.0), theta + jump + 0.004, 1e-7);
    }
}

TEST(MeanIntensity, KnownValueSet1) {
    const AffineParams p{table1_set(1)};
    EXPECT_NEAR(mean_intensity(p, ShiftFunction::zero(), 3.0), 0.0376288, 5e-7);
    const double exact = 0.03 * std::exp(-0.06) + 0.161 * (1.0 - std::exp(-0.06));
    EXPECT_NEAR(mean_intensity(p, ShiftFunction::zero(), 3.0), exact, 1e-15);
}

TEST(Params, Table1SetsAndFellerMargins) {
    EXPECT_DOUBLE_EQ(table1_set(1).kappa, 0.02);
    EXPECT_DOUBLE_EQ(table1_set(1).theta_ltm, 0.161);
    EXPECT_DOUBLE_EQ(table1_set(2).sigma, 0.15);
    EXPECT_DOUBLE_EQ(table1_set(3).y0, 0.01);
    EXPECT_DOUBLE_EQ(table1_set(4).sigma, 0.5);
    EXPECT_THROW(table1_set(0), std::invalid_argument);
    EXPECT_THROW(table1_set(5), std::invalid_argument);

    EXPECT_NEAR(table1_set(1).feller_margin(), 4.0e-5, 1e-12);
    EXPECT_GT(table1_set(2).feller_margin(), 0.0);
    EXPECT_LT(table1_set(3).feller_margin(), 0.0);
    EXPECT_LT(table1_set(4).feller_margin(), 0.0);
}

TEST(Params, ValidationRejectsBadInput) {
    EXPECT_THROW((CIRParams{-0.1, 0.04, 0.1, 0.02}).validate(), std::invalid_argument);
    EXPECT_THROW((CIRParams{0.3, 0.04, 0.0, 0.02}).validate(), std::invalid_argument);
    EXPECT_THROW((CIRParams{0.3, 0.04, 0.1, -0.02}).validate(), std::invalid_argument);
    EXPECT_THROW((OUParams{0.0, 0.04, 0.1, 0.02}).validate(), std::invalid_argument);
    EXPECT_THROW((JCIRParams{table1_set(2), -0.1, 0.1}).validate(), std::invalid_argument);
    EXPECT_THROW((JCIRParams{table1_set(2), 0.1, 0.0}).validate(), std::invalid_argument);
    EXPECT_NO_THROW((OUParams{0.3, -0.01, 0.0, -0.05}).validate());
    EXPECT_NO_THROW(validate(AffineParams{table1_set(4)}));
}

// Simulation cross-check of the jump-extended closed form: the discounted
// survival E[e^{-int lambda}] and the mean intensity must match the analytic
// values within Monte Carlo noise plus a small Euler allowance.
TEST(JCIRCoeffs, SlowBondAndMeanMatchSimulation) {
    const JCIRParams p{table1_set(2), 0.10, 0.10};
    const ShiftedAffineModel model{p, ShiftFunction::zero()};

    SimulationPlan plan;
    plan.n_paths = 40000;
    plan.n_batches = 10;
    plan.dt = 0.002;
    plan.seed = 7;
    plan.threads = 0;
    plan.grid = {3.0};
    const SimulationResult r = simulate_intensity(plan, model);

    const EstimateWithCI bond = mean_survival(r, 3.0);
    const double se_bond = bond.half_width / 2.0 / std::sqrt(10.0);
    EXPECT_NEAR(bond.value, model.bond0(3.0), 3.0 * se_bond + 1e-4);

    const EstimateWithCI lam =
        make_estimate(r.batch_means(r.grid_index(3.0), &GridStats::lambda));
    const double se_lam = lam.half_width / 2.0 / std::sqrt(10.0);
    EXPECT_NEAR(lam.value, model.mean_intensity(3.0), 3.0 * se_lam + 2e-4);
}
