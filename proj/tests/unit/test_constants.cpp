#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "chemolab/constants.hpp"

using namespace chemolab;

namespace {

constexpr double kPi = std::numbers::pi;

CalibrationConstants cal_for(double a, int dim) {
    return CalibrationConstants::defaults(a, dim, 1.0 / std::sqrt(kPi), "test");
}

// Radial quadrature oracle: |S^{N−1}| ∫_R^∞ r^{m+N−1} e^{−r²} dr.
double tail_by_quadrature(double R, int dim, int m) {
    const double area = dim == 1 ? 2.0 : dim == 2 ? 2.0 * kPi : 4.0 * kPi;
    boost::math::quadrature::exp_sinh<double> integrator;
    const double v = integrator.integrate(
        [&](double s) {
            const double r = R + s;
            if (r * r > 700.0) return 0.0;
            return std::pow(r, m + dim - 1) * std::exp(-r * r);
        },
        1e-15);
    return area * v;
}

}  // namespace

TEST(ComputeConstants, UnitCoefficients) {
    const Params p{1, 1, 1, 1, 1, 1};
    const auto c = compute_constants(p, cal_for(1.0, 1));
    EXPECT_DOUBLE_EQ(c.theta, 0.25);
    ASSERT_TRUE(c.bound_general && c.bound_refined && c.lyapunov_bound);
    EXPECT_DOUBLE_EQ(*c.bound_general, 1.5);
    EXPECT_NEAR(*c.bound_refined, 4.0 / 3.0, 1e-15);
    EXPECT_DOUBLE_EQ(*c.lyapunov_bound, 1.5);
    EXPECT_DOUBLE_EQ(c.steady_u, 1.0);
    EXPECT_DOUBLE_EQ(c.steady_v, 1.0);
    EXPECT_GT(c.K, 0.25);
}

TEST(ComputeConstants, SteadyStateZerosReaction) {
    const Params p{1, 1, 2, 1, 1, 1};
    const auto c = compute_constants(p, cal_for(1.0, 1));
    EXPECT_DOUBLE_EQ(c.steady_u, 0.5);
    EXPECT_DOUBLE_EQ(c.steady_v, 0.5);
}

TEST(ComputeConstants, BoundsUndefinedBelowThreshold) {
    const Params p{1, 1, 0.25, 1, 1, 1};
    const auto c = compute_constants(p, cal_for(1.0, 1));
    EXPECT_FALSE(c.bound_general.has_value());
    EXPECT_FALSE(c.bound_refined.has_value());
    EXPECT_DOUBLE_EQ(c.theta, 1.0);
}

TEST(ComputeConstants, MonotoneDecayInB) {
    double prev_theta = 1e300, prev_g = 1e300, prev_r = 1e300, prev_u = 1e300;
    for (double b : {0.3, 1.0, 3.0, 10.0, 100.0, 1e4}) {
        const auto c = compute_constants(Params{1, 1, b, 1, 1, 1}, cal_for(1.0, 1));
        EXPECT_LT(c.theta, prev_theta);
        EXPECT_LT(*c.bound_general, prev_g);
        EXPECT_LT(*c.bound_refined, prev_r);
        EXPECT_LT(c.steady_u, prev_u);
        prev_theta = c.theta;
        prev_g = *c.bound_general;
        prev_r = *c.bound_refined;
        prev_u = c.steady_u;
    }
    EXPECT_LT(prev_theta, 1e-4);
    EXPECT_LT(prev_g, 1e-3);
}

TEST(ComputeConstants, RefinedBoundNeverExceedsGeneralWhenLambdaLarge) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.05, 20.0);
    for (int trial = 0; trial < 500; ++trial) {
        Params p{u(rng), u(rng), 0.0, 0.0, u(rng), 1 + trial % 3};
        p.lambda = p.a / 2.0 + u(rng);
        p.b = p.dim * p.mu * p.chi / 4.0 + u(rng);
        const auto c = compute_constants(p, cal_for(p.a, p.dim));
        EXPECT_LE(*c.bound_refined, *c.bound_general * (1.0 + 1e-14));
        EXPECT_GT(c.theta, 0.0);
        EXPECT_LT(c.theta, 1.0);
    }
}

TEST(ConvergenceK, SecondConstraintBindsAtUnitCoefficients) {
    // c2 = a = 1: the first constraint allows θ ≈ 0.0718, the second only
    // θ/(1−θ) = 1/(96π).
    const auto r = convergence_K(1.0, 1.0, 1, cal_for(1.0, 1));
    const double ratio = 1.0 / (96.0 * kPi);
    EXPECT_NEAR(r.theta0, ratio / (1.0 + ratio), 1e-12);
    EXPECT_NEAR(r.second_ratio, 1.0, 1e-9);
    EXPECT_LT(r.first_ratio, 1.0);
    EXPECT_NEAR(r.K, 75.64822368615504, 1e-6);
    // residual check by substitution
    const double lhs = 8.0 * 1.0 * kPi * r.theta0 / (1.0 - r.theta0);
    EXPECT_NEAR(lhs, 1.0 / 12.0, 1e-12);
}

TEST(ConvergenceK, ActiveConstraintOnRandomInputs) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.1, 50.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double a = u(rng), lambda = u(rng);
        auto cal = cal_for(a, 1 + trial % 3);
        cal.c2 = u(rng);
        cal.c_generic = u(rng) / 10.0;
        const auto r = convergence_K(a, lambda, 1 + trial % 3, cal);
        EXPECT_GT(r.theta0, 0.0);
        EXPECT_LT(r.theta0, 1.0);
        EXPECT_GT(r.K, (1 + trial % 3) / 4.0);
        EXPECT_LE(r.first_ratio, 1.0);
        EXPECT_LE(r.second_ratio, 1.0);
        EXPECT_NEAR(std::max(r.first_ratio, r.second_ratio), 1.0, 1e-9);
    }
}

TEST(ConvergenceK, TighterConstantsShrinkTheta0) {
    auto cal = cal_for(1.0, 2);
    const auto base = convergence_K(1.0, 3.0, 2, cal);
    cal.c2 *= 2.0;
    cal.c_generic *= 2.0;
    const auto tight = convergence_K(1.0, 3.0, 2, cal);
    EXPECT_LT(tight.theta0, base.theta0);
    EXPECT_GT(tight.K, base.K);
}

TEST(ConvergenceK, LargeLambdaLimitIsTheFirstConstraintRoot) {
    // 2θ/(1−θ)² = 1/6  ⇔  θ² − 14θ + 1 = 0  ⇔  θ = 7 − 4√3.
    const auto r = convergence_K(1.0, 1e6, 1, cal_for(1.0, 1));
    EXPECT_NEAR(r.theta0, 7.0 - 4.0 * std::sqrt(3.0), 1e-12);
    EXPECT_NEAR(r.K, 3.4820508075688773, 1e-9);
    // With the full C₂ structure the lower branch a dominates for large λ.
    EXPECT_DOUBLE_EQ(structured_c2(1.0, 1e6, 1, cal_for(1.0, 1)), 1.0);
    EXPECT_GT(structured_c2(1.0, 1e-3, 1, cal_for(1.0, 1)), 1.0);
}

TEST(PrincipalEigenvalue, AnalyticValues) {
    EXPECT_NEAR(principal_eigenvalue(1.0, 10.0, 1), 0.5 - std::pow(kPi / 20.0, 2), 1e-15);
    EXPECT_NEAR(principal_eigenvalue(1.0, 10.0, 1), 0.4753260, 1e-7);
    EXPECT_NEAR(principal_eigenvalue(1.0, 10.0, 3), 0.4013040, 1e-7);
    for (int n = 1; n <= 3; ++n) {
        const double L0 = bessel_zero(n) * std::sqrt(2.0 / 1.0);
        EXPECT_NEAR(principal_eigenvalue(1.0, L0, n), 0.0, 1e-12);
    }
}

TEST(PrincipalEigenvalue, FiniteDifferenceOracleAgrees) {
    for (int n = 1; n <= 3; ++n) {
        for (double L0 : {2.0, 5.0, 10.0}) {
            const double analytic = principal_eigenvalue(1.0, L0, n);
            const double fd = principal_eigenvalue_fd(1.0, L0, n, 2048);
            EXPECT_NEAR(fd, analytic, 1e-4 * std::abs(analytic)) << "N=" << n << " L0=" << L0;
        }
    }
    EXPECT_NEAR(principal_eigenvalue_fd(1.0, 10.0, 1, 2048), 0.4753260, 1e-6);
}

TEST(MinimalBallRadius, ClampAndInversion) {
    EXPECT_NEAR(minimal_ball_radius(1.0, 1), kPi / std::sqrt(2.0), 1e-8);
    EXPECT_DOUBLE_EQ(minimal_ball_radius(100.0, 1), 1.0);
    double prev = 1e300;
    for (double a : {0.01, 0.1, 1.0, 5.0, 50.0, 500.0}) {
        const double r = minimal_ball_radius(a, 2);
        EXPECT_LE(r, prev);
        EXPECT_GE(r, 1.0);
        EXPECT_GT(principal_eigenvalue(a, r, 2), 0.0);
        prev = r;
    }
}

TEST(PersistenceT, LogarithmAndClamp) {
    EXPECT_NEAR(persistence_T(0.1, 10.0, 1.0), 4.605170185988091, 1e-14);
    EXPECT_DOUBLE_EQ(persistence_T(1.0, 0.5, 1.0), 1.0);
    const double t1 = persistence_T(1e-6, 10.0, 1.0);
    const double t2 = persistence_T(1e-6, 10.0, 2.0);
    EXPECT_NEAR(t2, t1 / 2.0, 1e-14);
}

TEST(GaussianTail, ClosedFormsAndFrozenValues) {
    EXPECT_NEAR(gaussian_tail(0.0, 1, 0), std::sqrt(kPi), 1e-15);
    EXPECT_NEAR(gaussian_tail(1.0, 1, 1), std::exp(-1.0), 1e-12);
    EXPECT_NEAR(gaussian_tail(2.0, 1, 0), std::sqrt(kPi) * std::erfc(2.0), 1e-17);
    EXPECT_NEAR(gaussian_tail(2.0, 1, 0), 0.0082910693806726674, 1e-16);
    // mpmath reference values at 30 digits
    EXPECT_NEAR(gaussian_tail(0.5, 3, 1) / 6.1166870467677594, 1.0, 1e-14);
    EXPECT_NEAR(gaussian_tail(4.0, 2, 0) / 3.5353967816846826e-7, 1.0, 1e-13);
    EXPECT_NEAR(gaussian_tail(1.0, 3, 0) / 3.1873482780793737, 1.0, 1e-14);
}

TEST(GaussianTail, MatchesQuadratureAndDecreases) {
    for (int n = 1; n <= 3; ++n) {
        for (int m = 0; m <= 1; ++m) {
            double prev = 1e300;
            for (double R : {0.0, 0.5, 1.0, 2.0, 4.0}) {
                const double v = gaussian_tail(R, n, m);
                EXPECT_NEAR(v / tail_by_quadrature(R, n, m), 1.0, 1e-10) << R << " " << n << " " << m;
                EXPECT_LT(v, prev);
                prev = v;
            }
        }
    }
}

TEST(GaussianTail, RejectsUnsupportedInputs) {
    EXPECT_THROW(gaussian_tail(-1.0, 1, 0), InvalidParameter);
    EXPECT_THROW(gaussian_tail(1.0, 1, 2), InvalidParameter);
    EXPECT_THROW(upper_incomplete_gamma(2.5, 1.0), InvalidParameter);
}

TEST(PersistenceL, BisectionAgainstFrozenRoot) {
    // N = 1, T = 1, ε = 1e-3: the m = 1 tail e^{−R²} binds; R = √ln(1000).
    const double L = persistence_L(1e-3, 1.0, 1, 1.0);
    EXPECT_NEAR(L, 7.4338443776996769, 1e-10);
    const double R = L / (2.0 * std::sqrt(2.0));
    EXPECT_NEAR(gaussian_tail(R, 1, 1), 1e-3, 1e-13);
    EXPECT_LT(gaussian_tail(R, 1, 0), 1e-3);
    EXPECT_NEAR(persistence_L(1e-3, 2.0, 3, 1.0), 13.417159899200899, 1e-9);
}

TEST(PersistenceL, ClampAndMonotonicity) {
    EXPECT_DOUBLE_EQ(persistence_L(10.0, 1.0, 1, 3.0), 3.0);
    double prev = 1e300;
    for (double eps : {1e-8, 1e-6, 1e-4, 1e-2}) {
        const double L = persistence_L(eps, 2.0, 2, 1.0);
        EXPECT_LT(L, prev);
        prev = L;
    }
    EXPECT_LE(persistence_L(1e-4, 1.0, 1, 1.0), persistence_L(1e-4, 4.0, 1, 1.0));
    EXPECT_THROW(persistence_L(1e-3, 0.5, 1, 1.0), InvalidParameter);
}

TEST(StepOneMtilde, DirectEvaluation) {
    EXPECT_NEAR(step1_Mtilde(1.0, 1.0, 1.0, 1), 3.0, 1e-14);
    const double first = 1.0 + 1.0 / std::sqrt(kPi) + 1.0;
    EXPECT_NEAR(first, 2.5642, 1e-4);
    // M → 0 limit: max(1 + μ/λ, 1 + μλ^{−1/2}√π/π^{N/2})
    const double small = step1_Mtilde(4.0, 2.0, 1e-12, 2);
    EXPECT_NEAR(small, std::max(1.0 + 0.5, 1.0 + 2.0 * 0.5 * std::sqrt(kPi) / kPi), 1e-10);
    double prev = 0.0;
    for (double M : {0.1, 1.0, 10.0}) {
        const double v = step1_Mtilde(1.0, 1.0, M, 3);
        EXPECT_GT(v, prev);
        prev = v;
    }
}
