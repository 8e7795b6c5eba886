#include <visilab/foliation.hpp>

#include <gtest/gtest.h>

using namespace visilab;

namespace {

struct NamedChart {
    const char* name;
    OffcentricChart chart;
};

std::vector<NamedChart> charts() {
    return {{"zero", OffcentricChart::zero(1.0)},
            {"quarter-square", OffcentricChart::power(0.25, 2)},
            {"bounce", to_offcentric(VisibilityFunction::power(16, 2, 1.0 / 64))}};
}

/// Uniform random point of B_R(V_R) away from the vertex.
Vec random_point(const OffcentricChart& c, int n, Rng& rng) {
    const Vec V = c.center(c.R, n);
    for (;;) {
        Vec x(n);
        for (int i = 0; i < n; ++i) x[i] = V[i] + c.R * rng.uniform(-1, 1);
        double F = detail::foliation_F(c, x, 0.99 * c.R);
        if (F < 0 && norm(x) > 1e-3 * c.R) return x;
    }
}

} // namespace

TEST(ToOffcentric, Zero) {
    auto c = to_offcentric(VisibilityFunction::zero(0.7));
    EXPECT_TRUE(c.trivial());
    EXPECT_EQ(c.v(0.3), 0.0);
    EXPECT_EQ(c.R, 0.7);
}

TEST(ToOffcentric, QuarterSquare) {
    auto c = to_offcentric(VisibilityFunction::power(0.25, 2, 1));
    EXPECT_NEAR(c.z_inverse(0.19), 0.2, 1e-15);
    EXPECT_NEAR(c.v(0.19), 0.01, 1e-15);
    EXPECT_NEAR(c.T_prime, 2.0 / 3, 1e-15);
}

TEST(ToOffcentric, Linear) {
    auto c = to_offcentric(VisibilityFunction::power(0.25, 1, 1));
    for (double r : {0.01, 0.2, 0.5}) {
        EXPECT_NEAR(c.v(r), r / 3, 1e-15);
        EXPECT_NEAR(c.dv(r), 1.0 / 3, 1e-15);
    }
}

TEST(ToOffcentric, ZCompatibility) {
    for (auto u : {VisibilityFunction::power(16, 2, 1.0 / 64), VisibilityFunction::power(1, 1.5, 0.1),
                   VisibilityFunction::power(0.25, 2, 1)}) {
        auto c = to_offcentric(u);
        for (double t : log_grid(c.T_prime * 0.999, 20, 4)) {
            double z = t - u(t);
            EXPECT_NEAR(c.v(z), u(t), 1e-13 * (1 + u(t)));
            EXPECT_LE(z, c.z_inverse(z) * (1 + 1e-15));
            EXPECT_LE(c.z_inverse(z), 2 * z);
            EXPECT_LE(c.dv(z), 0.5 + 1e-15);
            EXPECT_GE(c.dv(z), 0.0);
        }
    }
}

TEST(ToOffcentric, RejectsSteepU) {
    EXPECT_THROW(to_offcentric(VisibilityFunction::power(0.6, 1, 1)), std::invalid_argument);
}

TEST(Phi, ConeCase) {
    auto e = phi(OffcentricChart::zero(1), Vec(0.3, 0.4));
    EXPECT_DOUBLE_EQ(e.r, 0.5);
    EXPECT_DOUBLE_EQ(e.grad[0], 0.6);
    EXPECT_DOUBLE_EQ(e.grad[1], 0.8);
    EXPECT_EQ(e.deviation, 0.0);
}

TEST(Phi, QuarterSquareSpotValue) {
    auto c = OffcentricChart::power(0.25, 2);
    EXPECT_EQ(c.R, 1.0);
    auto e = phi(c, Vec(0, 0.19));
    EXPECT_NEAR(e.r, 0.2, 1e-12);
    EXPECT_NEAR(e.grad[0], 0.0, 1e-9);
    EXPECT_NEAR(e.grad[1], 0.2 / 0.18, 1e-9);
    EXPECT_NEAR(e.deviation, 0.2 / 0.18 - 1, 1e-9);
    EXPECT_NEAR(e.bound, 4 * std::sqrt(0.01 / 0.2 + 0.1), 1e-12);
    EXPECT_LE(e.deviation, e.bound);
}

TEST(Phi, Errors) {
    auto c = OffcentricChart::power(0.25, 2);
    EXPECT_THROW(phi(c, Vec(0, 0)), std::domain_error);
    EXPECT_THROW(phi(c, Vec(0, 2)), std::domain_error);
    EXPECT_THROW(phi(OffcentricChart::zero(1), Vec(0.9, 0.9)), std::domain_error);
}

TEST(Phi, RandomPointProperties) {
    for (int n : {2, 3}) {
        for (const auto& [name, c] : charts()) {
            Rng rng(17 + n);
            for (int i = 0; i < 1000; ++i) {
                Vec x = random_point(c, n, rng);
                auto e = phi(c, x);
                const double r = e.r, v = c.v(r);
                EXPECT_LE(e.residual, c.tau_root * r * r) << name;
                // deviation bound and sandwich, no slack beyond rounding
                EXPECT_LE(e.deviation, e.bound + 1e-15) << name;
                EXPECT_LE(r - v, norm(x) * (1 + 1e-15)) << name;
                EXPECT_LE(norm(x), (r + v) * (1 + 1e-15)) << name;
                // direction of the gradient
                Vec d = x - c.center(r, n);
                EXPECT_LE(norm(e.grad / norm(e.grad) - d / norm(d)), 10 * c.tau_root) << name;
                // central differences of the root map
                const double h = 1e-6 * r;
                for (int k = 0; k < n; ++k) {
                    Vec xp = x, xm = x;
                    xp[k] += h;
                    xm[k] -= h;
                    double fd = (phi(c, xp).r - phi(c, xm).r) / (2 * h);
                    EXPECT_LE(std::abs(fd - e.grad[k]), 1e-6 * norm(e.grad)) << name;
                }
            }
        }
    }
}

TEST(Phi, UniquenessUnderPerturbedBracket) {
    for (const auto& [name, c] : charts()) {
        if (c.trivial()) continue;
        Rng rng(5);
        for (int i = 0; i < 10000; ++i) {
            Vec x = random_point(c, 2, rng);
            auto e = phi(c, x);
            double lo = e.r * rng.uniform(0.0, 0.999), hi = e.r + (c.R - e.r) * rng.uniform(0.001, 1.0);
            if (!(detail::foliation_F(c, x, hi) < 0)) continue;
            auto f = phi_bracketed(c, x, lo, hi);
            EXPECT_LE(std::abs(f.r - e.r), 10 * c.tau_root * e.r) << name;
        }
    }
}

TEST(Phi, LevelSetConsistency) {
    for (const auto& [name, c] : charts()) {
        for (int k = 1; k < 20; ++k) {
            double r = c.R * k / 20.0;
            Vec V = c.center(r, 2);
            for (int j = 0; j < 36; ++j) {
                double th = 2 * std::numbers::pi * (j + 0.3) / 36;
                Vec x = V + Vec(std::cos(th), std::sin(th)) * r;
                if (norm(x) < 1e-9) continue;
                EXPECT_NEAR(phi(c, x).r, r, 10 * c.tau_root * r) << name;
            }
        }
    }
}

TEST(ConeContains, ConeDomain) {
    GraphDomain d;
    d.omega = Profile::cone(0.5);
    d.lipschitz = 0.5;
    auto c = OffcentricChart::zero(1);
    for (double r : {0.05, 0.3, 0.9}) EXPECT_EQ(cone_contains(c, d, r).verdict, Verdict::pass);
}

TEST(ConeContains, BounceChart) {
    GraphDomain d;
    d.omega = Profile::bouncing();
    d.lipschitz = 5;
    d.m = 10;
    auto c = to_offcentric(VisibilityFunction::power(16, 2, 0.5));
    EXPECT_NEAR(c.R, 1.0 / 96 - 16.0 / (96 * 96), 1e-15);
    for (double r : {0.005, 0.008, 0.001}) EXPECT_EQ(cone_contains(c, d, r).verdict, Verdict::pass) << r;
}

TEST(ConeContains, SinGraphForcedZeroChartFails) {
    GraphDomain d;
    d.omega = Profile::sin_graph();
    d.lipschitz = 3;
    auto c = OffcentricChart::zero(1);
    auto res = cone_contains(c, d, 1 / (3 * std::numbers::pi) * 1.05);
    ASSERT_EQ(res.verdict, Verdict::fail);
    EXPECT_TRUE(d.contains(res.witness->x));
    EXPECT_LT(d.height(res.witness->aux), 0.0);
}

TEST(GammaV, QuarterSquareClosedForm) {
    auto c = OffcentricChart::power(0.25, 2);
    for (double t : {0.01, 0.1, 0.5}) EXPECT_NEAR(c.gamma_v(t), std::sqrt(3 / (4 * t)), 1e-12);
    EXPECT_NEAR(c.gamma_v_integral(0.3), std::sqrt(3 * 0.3), 1e-12);
    auto b = to_offcentric(VisibilityFunction::power(0.25, 2, 1));
    // from-u chart: numeric sup and integral are finite and positive
    EXPECT_GT(b.gamma_v(0.1), 0.0);
    EXPECT_GT(b.gamma_v_integral(0.1), 0.0);
}

TEST(FoliationAudit, CleanOnAllCharts) {
    for (const auto& [name, c] : charts()) {
        auto a = foliation_audit(c, 2, 1000, 3);
        EXPECT_EQ(a.samples, 1000);
        EXPECT_TRUE(a.passed()) << name;
        EXPECT_LE(a.max_residual, 1e-12) << name;
        EXPECT_LE(a.max_fd_error, 1e-6) << name;
        EXPECT_LE(a.max_deviation, 1e-15) << name;
    }
    auto a = foliation_audit(OffcentricChart::power(0.25, 2), 2, 200, 3);
    auto b = foliation_audit(OffcentricChart::power(0.25, 2), 2, 200, 3);
    EXPECT_EQ(a.max_fd_error, b.max_fd_error);
}
