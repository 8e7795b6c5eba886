#include <visilab/domain.hpp>

#include <gtest/gtest.h>

using namespace visilab;

namespace {

GraphDomain make_dom(Profile p, int n = 2, double L = 1.0, double rho = 1.0, double m = 10.0) {
    GraphDomain d;
    d.n = n;
    d.rho = rho;
    d.m = m;
    d.omega = std::move(p);
    d.lipschitz = L;
    return d;
}

GraphDomain sampled_radial(int n, double rho, double (*f)(double), double L) {
    Profile p;
    p.family = Family::sampled;
    p.dirs = default_directions(n);
    p.s = log_grid(rho, 30, 16);
    for (std::size_t d = 0; d < p.dirs.size(); ++d) {
        std::vector<double> row;
        for (double s : p.s) row.push_back(f(s));
        p.values.push_back(row);
    }
    return make_dom(p, n, L, rho);
}

const double pi = std::numbers::pi;

} // namespace

TEST(Gamma, ClosedFormValues) {
    EXPECT_EQ(gamma_u(VisibilityFunction::zero(1), 0.5), 0.0);
    EXPECT_NEAR(gamma_u(VisibilityFunction::power(0.25, 2, 1), 0.75), 1.0, 1e-14);
    EXPECT_NEAR(gamma_u(VisibilityFunction::power(1, 2, 1), 0.25), std::sqrt(12.0), 1e-12);
}

TEST(Gamma, SampledAgreesWithClosedForm) {
    HermiteTable tab;
    for (double t : log_grid(1.0, 20, 8)) {
        tab.x.push_back(t);
        tab.y.push_back(0.25 * t * t);
        tab.dy.push_back(0.5 * t);
    }
    auto u = VisibilityFunction::sampled(tab, 1.0);
    EXPECT_NEAR(gamma_u(u, 0.75), 1.0, 1e-12);
}

TEST(Gamma, NegativeRateIsDomainError) {
    HermiteTable tab{{0.1, 0.2}, {-0.01, -0.02}, {-0.1, -0.1}};
    auto u = VisibilityFunction::sampled(tab, 1.0);
    EXPECT_THROW(gamma_u(u, 0.15), std::domain_error);
    EXPECT_THROW(gamma_u(VisibilityFunction::power(-1, 2, 1), 0.5), std::domain_error);
}

TEST(Gamma, BoundsUOverTSquared) {
    for (auto u : {VisibilityFunction::power(16, 2, 0.5), VisibilityFunction::power(1, 1.5, 1),
                   VisibilityFunction::power(0.25, 3, 1)}) {
        double T = check_v1_v2(u).T_effective;
        for (double t : log_grid(0.999 * T, 20, 4)) EXPECT_LE(u(t) / (t * t), gamma_u(u, t) * (1 + 1e-14));
    }
}

TEST(V1V2, ZeroFunction) {
    auto r = check_v1_v2(VisibilityFunction::zero(1));
    EXPECT_EQ(r.v1, Verdict::pass);
    EXPECT_EQ(r.v2, Verdict::pass);
    EXPECT_EQ(r.summability.total, 0.0);
}

TEST(V1V2, SixteenTSquaredClipsHorizon) {
    auto u = VisibilityFunction::power(16, 2, 0.5);
    auto r = check_v1_v2(u);
    EXPECT_EQ(r.v1, Verdict::pass);
    EXPECT_TRUE(r.clipped);
    EXPECT_DOUBLE_EQ(r.T_effective, 1.0 / 64);
    EXPECT_EQ(r.v2, Verdict::pass);
    // gamma = t^{-1} sqrt(48 t), integral over (0,T) = 2 sqrt(48 T)
    EXPECT_NEAR(r.summability.total, 2 * std::sqrt(48.0 / 64), 1e-9);
}

TEST(V1V2, LinearUFailsWithWitness) {
    auto u = VisibilityFunction::power(1, 1, 1);
    auto r = check_v1_v2(u);
    EXPECT_EQ(r.v1, Verdict::fail);
    ASSERT_FALSE(r.witnesses.empty());
    GraphDomain d = make_dom(Profile::cone(1));
    EXPECT_TRUE(recheck_witness(d, u, r.witnesses[0]));
    EXPECT_EQ(r.v2, Verdict::fail);
}

TEST(V1V2, NoClipFails) {
    auto u = VisibilityFunction::power(1, 2, 0.5);
    EXPECT_EQ(check_v1_v2(u, false).v1, Verdict::fail);
    EXPECT_EQ(check_v1_v2(u, true).v1, Verdict::pass);
}

TEST(V1V2, BarelySummableIsInconclusive) {
    auto r = check_v1_v2(VisibilityFunction::power(0.1, 1.0001, 0.5));
    EXPECT_EQ(r.v2, Verdict::inconclusive);
}

TEST(SlopeProfile, ConeIsFlat) {
    auto d = make_dom(Profile::cone(1));
    auto sp = slope_profile(d, VisibilityFunction::zero(1), Vec{1.0}, 0.5);
    ASSERT_FALSE(sp.empty);
    EXPECT_FALSE(sp.violated);
    EXPECT_LE(std::abs(sp.max_increase), 1e-15);
}

TEST(SlopeProfile, BounceDecreasesAtLargeScale) {
    auto d = make_dom(Profile::bouncing(), 2, 5.0);
    auto sp = slope_profile(d, VisibilityFunction::power(16, 2, 1), Vec{1.0}, 0.9);
    EXPECT_LE(sp.max_increase, 0.0);
}

TEST(SlopeProfile, SinGraphIncreasesAcrossX1) {
    auto d = make_dom(Profile::sin_graph(), 2, 3.0);
    const double x1 = 1 / (3 * pi);
    auto sp = slope_profile(d, VisibilityFunction::power(1, 2, 1), Vec{1.0}, x1 * 1.01);
    EXPECT_TRUE(sp.violated);
    EXPECT_GT(sp.max_increase, 0.0);
}

TEST(SlopeProfile, EmptyGrid) {
    auto d = make_dom(Profile::cone(1));
    std::vector<double> g{0.5, 0.6};
    auto sp = slope_profile(d, VisibilityFunction::zero(1), Vec{1.0}, 0.1, &g);
    EXPECT_TRUE(sp.empty);
}

TEST(SegmentVisibility, Cone) {
    for (int n : {2, 3}) {
        auto d = make_dom(Profile::cone(1), n);
        EXPECT_EQ(check_segment_visibility(d, VisibilityFunction::zero(1), 0.5).verdict, Verdict::pass);
    }
}

TEST(SegmentVisibility, SinGraphFailsNearX1) {
    auto d = make_dom(Profile::sin_graph(), 2, 3.0);
    auto u = VisibilityFunction::power(0.5, 2, 1);
    auto r = check_segment_visibility(d, u, 0.12);
    ASSERT_EQ(r.verdict, Verdict::fail);
    EXPECT_TRUE(recheck_witness(d, u, *r.witness));
    EXPECT_LT(norm(r.witness->x), 0.12);
}

TEST(SegmentVisibility, ParaboloidPasses) {
    for (int n : {2, 3}) {
        auto d = make_dom(Profile::paraboloid(), n, 2.0);
        EXPECT_EQ(check_segment_visibility(d, VisibilityFunction::power(1, 2, 1), 0.3).verdict, Verdict::pass);
    }
}

TEST(GradientCriterion, LinearEquality) {
    auto d = make_dom(Profile::linear({0.7}), 2, 0.7);
    EXPECT_EQ(check_gradient_criterion(d, VisibilityFunction::zero(1)).verdict, Verdict::pass);
}

TEST(GradientCriterion, Paraboloid) {
    auto d = make_dom(Profile::paraboloid(), 3, 2.0);
    EXPECT_EQ(check_gradient_criterion(d, VisibilityFunction::power(1, 2, 1)).verdict, Verdict::pass);
}

TEST(GradientCriterion, SinGraphWitnessIndex) {
    // x_k = 1/((2k+1) pi) violates x_k <= 16 x_k^2 iff x_k < 1/16; the first such k is 3.
    int k = 0;
    while (1 / ((2 * k + 1) * pi) >= 1.0 / 16) ++k;
    EXPECT_EQ(k, 3);
    double xk = 1 / (7 * pi);
    auto d = make_dom(Profile::sin_graph(), 2, 3.0);
    auto u = VisibilityFunction::power(16, 2, 1);
    Vec nu{1.0};
    EXPECT_NEAR(xk * d.omega.radial_derivative(nu, xk) - d.omega.radial_value(nu, xk) - u(xk), xk - 16 * xk * xk,
                1e-12);
    auto r = check_gradient_criterion(d, u);
    ASSERT_EQ(r.verdict, Verdict::fail);
    EXPECT_TRUE(recheck_witness(d, u, *r.witness));
}

TEST(GradientCriterion, SampledFailureIsInconclusive) {
    auto d = sampled_radial(2, 1.0, [](double s) { return s * s * std::sin(1 / s); }, 3.0);
    auto r = check_gradient_criterion(d, VisibilityFunction::power(16, 2, 0.05));
    EXPECT_EQ(r.verdict, Verdict::inconclusive);
}

TEST(Certify, Wedge) {
    auto d = make_dom(Profile::cone(1));
    auto c = certify_visibility(d, VisibilityFunction::zero(1));
    EXPECT_EQ(c.overall, Verdict::pass);
    EXPECT_EQ(c.disagreements, 0);
}

TEST(Certify, BounceWithSixteen) {
    auto d = make_dom(Profile::bouncing(), 2, 5.0);
    auto c = certify_visibility(d, VisibilityFunction::power(16, 2, 0.5));
    EXPECT_EQ(c.v1, Verdict::pass);
    EXPECT_EQ(c.v2, Verdict::pass);
    EXPECT_EQ(c.v3_slope, Verdict::pass);
    EXPECT_EQ(c.v3_direct, Verdict::pass);
    EXPECT_EQ(c.v3_gradient, Verdict::pass);
    EXPECT_EQ(c.overall, Verdict::pass);
}

TEST(Certify, BounceForcedHorizonFailsV1) {
    auto d = make_dom(Profile::bouncing(), 2, 5.0);
    CertifyOptions o;
    o.clip_horizon = false;
    auto c = certify_visibility(d, VisibilityFunction::power(1, 2, 0.5), {}, o);
    EXPECT_EQ(c.v1, Verdict::fail);
    EXPECT_EQ(c.overall, Verdict::fail);
}

TEST(Certify, SinGraphFailsForAllC) {
    auto d = make_dom(Profile::sin_graph(), 2, 3.0);
    for (double C : {1.0, 4.0, 16.0}) {
        auto u = VisibilityFunction::power(C, 2, 1);
        auto c = certify_visibility(d, u);
        EXPECT_EQ(c.overall, Verdict::fail) << C;
        EXPECT_EQ(c.v3_slope, Verdict::fail);
        EXPECT_EQ(c.v3_direct, Verdict::fail);
        EXPECT_EQ(c.disagreements, 0);
        bool named = false;
        for (const auto& w : c.witnesses) {
            EXPECT_TRUE(recheck_witness(d, u, w)) << w.test;
            if (w.feature_index >= 0) {  // witness sits exactly on some x_k
                named = true;
                double xk = 1 / ((2 * w.feature_index + 1) * pi);
                EXPECT_NEAR(norm(w.x.base()), xk, 1e-15);
            }
        }
        EXPECT_TRUE(named);
    }
}

TEST(TangentCone, Cone) {
    auto d = make_dom(Profile::cone(1), 3);
    auto tc = tangent_cone(d, VisibilityFunction::zero(1));
    for (double s : tc.slope) EXPECT_NEAR(s, 1.0, 1e-12);
    EXPECT_NEAR(tc.omega0(Vec(0.3, 0.4)), 0.5, 1e-12);
}

TEST(TangentCone, SPlusSSquared) {
    auto d = sampled_radial(2, 1.0, [](double s) { return s + s * s; }, 3.0);
    auto tc = tangent_cone(d, VisibilityFunction::power(1, 2, 1));
    for (double s : tc.slope) EXPECT_NEAR(s, 1.0, 1e-9);
}

TEST(TangentCone, BounceSlopeOneAndMonotone) {
    auto d = make_dom(Profile::bouncing(), 2, 5.0);
    auto tc = tangent_cone(d, VisibilityFunction::power(16, 2, 0.5));
    for (std::size_t i = 0; i < tc.slope.size(); ++i) {
        EXPECT_NEAR(tc.slope[i], 1.0, 1e-9);
        EXPECT_LE(tc.monotone_defect[i], tol::slope_rel * 2);
    }
}

TEST(TangentCone, RescaleConsistency) {
    auto d = make_dom(Profile::bouncing(), 2, 5.0);
    auto u = VisibilityFunction::power(16, 2, 0.5);
    auto t0 = tangent_cone(d, u);
    for (double s : {0.5, 0.25}) {
        auto ts = tangent_cone(rescale_domain(d, s), u.rescaled(s));
        for (std::size_t i = 0; i < t0.slope.size(); ++i) EXPECT_NEAR(ts.slope[i], t0.slope[i], 1e-9);
    }
}

TEST(Rescale, Examples) {
    auto cone = make_dom(Profile::cone(0.5));
    auto cs = rescale_domain(cone, 0.37);
    EXPECT_EQ(cs.omega(Vec{0.3}), cone.omega(Vec{0.3}));
    auto par = make_dom(Profile::paraboloid(), 2, 2.0);
    auto ps = rescale_domain(par, 0.5);
    for (double x : {0.1, 0.7, 1.3}) EXPECT_DOUBLE_EQ(ps.omega(Vec{x}), x * x / 2);
    EXPECT_DOUBLE_EQ(ps.rho, 2.0);
    EXPECT_EQ(ps.lipschitz, par.lipschitz);
    auto id = rescale_domain(par, 1.0);
    EXPECT_EQ(id.omega(Vec{0.3}), par.omega(Vec{0.3}));
}

TEST(Hausdorff, Basics) {
    std::vector<Vec> a, b;
    const double h = 0.05;
    for (int i = 0; i <= 20; ++i)
        for (int j = 0; j <= 40; ++j) {
            if (j <= 20) a.emplace_back(i * h, j * h);
            b.emplace_back(i * h, j * h);
        }
    EXPECT_EQ(hausdorff_distance(a, a), 0.0);
    EXPECT_NEAR(hausdorff_distance(a, b), 1.0, h);
    EXPECT_THROW(hausdorff_distance({}, b), std::invalid_argument);
}

TEST(Hausdorff, ConvergenceToTangentCone) {
    auto d = sampled_radial(2, 4.0, [](double s) { return s + s * s; }, 9.0);
    auto cone = make_dom(Profile::cone(1));
    const double step = 0.02;
    auto c0 = sample_domain_ball(cone, 1.0, step);
    double prev = 1e9;
    for (double s : {0.4, 0.2, 0.1, 0.05, 0.025}) {
        auto ds = sample_domain_ball(rescale_domain(d, s), 1.0, step);
        double hd = hausdorff_distance(ds, c0);
        EXPECT_LE(hd, prev + step);
        if (s == 0.1) {
            EXPECT_LE(hd, 0.1 + step);
        }
        prev = hd;
    }
    EXPECT_LE(prev, 2 * step);
}

TEST(GraphDomain, ValidateRejectsBadLipschitz) {
    auto d = make_dom(Profile::bouncing(), 2, 1.0);
    EXPECT_THROW(d.validate(), std::invalid_argument);
    d.lipschitz = 5.0;
    EXPECT_NO_THROW(d.validate());
}
