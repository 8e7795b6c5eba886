#include <visilab/corpus.hpp>
#include <visilab/monotonicity.hpp>

#include <gtest/gtest.h>

using namespace visilab;

namespace {

std::vector<double> log_radii(double lo, double hi, int k) {
    std::vector<double> r(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) r[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, double(i) / (k - 1));
    return r;
}

void expect_exact_cone(const MonotonicityAudit& a) {
    EXPECT_EQ(a.violations, 0u);
    EXPECT_GE(a.min_slack, -1e-9);
    EXPECT_TRUE(a.passed());
    for (double m : a.mu) EXPECT_NEAR(m, a.mu.front(), 1e-9);
    for (const auto& p : a.pairs) EXPECT_EQ(p.lhs, 0.0);
    EXPECT_NEAR(a.theta.value, 1.0, 1e-9);
}

} // namespace

TEST(Mu, QuadrantAndHalfplane) {
    for (const char* name : {"quadrant", "halfplane"}) {
        auto e = make_example(name);
        for (double r : {0.01, 0.1, 0.5, 0.75}) EXPECT_NEAR(mu(*e.set, e.dom, e.chart(), r), 1.0, 1e-12) << name;
    }
}

TEST(Mu, FarSetHasZeroDensity) {
    auto e = make_example("disk");
    EXPECT_EQ(mu(*e.set, e.dom, e.chart(), 0.1), 0.0);
    EXPECT_GT(mu(*e.set, e.dom, e.chart(), 0.9), 0.0);
    EXPECT_THROW(mu(*e.set, e.dom, e.chart(), 1.0), std::invalid_argument);
}

TEST(Mu, OffcentricBallsAreShifted) {
    // B_r(V_r) with V_r = -(r^2/4) e_2 meets the vertical edge in a chord of length r - v above the wall
    auto e = make_example("quadrant");
    auto c = OffcentricChart::power(0.25, 2, 0.8);
    for (double r : {0.1, 0.3, 0.6}) {
        double v = r * r / 4;
        EXPECT_NEAR(mu(*e.set, e.dom, c, r) * r, r - v, 1e-15);
    }
}

TEST(Conical, QuadrantHasNoDeviation) {
    auto e = make_example("quadrant");
    EXPECT_EQ(lhs_conical_deviation(*e.set, e.dom, e.chart(), 0.05, 0.7), 0.0);
    EXPECT_EQ(lhs_conical_deviation(*e.set, e.dom, e.chart(), 0.3, 0.3), 0.0);
    EXPECT_THROW(lhs_conical_deviation(*e.set, e.dom, e.chart(), 0.3, 0.2), std::invalid_argument);
}

TEST(Conical, ShiftedHalfplaneClosedForm) {
    auto e = make_example("shifted-halfplane", {{"L", 2}});
    for (auto [r1, r2] : {std::pair{0.55, 0.7}, std::pair{0.6, 0.95}, std::pair{0.5, 0.8}}) {
        double a1 = std::sqrt(r1 * r1 - 0.25), a2 = std::sqrt(r2 * r2 - 0.25);
        double exact = 2 * (std::atan(2 * a2) - std::atan(2 * a1));
        EXPECT_NEAR(lhs_conical_deviation(*e.set, e.dom, e.chart(), r1, r2), exact * exact, 1e-10 * exact * exact);
    }
}

TEST(GTerm, VanishesForCentricChart) {
    auto e = make_example("quadrant");
    EXPECT_EQ(g_term(*e.set, e.dom, e.chart(), 0.1, 0.5), 0.0);
    EXPECT_EQ(g_limit(*e.set, e.dom, e.chart(), 0.5, 0.01).value, 0.0);
    auto c = OffcentricChart::power(0.25, 2, 0.8);
    EXPECT_EQ(g_term(*e.set, e.dom, c, 0.3, 0.3), 0.0);
}

TEST(GTerm, BoundedByDeviation) {
    // |G(r1, r2)| <= 2 sup mu * sup |grad phi - 1| * (1 + (n - 1) log(r2 / r1))
    auto e = make_example("quadrant");
    auto c = OffcentricChart::power(0.25, 2, 0.8);
    for (auto [r1, r2] : {std::pair{0.05, 0.1}, std::pair{0.1, 0.4}, std::pair{0.2, 0.7}}) {
        double dev = 4 * std::sqrt(c.v(r2) / r2 + c.dv(r2));
        double G = g_term(*e.set, e.dom, c, r1, r2);
        EXPECT_LE(std::abs(G), 2 * 1.0 * dev * (1 + std::log(r2 / r1))) << r1 << " " << r2;
        EXPECT_NE(G, 0.0);
    }
}

TEST(GTerm, LimitWithinTailBound) {
    auto e = make_example("quadrant");
    auto c = OffcentricChart::power(0.25, 2, 0.8);
    for (double r : {0.1, 0.3, 0.5}) {
        auto g = g_limit(*e.set, e.dom, c, r, r / 64);
        EXPECT_LE(std::abs(g.value), 4 * (std::sqrt(3 * r) + r * std::sqrt(3 / (4 * r)))) << r;
        EXPECT_GT(g.tail_bound, 0);
        EXPECT_LT(g_limit(*e.set, e.dom, c, r, r / 256).tail_bound, g.tail_bound);
        EXPECT_NEAR(g.mu_bound, 1.0, 0.05);
    }
}

TEST(Audit, QuadrantIsExactCone) {
    auto e = make_example("quadrant");
    auto a = audit(*e.set, e.dom, e.chart(), log_radii(0.01, 0.5, 24));
    expect_exact_cone(a);
    EXPECT_EQ(a.max_radial_deviation, 0.0);
    EXPECT_FALSE(a.psi_computed);
    EXPECT_NEAR(a.centric.value, 1.0, 1e-9);
}

TEST(Audit, WedgeIsExactCone) {
    auto e = make_example("wedge", {{"c", 0.5}});
    auto a = audit(*e.set, e.dom, e.chart(), log_radii(0.01, 0.5, 24));
    expect_exact_cone(a);
}

TEST(Audit, TelescopesOverPairs) {
    auto e = make_example("quadrant");
    auto c = OffcentricChart::power(0.25, 2, 0.8);
    auto a = audit(*e.set, e.dom, c, log_radii(0.02, 0.6, 12));
    auto at = [&](int k, int l) {
        for (const auto& p : a.pairs)
            if (p.k == k && p.l == l) return p;
        throw std::logic_error("missing pair");
    };
    EXPECT_EQ(a.pairs.size(), 66u);
    for (int k = 0; k + 2 < 12; ++k) {
        EXPECT_NEAR(at(k, k + 1).G + at(k + 1, k + 2).G, at(k, k + 2).G, 1e-12);
        EXPECT_NEAR(at(k, k + 1).weight + at(k + 1, k + 2).weight, at(k, k + 2).weight, 1e-12);
    }
    EXPECT_EQ(a.violations, 0u);
}

TEST(Audit, ShiftedHalfplaneSlackMatchesClosedForm) {
    // mu(r) = 2 a(r) / r is increasing and the left side is (2 [atan 2a]_{r1}^{r2})^2
    auto e = make_example("shifted-halfplane", {{"L", 2}});
    auto a = audit(*e.set, e.dom, e.chart(), log_radii(0.55, 0.95, 9));
    EXPECT_EQ(a.violations, 0u);
    EXPECT_TRUE(a.passed());
    for (const auto& p : a.pairs) {
        double r1 = a.radii[static_cast<std::size_t>(p.k)], r2 = a.radii[static_cast<std::size_t>(p.l)];
        double a1 = std::sqrt(r1 * r1 - 0.25), a2 = std::sqrt(r2 * r2 - 0.25);
        double L = 2 * (std::atan(2 * a2) - std::atan(2 * a1));
        EXPECT_NEAR(p.lhs, L * L, 1e-10 * L * L);
        EXPECT_NEAR(p.dmu, 2 * a2 / r2 - 2 * a1 / r1, 1e-12);
        EXPECT_GT(p.slack, 0);
    }
}

TEST(Audit, DiskIsFlagged) {
    // not a minimizer, and polygons are audited with Psi = 0
    auto e = make_example("disk", {{"N", 512}});
    auto a = audit(*e.set, e.dom, e.chart(), log_radii(0.25, 0.9, 12));
    EXPECT_GT(a.violations, 0u);
    EXPECT_FALSE(a.passed());
    EXPECT_GT(a.max_radial_deviation, 0.5);
}

TEST(Audit, GridBumpedQuadrant) {
    auto e = make_example("bumped-quadrant");
    const double h = 1.0 / 256;
    GridSet E = digitize(*e.set, e.dom, h, Vec(-1, -0.01), Vec(1, 1));
    auto a = audit(E, e.dom, e.chart(), log_radii(1.0 / 16, 0.5, 10));
    const double eps = CutMetric::standard(2).epsilon;
    EXPECT_TRUE(a.psi_computed);
    EXPECT_NEAR(a.tau, 10 * eps * (1 + a.mu_max) * (1 + a.mu_max), 1e-18);
    EXPECT_EQ(a.violations, 0u) << a.min_slack;
    EXPECT_TRUE(a.passed()) << a.max_m_drop << " tau " << a.tau;
    for (double p : a.psi) EXPECT_GE(p, 0);
    EXPECT_NEAR(a.theta.value, 1.0, 3 * eps);
    EXPECT_NEAR(a.centric.value, a.theta.value, 2 * a.tau);
}

TEST(Audit, Errors) {
    auto e = make_example("quadrant");
    EXPECT_THROW(audit(*e.set, e.dom, e.chart(), {0.1}), std::invalid_argument);
    EXPECT_THROW(audit(*e.set, e.dom, e.chart(), {0.1, 1.5}), std::invalid_argument);
    EXPECT_THROW(g_limit(*e.set, e.dom, OffcentricChart::power(0.25, 2, 0.8), 0.1, 0.2), std::invalid_argument);
}
