#include <visilab/perimeter.hpp>

#include <gtest/gtest.h>

using namespace visilab;

namespace {

const double pi = std::numbers::pi;

GraphDomain halfplane() {
    GraphDomain d;
    d.omega = Profile::linear({0});
    d.rho = 8;
    d.m = 8;
    return d;
}

GraphDomain wedge(double c) {
    GraphDomain d;
    d.omega = Profile::cone(c);
    d.lipschitz = c;
    d.rho = 8;
    d.m = 8;
    return d;
}

PolySet quadrant(double L = 4) { return PolySet::polygon({Vec(0, 0), Vec(L, 0), Vec(L, L), Vec(0, L)}); }

PolySet random_star(Rng& rng, const Vec& c, double R0, int N = 96) {
    int k = rng.integer(2, 5);
    double a = rng.uniform(0.05, 0.3), ph = rng.uniform(0, 2 * pi);
    std::vector<Vec> p;
    for (int i = 0; i < N; ++i) {
        double th = 2 * pi * i / N;
        double r = R0 * (1 + a * std::sin(k * th + ph));
        p.push_back(c + Vec(std::cos(th), std::sin(th)) * r);
    }
    return PolySet::polygon(p);
}

} // namespace

TEST(CutMetric, CalibrationQuality) {
    const auto& m16 = CutMetric::planar16();
    const auto& m24 = CutMetric::planar24();
    EXPECT_EQ(m16.offsets.size(), 8u);
    EXPECT_EQ(m24.offsets.size(), 12u);
    EXPECT_LT(m16.epsilon, 0.015);
    EXPECT_LT(m24.epsilon, 0.008);
    EXPECT_LT(CutMetric::spatial26().epsilon, 0.06);
    for (const auto* m : {&m16, &m24, &CutMetric::spatial26()})
        for (std::size_t k = 0; k < m->offsets.size(); ++k) {
            EXPECT_GT(m->weight[k], 0.0);
            EXPECT_EQ(m->iweight[k] % 2, 0);
        }
    // symmetry: the length factor is invariant under coordinate swaps
    EXPECT_DOUBLE_EQ(m16.length_factor(Vec(0.6, 0.8)), m16.length_factor(Vec(0.8, 0.6)));
}

TEST(Region, SegmentIntervals) {
    auto iv = Region::ball(Vec(0, 0), 1).segment_intervals(Vec(-2, 0), Vec(2, 0));
    ASSERT_EQ(iv.size(), 1u);
    EXPECT_DOUBLE_EQ(iv[0].first, 0.25);
    EXPECT_DOUBLE_EQ(iv[0].second, 0.75);
    auto ch = OffcentricChart::zero(4);
    auto an = Region::annulus(ch, 0.5, 1, 2).segment_intervals(Vec(-2, 0), Vec(2, 0));
    ASSERT_EQ(an.size(), 2u);
    EXPECT_NEAR(interval_measure(an), 0.25, 1e-15);
    auto bx = Region::box(Vec(0, 0), Vec(1, 1)).segment_intervals(Vec(-1, 0.5), Vec(3, 0.5));
    ASSERT_EQ(bx.size(), 1u);
    EXPECT_DOUBLE_EQ(bx[0].first, 0.25);
    EXPECT_DOUBLE_EQ(bx[0].second, 0.5);
    EXPECT_TRUE(Region::halfspace(Vec(1, 0), 0).segment_intervals(Vec(1, 0), Vec(2, 0)).empty());
}

TEST(PolyPerimeter, QuadrantInHalfplane) {
    EXPECT_DOUBLE_EQ(perimeter_rel(quadrant(), halfplane(), Region::ball(Vec(0, 0), 1)), 1.0);
}

TEST(PolyPerimeter, InscribedDisk) {
    auto E = PolySet::regular_disk(Vec(0, 0.5), 0.3, 4096);
    EXPECT_NO_THROW(E.validate());
    EXPECT_NEAR(perimeter_rel(E, halfplane()), 2 * pi * 0.3, 1e-5);
    EXPECT_NEAR(perimeter_rel(E, halfplane(), Region::ball(Vec(0, 0.5), 1)), 2 * pi * 0.3, 1e-5);
}

TEST(PolyPerimeter, EmptySet) {
    EXPECT_EQ(perimeter_rel(PolySet{}, halfplane()), 0.0);
    EXPECT_EQ(volume(PolySet{}, halfplane()), 0.0);
}

TEST(PolyPerimeter, RejectsSetOutsideDomain) {
    auto E = PolySet::regular_disk(Vec(0, 0), 0.3, 64);
    EXPECT_THROW(perimeter_rel(E, halfplane()), std::domain_error);
}

TEST(PolyVolume, Examples) {
    auto sq = PolySet::polygon({Vec(0, 0), Vec(1, 0), Vec(1, 1), Vec(0, 1)});
    EXPECT_DOUBLE_EQ(volume(sq, halfplane()), 1.0);
    EXPECT_NEAR(volume(quadrant(), halfplane(), Region::ball(Vec(0, 0), 1)), pi / 4, 1e-15);
    EXPECT_NEAR(volume(sq, halfplane(), Region::box(Vec(0.5, -1), Vec(3, 0.25))), 0.125, 1e-15);
    EXPECT_NEAR(volume(sq, halfplane(), Region::halfspace(Vec(1, 1), 1)), 0.5, 1e-15);
    auto ch = OffcentricChart::zero(4);
    EXPECT_NEAR(volume(quadrant(), halfplane(), Region::annulus(ch, 0.5, 1, 2)), pi / 4 * 0.75, 1e-15);
}

TEST(GridPerimeter, DiskWithin2Percent) {
    auto E = PolySet::regular_disk(Vec(0, 0.5), 0.3, 4096);
    auto g = digitize(E, halfplane(), 1.0 / 256, Vec(-0.5, 0), Vec(0.5, 1));
    EXPECT_NEAR(perimeter_rel(g, halfplane()) / (2 * pi * 0.3), 1.0, 0.02);
    EXPECT_NEAR(volume(g, halfplane()), pi * 0.09, 2 * 2 * pi * 0.3 / 256);
}

TEST(GridPerimeter, BackendAgreement) {
    Rng rng(2024);
    const double h = 1.0 / 512;
    const auto& m = CutMetric::planar16();
    for (int t = 0; t < 20; ++t) {
        auto E = random_star(rng, Vec(rng.uniform(-0.2, 0.2), rng.uniform(0.4, 0.6)), rng.uniform(0.1, 0.3));
        ASSERT_NO_THROW(E.validate());
        double p = perimeter_rel(E, halfplane());
        auto g = digitize(E, halfplane(), h, Vec(-1, 0), Vec(1, 1.2));
        EXPECT_NEAR(perimeter_rel(g, halfplane()), p, m.epsilon * p + 3 * h * pi) << t;
    }
}

TEST(GridPerimeter, WallPairsAreMirrored) {
    // a vertical interface meeting the wall: mirrored pairs keep the count equal to the bulk rate
    auto g = digitize(quadrant(), halfplane(), 1.0 / 128, Vec(-2, 0), Vec(2, 2));
    double p = perimeter_rel(g, halfplane(), Region::ball(Vec(0, 0), 1));
    double rate = CutMetric::planar16().length_factor(Vec(1, 0));
    EXPECT_NEAR(p, rate, 2.0 / 128);
    EXPECT_EQ(perimeter_rel(GridSet::covering(2, 1.0 / 64, Vec(-1, 0), Vec(1, 1)), halfplane()), 0.0);
}

TEST(Scaling, PolySetExact) {
    Rng rng(7);
    auto E = random_star(rng, Vec(0.1, 0.5), 0.2);
    auto A = Region::ball(Vec(0, 0.4), 0.35);
    double p = perimeter_rel(E, halfplane(), A);
    for (double t : {0.5, 2.0, 4.0}) EXPECT_EQ(perimeter_rel(E.scaled(t), halfplane(), A.scaled(t)), t * p);
    EXPECT_NEAR(perimeter_rel(E.scaled(3), halfplane(), A.scaled(3)), 3 * p, 1e-13);
}

TEST(Scaling, GridSetWithinBoundaryError) {
    auto E = PolySet::regular_disk(Vec(0, 0.5), 0.3, 1024);
    const double h = 1.0 / 256;
    auto g = digitize(E, halfplane(), h, Vec(-0.5, 0), Vec(0.5, 1));
    auto A = Region::ball(Vec(0.1, 0.5), 0.25);
    double p = perimeter_rel(g, halfplane(), A);
    auto g2 = digitize(E.scaled(2), halfplane(), h, Vec(-1, 0), Vec(1, 2));
    EXPECT_NEAR(perimeter_rel(g2, halfplane(), A.scaled(2)), 2 * p, 2 * (2 * h) * 2 * pi * 0.3 / h * h + 4 * h);
    // dyadic rescaling of the grid itself is exact
    EXPECT_EQ(perimeter_rel(g.scaled(2), halfplane(), A.scaled(2)), 2 * p);
}

TEST(Reflection, HalfDiskBecomesDisk) {
    std::vector<Vec> pts;
    const int N = 512;
    for (int k = 0; k <= N; ++k) {
        double th = pi * k / N;
        pts.push_back(Vec(std::cos(th), k == 0 || k == N ? 0.0 : std::sin(th)));
    }
    auto E = PolySet::polygon(pts);
    auto R = reflect_extend(E, halfplane());
    EXPECT_EQ(R.interface_mass, 0.0);
    KahanSum len;
    for (const auto& [p, q] : R.chain) {
        len += dist(p, q);
        EXPECT_NEAR(norm(p), 1.0, 1e-15);
        EXPECT_NEAR(norm(q), 1.0, 1e-15);
    }
    EXPECT_NEAR(len.value(), 2 * perimeter_rel(E, halfplane()), 1e-12);
}

TEST(Reflection, WedgeBoxBound) {
    auto d = wedge(1);
    std::vector<Vec> pts{Vec(0, 0)};
    const int N = 256;
    for (int k = 0; k <= N; ++k) {
        double th = pi / 4 + pi / 2 * k / N;
        pts.push_back(Vec(std::cos(th), std::sin(th)));
    }
    auto E = PolySet::polygon(pts);
    auto R = reflect_extend(E, d);
    EXPECT_DOUBLE_EQ(R.lip_bound, 3.0);
    EXPECT_EQ(R.interface_mass, 0.0);
    Rng rng(99);
    int tested = 0;
    while (tested < 50) {
        double x0 = rng.uniform(-1.5, 1.5), x1 = x0 + rng.uniform(0.05, 1.0);
        double top = std::min(std::abs(x0), std::abs(x1));
        if (x0 < 0 && x1 > 0) top = 0;
        double y1 = top - rng.uniform(0, 0.1), y0 = y1 - rng.uniform(0.05, 1.5);
        auto b = reflection_box_check(R, Vec(x0, y0), Vec(x1, y1), d);
        if (b.rhs == 0) continue;
        ++tested;
        EXPECT_TRUE(b.holds()) << b.lhs << " vs " << b.factor << "*" << b.rhs;
    }
}

TEST(Reflection, EmptyAndLateral) {
    auto R = reflect_extend(PolySet{}, halfplane());
    EXPECT_TRUE(R.chain.empty());
    auto d = halfplane();
    d.rho = 0.5;
    EXPECT_THROW(reflect_extend(PolySet::regular_disk(Vec(0, 0.6), 0.5, 64), d), std::domain_error);
}

TEST(Reflection, GridInterfaceMass) {
    auto d = halfplane();
    std::vector<Vec> pts;
    for (int k = 0; k <= 256; ++k) {
        double th = pi * k / 256;
        pts.push_back(Vec(std::cos(th), k == 0 || k == 256 ? 0.0 : std::sin(th)));
    }
    auto g = digitize(PolySet::polygon(pts), d, 1.0 / 128, Vec(-1.5, -1.5), Vec(1.5, 1.5));
    auto R = reflect_extend(g, d);
    EXPECT_LE(R.interface_mass, perimeter_rel(g, d) * CutMetric::planar16().epsilon);
    // the extension is the full digitized disk: symmetric about the wall
    for (std::size_t i = 0; i < g.size(); ++i) {
        Cell c = g.coords(i);
        Cell m{c[0], g.dims[1] - 1 - c[1], 0};
        EXPECT_EQ(R.extended.bits[i], R.extended.bits[g.index(m)]);
    }
}

TEST(Competitor, QuadrantIsFixed) {
    auto ch = OffcentricChart::zero(2);
    auto C = conical_competitor(quadrant(), ch, halfplane(), 0.5);
    EXPECT_TRUE(approx_equal(C, quadrant()));
}

TEST(Competitor, ConeThroughVertexIsFixed) {
    auto d = wedge(0.5);
    // E = domain part left of the ray through (−1, 2)
    auto E = PolySet::polygon({Vec(0, 0), Vec(-1, 2), Vec(-3, 3), Vec(-3, 1.5)});
    auto C = conical_competitor(E, OffcentricChart::zero(4), d, 0.7);
    EXPECT_TRUE(approx_equal(C, E, 1e-12));
}

TEST(Competitor, BumpIsRemoved) {
    // quadrant with a tent on its interface between heights 0.25 and 0.5
    auto E = PolySet::polygon({Vec(0, 0), Vec(4, 0), Vec(4, 4), Vec(0, 4), Vec(0, 0.5), Vec(-0.05, 0.375), Vec(0, 0.25)});
    auto d = halfplane();
    auto ch = OffcentricChart::zero(4);
    double r = 0.7;
    auto C = conical_competitor(E, ch, d, r);
    auto B = Region::ball(Vec(0, 0), r);
    EXPECT_NEAR(perimeter_rel(C, d, B), r, 1e-14);
    EXPECT_LT(perimeter_rel(C, d, B), perimeter_rel(E, d, B));
    // outside the ball nothing changes
    auto out = Region::annulus(ch, r, 3, 2);
    EXPECT_NEAR(perimeter_rel(C, d, out), perimeter_rel(E, d, out), 1e-14);
    EXPECT_NEAR(volume(C, d, out), volume(E, d, out), 1e-14);
}

TEST(Competitor, GridQuadrantIsFixed) {
    auto g = digitize(quadrant(), halfplane(), 1.0 / 64, Vec(-1, 0), Vec(1, 1));
    auto C = conical_competitor(g, OffcentricChart::zero(2), halfplane(), 0.5 + 1.0 / 300);
    EXPECT_EQ(C.bits, g.bits);
}

TEST(Coarea, IndicatorAndConstant) {
    auto d = halfplane();
    auto g = digitize(PolySet::regular_disk(Vec(0, 0.5), 0.3, 256), d, 1.0 / 64, Vec(-1, 0), Vec(1, 1));
    std::vector<int> f(g.bits.begin(), g.bits.end());
    auto r = coarea_check(g, f, d);
    EXPECT_TRUE(r.exact());
    EXPECT_EQ(r.variation_units, perimeter_units(g, d, Region::whole(), CutMetric::planar16()));
    std::vector<int> c(g.size(), 3);
    auto z = coarea_check(g, c, d);
    EXPECT_EQ(z.variation, 0.0);
    EXPECT_EQ(z.level_sum, 0.0);
}

TEST(Coarea, NestedLevels) {
    auto d = halfplane();
    const double h = 1.0 / 64;
    auto E1 = digitize(PolySet::regular_disk(Vec(0, 0.5), 0.35, 256), d, h, Vec(-1, 0), Vec(1, 1));
    auto E2 = digitize(PolySet::regular_disk(Vec(0.05, 0.5), 0.15, 256), d, h, Vec(-1, 0), Vec(1, 1));
    std::vector<int> f(E1.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = E1.bits[i] + E2.bits[i];
    auto r = coarea_check(E1, f, d);
    EXPECT_TRUE(r.exact());
    EXPECT_EQ(r.variation_units, perimeter_units(E1, d, Region::whole(), CutMetric::planar16()) +
                                     perimeter_units(E2, d, Region::whole(), CutMetric::planar16()));
}

TEST(Coarea, RandomPiecewiseConstantMaps) {
    auto d = halfplane();
    Rng rng(31);
    for (int t = 0; t < 20; ++t) {
        auto g = GridSet::covering(2, 1.0 / 32, Vec(-1, 0), Vec(1, 1));
        std::vector<int> f(g.size());
        int levels = rng.integer(2, 6);
        std::vector<Vec> seeds;
        for (int k = 0; k < 6; ++k) seeds.push_back(Vec(rng.uniform(-1, 1), rng.uniform(0, 1)));
        std::vector<int> val;
        for (int k = 0; k < 6; ++k) val.push_back(rng.integer(-levels, levels));
        for (std::size_t i = 0; i < f.size(); ++i) {
            Vec x = g.center(i);
            std::size_t best = 0;
            for (std::size_t k = 1; k < seeds.size(); ++k)
                if (dist(x, seeds[k]) < dist(x, seeds[best])) best = k;
            f[i] = val[best];
        }
        auto A = Region::ball(Vec(rng.uniform(-0.5, 0.5), 0), rng.uniform(0.3, 0.9));
        auto r = coarea_check(g, f, d, A);
        EXPECT_TRUE(r.exact()) << t;
    }
}

TEST(GridIO, RoundTrip) {
    auto g = digitize(PolySet::regular_disk(Vec(0, 0.5), 0.3, 256), halfplane(), 1.0 / 64, Vec(-1, 0), Vec(1, 1));
    std::stringstream ss;
    g.write(ss);
    auto r = GridSet::read(ss);
    EXPECT_TRUE(r.same_lattice(g));
    EXPECT_EQ(r.bits, g.bits);
}

TEST(BoundaryElements, QuadrantNormals) {
    auto d = halfplane();
    auto pe = boundary_elements(quadrant(), d, Region::ball(Vec(0, 0), 1));
    ASSERT_EQ(pe.size(), 1u);
    EXPECT_DOUBLE_EQ(pe[0].measure, 1.0);
    EXPECT_DOUBLE_EQ(pe[0].nu[0], 1.0);
    auto g = digitize(quadrant(), d, 1.0 / 64, Vec(-1, 0), Vec(1, 1));
    auto ge = boundary_elements(g, d, Region::ball(Vec(0, 0), 0.9));
    double total = 0;
    for (const auto& e : ge) {
        EXPECT_NEAR(e.nu[0], 1.0, 1e-12);
        total += e.measure;
    }
    EXPECT_NEAR(total, perimeter_rel(g, d, Region::ball(Vec(0, 0), 0.9)), 1e-12);
}
