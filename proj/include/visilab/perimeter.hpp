#pragma once

#include "grid.hpp"

#include <map>
#include <tuple>

namespace visilab {

// ---------------------------------------------------------------------------
// Polygonal backend

namespace detail {

inline double wall_tolerance(double diam) { return tol::wall_poly * diam; }

inline bool on_wall(const Vec& x, const GraphDomain& dom, double diam) {
    return std::abs(dom.height(x)) <= wall_tolerance(diam);
}

inline void check_contained(const PolySet& E, const GraphDomain& dom) {
    const double eps = tol::contain_poly * E.diameter();
    for (const auto& l : E.loops)
        for (const auto& p : l)
            if (dom.height(p) < -eps) throw std::domain_error("PolySet has material outside the domain");
}

} // namespace detail

/// Length of the boundary of E inside A, excluding edges that lie on the wall.
inline double perimeter_rel(const PolySet& E, const GraphDomain& dom, const Region& A = Region::whole()) {
    if (E.empty()) return 0.0;
    detail::check_contained(E, dom);
    const double diam = E.diameter();
    KahanSum s;
    E.for_each_edge([&](const Vec& a, const Vec& b) {
        if (detail::on_wall((a + b) * 0.5, dom, diam)) return;
        double m = interval_measure(A.segment_intervals(a, b));
        if (m > 0) s += dist(a, b) * m;
    });
    return s.value();
}

/// Area of E inside A (E lies in the domain by invariant).
inline double volume(const PolySet& E, const GraphDomain& dom, const Region& A = Region::whole()) {
    if (E.empty()) return 0.0;
    detail::check_contained(E, dom);
    auto disk = [&](const Vec& c, double r) {
        KahanSum s;
        E.for_each_edge([&](const Vec& a, const Vec& b) { s += detail::triangle_disk_area(a - c, b - c, r); });
        return s.value();
    };
    switch (A.kind) {
    case Region::Kind::whole: return E.signed_area();
    case Region::Kind::ball: return disk(A.c2, A.r2);
    case Region::Kind::annulus: return disk(A.c2, A.r2) - disk(A.c1, A.r1);
    case Region::Kind::halfspace: {
        KahanSum s;
        for (const auto& l : E.loops) s += detail::loop_area(detail::clip_halfplane(l, A.normal, A.offset));
        return s.value();
    }
    default: {
        KahanSum s;
        for (auto l : E.loops) {
            l = detail::clip_halfplane(l, Vec(1, 0), A.hi[0]);
            l = detail::clip_halfplane(l, Vec(-1, 0), -A.lo[0]);
            l = detail::clip_halfplane(l, Vec(0, 1), A.hi[1]);
            l = detail::clip_halfplane(l, Vec(0, -1), -A.lo[1]);
            s += detail::loop_area(l);
        }
        return s.value();
    }
    }
}

/// A piece of reduced boundary: a segment with its inner unit normal (PolySet),
/// or a weighted point (GridSet, a == b).
struct BoundaryElement {
    Vec a, b;
    Vec nu;
    double measure = 0;
    Vec mid() const { return (a + b) * 0.5; }
};

/// Non-wall boundary pieces of E clipped to A; the inner normal is the left normal.
inline std::vector<BoundaryElement> boundary_elements(const PolySet& E, const GraphDomain& dom,
                                                      const Region& A = Region::whole()) {
    std::vector<BoundaryElement> out;
    if (E.empty()) return out;
    const double diam = E.diameter();
    E.for_each_edge([&](const Vec& a, const Vec& b) {
        if (detail::on_wall((a + b) * 0.5, dom, diam)) return;
        Vec d = b - a;
        double len = norm(d);
        if (len == 0) return;
        Vec nu(-d[1] / len, d[0] / len);
        for (auto [s0, s1] : A.segment_intervals(a, b)) {
            BoundaryElement e;
            e.a = a + d * s0;
            e.b = a + d * s1;
            e.nu = nu;
            e.measure = len * (s1 - s0);
            out.push_back(e);
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// Grid backend

inline void check_contained(const GridSet& E, const std::vector<std::uint8_t>& inside) {
    for (std::size_t i = 0; i < E.size(); ++i)
        if (E.bits[i] && !inside[i]) throw std::domain_error("GridSet has material outside the domain");
}

inline Int128 perimeter_units(const GridSet& E, const GraphDomain& dom, const Region& A,
                              const CutMetric& m) {
    detail::PairStructure ps(E, dom, m);
    check_contained(E, ps.inside());
    return cut_units(ps, A, [&](std::size_t i) { return static_cast<int>(E.bits[i]); });
}

/// Crofton-weighted cut between E and the rest of the domain, over pairs with midpoint in A.
inline double perimeter_rel(const GridSet& E, const GraphDomain& dom, const Region& A = Region::whole(),
                            const CutMetric* m = nullptr) {
    const CutMetric& cm = m ? *m : CutMetric::standard(E.n);
    return units_to_measure(perimeter_units(E, dom, A, cm), E.h, E.n);
}

/// Material cells with center in A, times h^n.
inline double volume(const GridSet& E, const GraphDomain&, const Region& A = Region::whole()) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < E.size(); ++i)
        if (E.bits[i] && A.contains(E.center(i))) ++k;
    return static_cast<double>(k) * E.cell_volume();
}

/// Domain cells with center in A that are not material, times h^n.
inline double complement_volume(const GridSet& E, const GraphDomain& dom, const Region& A = Region::whole()) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < E.size(); ++i) {
        if (E.bits[i]) continue;
        Vec x = E.center(i);
        if (A.contains(x) && dom.contains(x)) ++k;
    }
    return static_cast<double>(k) * E.cell_volume();
}

namespace detail {

/// Value of E at cell c (possibly outside the box), read through the mirror
/// when c lies outside the domain; unknown values fall back to E at `self`.
inline double extended_value(const PairStructure& ps, const GridSet& E, const Cell& c, std::size_t self) {
    const GridSet& g = ps.grid();
    bool boxed = g.in_box(c);
    if (boxed && ps.inside()[g.index(c)]) return E.bits[g.index(c)];
    if (boxed || !ps.domain().contains(g.center(c))) {
        std::size_t q = ps.mirror(c);
        return q == PairStructure::npos ? E.bits[self] : E.bits[q];
    }
    return E.bits[self];
}

/// Crofton-weighted symmetric difference, pointing into E.
inline Vec cell_gradient(const PairStructure& ps, const GridSet& E, std::size_t i) {
    const GridSet& g = ps.grid();
    const CutMetric& m = ps.metric();
    Cell c = g.coords(i);
    Vec s(g.n);
    for (std::size_t k = 0; k < m.offsets.size(); ++k) {
        const Offset& o = m.offsets[k];
        Cell p{c[0] + o[0], c[1] + o[1], c[2] + o[2]}, q{c[0] - o[0], c[1] - o[1], c[2] - o[2]};
        if (g.n == 2) { p[2] = 0; q[2] = 0; }
        double d = extended_value(ps, E, p, i) - extended_value(ps, E, q, i);
        for (int a = 0; a < g.n; ++a) s[a] += m.weight[k] * o[static_cast<std::size_t>(a)] * d;
    }
    return s;
}

} // namespace detail

/// Cut pairs with midpoint in A as weighted points carrying the averaged Crofton normal.
inline std::vector<BoundaryElement> boundary_elements(const GridSet& E, const GraphDomain& dom,
                                                      const Region& A = Region::whole(),
                                                      const CutMetric* m = nullptr) {
    const CutMetric& cm = m ? *m : CutMetric::standard(E.n);
    detail::PairStructure ps(E, dom, cm);
    std::vector<BoundaryElement> out;
    std::vector<Vec> grad(E.size());
    std::vector<std::uint8_t> have(E.size(), 0);
    auto gradient = [&](std::size_t i) -> const Vec& {
        if (!have[i]) { grad[i] = detail::cell_gradient(ps, E, i); have[i] = 1; }
        return grad[i];
    };
    const double scale = std::ldexp(std::pow(E.h, E.n - 1), -weight_bits);
    auto [lo, hi] = ps.range(A);
    ps.visit(lo, hi, [&](std::size_t i, std::size_t j, std::size_t, std::int64_t w, const Vec& mid) {
        if (E.bits[i] == E.bits[j] || !A.contains(mid)) return;
        Vec g = gradient(i) + gradient(j);
        double gn = norm(g);
        BoundaryElement e;
        e.a = e.b = mid;
        e.nu = gn > 0 ? g / gn : Vec(E.n);
        e.measure = static_cast<double>(w) * scale;
        out.push_back(e);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Reflection extension

struct PolyReflection {
    /// Oriented boundary chain of E union S(E) after cancelling opposite edges.
    std::vector<std::pair<Vec, Vec>> chain;
    /// Non-wall sub-edges of E on which S is affine.
    std::vector<std::pair<Vec, Vec>> pieces;
    double interface_mass = 0;
    double lip_bound = 0;
};

namespace detail {

inline bool piecewise_affine(const Profile& p) { return p.family == Family::linear || p.family == Family::cone; }

inline std::vector<std::pair<Vec, Vec>> affine_pieces(const Vec& a, const Vec& b, const GraphDomain& dom, double diam) {
    std::vector<double> cuts{0.0, 1.0};
    if ((a[0] < 0 && b[0] > 0) || (a[0] > 0 && b[0] < 0)) cuts.push_back(a[0] / (a[0] - b[0]));
    if (!piecewise_affine(dom.omega)) {
        int k = static_cast<int>(std::ceil(std::abs(b[0] - a[0]) / (diam / 1024)));
        for (int i = 1; i < k; ++i) cuts.push_back(static_cast<double>(i) / k);
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<std::pair<Vec, Vec>> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] <= cuts[i]) continue;
        Vec p = cuts[i] == 0 ? a : a + (b - a) * cuts[i];
        Vec q = cuts[i + 1] == 1 ? b : a + (b - a) * cuts[i + 1];
        out.push_back({p, q});
    }
    return out;
}

} // namespace detail

/// E together with S(E) outside the domain. For walls affine on either side
/// of the origin the reflected edges are exact; otherwise edges are refined.
inline PolyReflection reflect_extend(const PolySet& E, const GraphDomain& dom) {
    PolyReflection out;
    out.lip_bound = dom.lip_reflection_bound();
    if (E.empty()) return out;
    detail::check_contained(E, dom);
    const double diam = E.diameter();
    for (const auto& l : E.loops)
        for (const auto& p : l)
            if (std::abs(p[0]) >= dom.rho - 1e-12 * diam)
                throw std::domain_error("reflect_extend: material touches the lateral boundary of the cylinder");
    // cancellation keys use vertices snapped to a dyadic lattice of ~1e-14 diam
    using Key = std::tuple<double, double, double, double>;
    const double q = std::exp2(std::floor(std::log2(1e-14 * diam)));
    auto key = [q](const Vec& a, const Vec& b) {
        return Key{std::nearbyint(a[0] / q), std::nearbyint(a[1] / q), std::nearbyint(b[0] / q), std::nearbyint(b[1] / q)};
    };
    std::map<Key, int> count;
    std::vector<std::pair<Vec, Vec>> all;
    E.for_each_edge([&](const Vec& a, const Vec& b) {
        for (auto [p, q] : detail::affine_pieces(a, b, dom, diam)) {
            all.push_back({p, q});
            Vec sp = dom.reflect(p), sq = dom.reflect(q);
            all.push_back({sq, sp}); // S reverses orientation
            if (!detail::on_wall((p + q) * 0.5, dom, diam)) out.pieces.push_back({p, q});
        }
    });
    for (const auto& [p, r] : all) ++count[key(p, r)];
    for (const auto& [p, r] : all) {
        auto& self = count[key(p, r)];
        auto it = count.find(key(r, p));
        if (self > 0 && it != count.end() && it->second > 0) {
            --self;
            --it->second;
            continue;
        }
        if (self <= 0) continue;
        --self;
        out.chain.push_back({p, r});
    }
    KahanSum mass;
    for (const auto& [p, q] : out.chain)
        if (detail::on_wall((p + q) * 0.5, dom, diam)) mass += dist(p, q);
    out.interface_mass = mass.value();
    return out;
}

struct BoxBound {
    double lhs = 0;    // P(E~; B)
    double rhs = 0;    // P(E; S(B))
    double factor = 0; // Lip(S)^{n-1}
    bool holds() const { return lhs <= factor * rhs * (1 + 1e-12) + 1e-300; }
};

/// Both sides of P(E~;B) <= Lip(S)^{n-1} P(E;S(B)) for a box B below the wall.
inline BoxBound reflection_box_check(const PolyReflection& R, const Vec& lo, const Vec& hi, const GraphDomain& dom) {
    BoxBound b;
    b.factor = R.lip_bound;
    Region B = Region::box(lo, hi);
    KahanSum l, r;
    for (const auto& [p, q] : R.pieces) {
        Vec sp = dom.reflect(p), sq = dom.reflect(q);
        double m = interval_measure(B.segment_intervals(sp, sq));
        if (m == 0) continue;
        l += dist(sp, sq) * m;
        r += dist(p, q) * m;
    }
    b.lhs = l.value();
    b.rhs = r.value();
    return b;
}

struct GridReflection {
    GridSet extended;
    double interface_mass = 0;
};

/// Cells below the wall take the value of their mirror cell. The interface
/// mass is the trace mismatch across the wall along e_n, h^{n-1} per cell pair.
inline GridReflection reflect_extend(const GridSet& E, const GraphDomain& dom) {
    detail::PairStructure ps(E, dom, CutMetric::standard(E.n));
    check_contained(E, ps.inside());
    GridReflection out;
    out.extended = E;
    for (std::size_t i = 0; i < E.size(); ++i) {
        if (ps.inside()[i]) continue;
        Vec x = E.center(i);
        if (std::abs(x[0]) >= dom.rho && E.n == 2) continue;
        std::size_t q = ps.mirror(E.coords(i));
        out.extended.bits[i] = q == detail::PairStructure::npos ? 0 : E.bits[q];
    }
    std::size_t mism = 0;
    const int ax = E.n - 1;
    for (std::size_t i = 0; i < E.size(); ++i) {
        if (!ps.inside()[i]) continue;
        Cell c = E.coords(i);
        Cell d = c;
        d[static_cast<std::size_t>(ax)] -= 1;
        if (!E.in_box(d)) continue;
        std::size_t j = E.index(d);
        if (ps.inside()[j]) continue;
        if (out.extended.bits[i] != out.extended.bits[j]) ++mism;
    }
    out.interface_mass = static_cast<double>(mism) * std::pow(E.h, E.n - 1);
    return out;
}

// ---------------------------------------------------------------------------
// Off-centric conical competitor

namespace detail {

/// First point of [p, V] where the segment leaves the closure of the domain (V if never).
inline Vec radial_foot(const Vec& p, const Vec& V, const GraphDomain& dom, double r) {
    const double eps = 1e-12 * r;
    auto h = [&](double s) { return dom.height(p + (V - p) * s); };
    const int N = 512;
    double prev = 0;
    for (int k = 1; k <= N; ++k) {
        double s = static_cast<double>(k) / N;
        if (h(s) < -eps) {
            double lo = prev, hi = s;
            for (int it = 0; it < 100; ++it) {
                double mid = 0.5 * (lo + hi);
                if (h(mid) < -eps) hi = mid; else lo = mid;
            }
            return p + (V - p) * lo;
        }
        prev = s;
    }
    return V;
}

} // namespace detail

/// E outside B_r(V_r); inside, the cone from V_r over the trace of E on the sphere, cut to the domain.
inline PolySet conical_competitor(const PolySet& E, const OffcentricChart& chart, const GraphDomain& dom, double r) {
    if (!(r > 0 && r < chart.R)) throw std::invalid_argument("conical_competitor: need 0 < r < R");
    const Vec V = chart.center(r, 2);
    const double diam = std::max(E.diameter(), r);
    const double vtol = 1e-12 * diam;

    struct Piece { std::vector<Vec> pts; };
    struct Crossing { double angle; bool start; int piece; Vec x; };
    std::vector<Piece> pieces;
    std::vector<Crossing> cross;
    PolySet out;

    for (const auto& loop : E.loops) {
        const std::size_t N = loop.size();
        // events along the loop: (edge index, parameter, entering?)
        struct Ev { std::size_t e; double s; bool enter; Vec x; };
        std::vector<Ev> ev;
        for (std::size_t i = 0; i < N; ++i) {
            const Vec& a = loop[i];
            const Vec& b = loop[(i + 1) % N];
            if (std::abs(dist(a, V) - r) <= vtol) throw std::domain_error("conical_competitor: vertex on the sphere, perturb r");
            auto iv = segment_ball(a, b, V, r);
            if (!iv) continue;
            if ((iv->second - iv->first) * dist(a, b) <= vtol) throw std::domain_error("conical_competitor: tangential trace, perturb r");
            if (iv->first > 0) ev.push_back({i, iv->first, true, a + (b - a) * iv->first});
            if (iv->second < 1) ev.push_back({i, iv->second, false, a + (b - a) * iv->second});
        }
        if (ev.empty()) {
            if (dist(loop[0], V) > r) out.loops.push_back(loop);
            continue;
        }
        // rotate so that we start at an exit
        std::size_t first = 0;
        while (ev[first].enter) ++first;
        const std::size_t M = ev.size();
        for (std::size_t t = 0; t < M; ++t) {
            const Ev& q = ev[(first + t) % M];
            if (q.enter) continue;
            const Ev& p = ev[(first + t + 1) % M];
            if (!p.enter) throw std::domain_error("conical_competitor: inconsistent trace");
            Piece pc;
            pc.pts.push_back(q.x);
            std::size_t cnt = (p.e + N - q.e) % N;
            if (cnt == 0 && p.s < q.s) cnt = N;
            for (std::size_t k = 1; k <= cnt; ++k) pc.pts.push_back(loop[(q.e + k) % N]);
            pc.pts.push_back(p.x);
            int id = static_cast<int>(pieces.size());
            auto ang = [&](const Vec& x) { return std::atan2(x[1] - V[1], x[0] - V[0]); };
            cross.push_back({ang(q.x), true, id, q.x});
            cross.push_back({ang(p.x), false, id, p.x});
            pieces.push_back(std::move(pc));
        }
    }
    if (pieces.empty()) return out;

    std::sort(cross.begin(), cross.end(), [](const Crossing& a, const Crossing& b) { return a.angle < b.angle; });
    const std::size_t C = cross.size();
    std::vector<int> next(pieces.size(), -1);
    for (std::size_t k = 0; k < C; ++k) {
        if (cross[k].start) continue;
        const Crossing& nb = cross[(k + C - 1) % C]; // clockwise neighbour
        if (!nb.start) throw std::domain_error("conical_competitor: inconsistent trace");
        next[static_cast<std::size_t>(cross[k].piece)] = nb.piece;
    }
    const Vec vertex0 = Vec(0.0, dom.omega(Vec{0.0}));
    auto connect = [&](std::vector<Vec>& loop, const Vec& p, const Vec& q) {
        Vec fp = detail::radial_foot(p, V, dom, r), fq = detail::radial_foot(q, V, dom, r);
        loop.push_back(fp);
        if (dist(fp, fq) > vtol) {
            bool both_wall = std::abs(dom.height(fp)) <= vtol && std::abs(dom.height(fq)) <= vtol;
            if (both_wall && ((fp[0] < 0 && fq[0] > 0) || (fp[0] > 0 && fq[0] < 0))) loop.push_back(vertex0);
            loop.push_back(fq);
        }
    };
    std::vector<std::uint8_t> used(pieces.size(), 0);
    for (std::size_t s = 0; s < pieces.size(); ++s) {
        if (used[s]) continue;
        std::vector<Vec> loop;
        std::size_t cur = s;
        while (!used[cur]) {
            used[cur] = 1;
            const auto& pts = pieces[cur].pts;
            loop.insert(loop.end(), pts.begin(), pts.end());
            int nx = next[cur];
            if (nx < 0) throw std::domain_error("conical_competitor: unmatched trace endpoint");
            connect(loop, pts.back(), pieces[static_cast<std::size_t>(nx)].pts.front());
            cur = static_cast<std::size_t>(nx);
        }
        // drop consecutive duplicates
        std::vector<Vec> clean;
        for (const auto& p : loop)
            if (clean.empty() || dist(clean.back(), p) > vtol) clean.push_back(p);
        while (clean.size() > 1 && dist(clean.front(), clean.back()) <= vtol) clean.pop_back();
        if (clean.size() >= 3) out.loops.push_back(std::move(clean));
    }
    return out;
}

/// Grid version: cells of the domain inside B_r(V_r) copy E at Y_r(x).
inline GridSet conical_competitor(const GridSet& E, const OffcentricChart& chart, const GraphDomain& dom, double r) {
    if (!(r > 0 && r < chart.R)) throw std::invalid_argument("conical_competitor: need 0 < r < R");
    if (r < 2 * E.h) throw std::domain_error("conical_competitor: radius below grid resolution");
    const Vec V = chart.center(r, E.n);
    GridSet out = E;
    for (std::size_t i = 0; i < E.size(); ++i) {
        Vec x = E.center(i);
        double d = dist(x, V);
        if (!(d < r) || !dom.contains(x)) continue;
        if (d == 0) { out.bits[i] = 0; continue; }
        Vec y = V + (x - V) * (r / d);
        out.bits[i] = E.get(E.cell_of(y)) ? 1 : 0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Coarea

struct CoareaResult {
    Int128 variation_units = 0;
    Int128 level_units = 0;
    double variation = 0;
    double level_sum = 0;
    bool exact() const { return variation_units == level_units; }
};

/// |Df|(Omega cap A) as a weighted cut sum against the integral of the
/// superlevel perimeters, for an integer-valued map on the grid of `geometry`.
inline CoareaResult coarea_check(const GridSet& geometry, const std::vector<int>& f, const GraphDomain& dom,
                                 const Region& A = Region::whole(), const CutMetric* m = nullptr) {
    if (f.size() != geometry.size()) throw std::invalid_argument("coarea_check: map size does not match the grid");
    const CutMetric& cm = m ? *m : CutMetric::standard(geometry.n);
    detail::PairStructure ps(geometry, dom, cm);
    CoareaResult res;
    res.variation_units = cut_units(ps, A, [&](std::size_t i) { return f[i]; });
    std::vector<int> levels;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (ps.inside()[i]) levels.push_back(f[i]);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    for (std::size_t k = 1; k < levels.size(); ++k) {
        int t = levels[k];
        Int128 p = cut_units(ps, A, [&](std::size_t i) { return f[i] >= t ? 1 : 0; });
        res.level_units += p * (levels[k] - levels[k - 1]);
    }
    res.variation = units_to_measure(res.variation_units, geometry.h, geometry.n);
    res.level_sum = units_to_measure(res.level_units, geometry.h, geometry.n);
    return res;
}

} // namespace visilab
