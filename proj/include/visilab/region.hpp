#pragma once

#include "foliation.hpp"

#include <utility>

namespace visilab {

using Interval = std::pair<double, double>;

/// Parameter sub-interval of [0,1] where |a + s(b-a) - c| < r.
inline std::optional<Interval> segment_ball(const Vec& a, const Vec& b, const Vec& c, double r) {
    Vec d = b - a, f = a - c;
    double A = dot(d, d), B = dot(f, d), C = dot(f, f) - r * r;
    if (A == 0) {
        if (C < 0) return Interval{0.0, 1.0};
        return std::nullopt;
    }
    double disc = B * B - A * C;
    if (disc <= 0) return std::nullopt;
    double sq = std::sqrt(disc);
    // numerically stable roots
    double q = -(B + std::copysign(sq, B));
    double s1 = q / A, s2 = q != 0 ? C / q : -s1;
    if (s1 > s2) std::swap(s1, s2);
    double lo = std::max(0.0, s1), hi = std::min(1.0, s2);
    if (!(hi > lo)) return std::nullopt;
    return Interval{lo, hi};
}

/// Test regions A: centered or off-centric balls, off-centric annuli, half-spaces and boxes.
/// Balls and annuli are open; measure-zero boundary conventions do not matter to any caller.
struct Region {
    enum class Kind { whole, ball, annulus, halfspace, box };
    Kind kind = Kind::whole;
    Vec c1, c2;  // ball: c2; annulus: B_{r2}(c2) minus B_{r1}(c1)
    double r1 = 0, r2 = 0;
    Vec normal;  // halfspace <normal, x> < offset
    double offset = 0;
    Vec lo, hi;  // box

    static Region whole() { return {}; }
    static Region ball(const Vec& c, double r) {
        Region g;
        g.kind = Kind::ball; g.c2 = c; g.r2 = r;
        return g;
    }
    static Region offball(const OffcentricChart& ch, double r, int n) { return ball(ch.center(r, n), r); }
    static Region annulus(const OffcentricChart& ch, double r1, double r2, int n) {
        if (!(r1 < r2)) throw std::invalid_argument("Region::annulus: need r1 < r2");
        Region g;
        g.kind = Kind::annulus;
        g.c1 = ch.center(r1, n); g.r1 = r1;
        g.c2 = ch.center(r2, n); g.r2 = r2;
        if (dist(g.c1, g.c2) + r1 > r2 * (1 + 1e-14))
            throw std::invalid_argument("Region::annulus: inner ball not nested in the outer one");
        return g;
    }
    static Region halfspace(const Vec& normal, double offset) {
        Region g;
        g.kind = Kind::halfspace; g.normal = normal; g.offset = offset;
        return g;
    }
    static Region box(const Vec& lo, const Vec& hi) {
        Region g;
        g.kind = Kind::box; g.lo = lo; g.hi = hi;
        return g;
    }

    bool contains(const Vec& x) const {
        switch (kind) {
        case Kind::whole: return true;
        case Kind::ball: return dist(x, c2) < r2;
        case Kind::annulus: return dist(x, c2) < r2 && !(dist(x, c1) < r1);
        case Kind::halfspace: return dot(normal, x) < offset;
        default:
            for (int i = 0; i < x.n; ++i)
                if (!(x[i] > lo[i] && x[i] < hi[i])) return false;
            return true;
        }
    }

    /// Signed distance to the complement, positive inside (whole: +inf).
    double inner_distance(const Vec& x) const {
        switch (kind) {
        case Kind::whole: return std::numeric_limits<double>::infinity();
        case Kind::ball: return r2 - dist(x, c2);
        case Kind::annulus: return std::min(r2 - dist(x, c2), dist(x, c1) - r1);
        case Kind::halfspace: return (offset - dot(normal, x)) / norm(normal);
        default: {
            double d = std::numeric_limits<double>::infinity();
            for (int i = 0; i < x.n; ++i) d = std::min({d, x[i] - lo[i], hi[i] - x[i]});
            return d;
        }
        }
    }

    /// Axis-aligned bounding box, when bounded.
    std::optional<std::pair<Vec, Vec>> bbox(int n) const {
        if (kind == Kind::ball || kind == Kind::annulus) {
            Vec a(n), b(n);
            for (int i = 0; i < n; ++i) { a[i] = c2[i] - r2; b[i] = c2[i] + r2; }
            return std::pair{a, b};
        }
        if (kind == Kind::box) return std::pair{lo, hi};
        return std::nullopt;
    }

    /// Sorted disjoint parameter intervals of the segment a + s(b-a), s in [0,1], inside the region.
    std::vector<Interval> segment_intervals(const Vec& a, const Vec& b) const {
        std::vector<Interval> out;
        switch (kind) {
        case Kind::whole: out.push_back({0.0, 1.0}); break;
        case Kind::ball:
            if (auto i = segment_ball(a, b, c2, r2)) out.push_back(*i);
            break;
        case Kind::annulus: {
            auto o = segment_ball(a, b, c2, r2);
            if (!o) break;
            auto in = segment_ball(a, b, c1, r1);
            if (!in || in->second <= o->first || in->first >= o->second) { out.push_back(*o); break; }
            if (in->first > o->first) out.push_back({o->first, in->first});
            if (in->second < o->second) out.push_back({in->second, o->second});
            break;
        }
        case Kind::halfspace: {
            double fa = dot(normal, a) - offset, fb = dot(normal, b) - offset;
            if (fa < 0 && fb < 0) out.push_back({0.0, 1.0});
            else if (fa < 0 && fb >= 0) out.push_back({0.0, fa / (fa - fb)});
            else if (fa >= 0 && fb < 0) out.push_back({fa / (fa - fb), 1.0});
            break;
        }
        default: {
            // Liang-Barsky
            double t0 = 0, t1 = 1;
            for (int i = 0; i < a.n; ++i) {
                double d = b[i] - a[i];
                if (d == 0) {
                    if (!(a[i] > lo[i] && a[i] < hi[i])) return out;
                    continue;
                }
                double u0 = (lo[i] - a[i]) / d, u1 = (hi[i] - a[i]) / d;
                if (u0 > u1) std::swap(u0, u1);
                t0 = std::max(t0, u0);
                t1 = std::min(t1, u1);
            }
            if (t1 > t0) out.push_back({t0, t1});
            break;
        }
        }
        return out;
    }

    /// The region t A (pure similarity about the origin).
    Region scaled(double t) const {
        Region g = *this;
        g.c1 *= t; g.c2 *= t; g.r1 *= t; g.r2 *= t;
        g.offset *= t;
        g.lo *= t; g.hi *= t;
        return g;
    }
};

inline double interval_measure(const std::vector<Interval>& v) {
    double s = 0;
    for (auto [a, b] : v) s += b - a;
    return s;
}

} // namespace visilab
