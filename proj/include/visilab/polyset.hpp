#pragma once

#include "region.hpp"

#include <map>

namespace visilab {

/// Exact planar set of finite perimeter: simple loops with material on the left
/// (outer boundaries counter-clockwise, holes clockwise).
struct PolySet {
    std::vector<std::vector<Vec>> loops;

    static PolySet polygon(std::vector<Vec> pts) {
        PolySet s;
        s.loops.push_back(std::move(pts));
        return s;
    }
    /// Inscribed regular N-gon of a disk.
    static PolySet regular_disk(const Vec& c, double r, int N) {
        std::vector<Vec> p;
        p.reserve(static_cast<std::size_t>(N));
        for (int k = 0; k < N; ++k) {
            double th = 2 * std::numbers::pi * k / N;
            p.push_back(c + Vec(std::cos(th), std::sin(th)) * r);
        }
        return polygon(std::move(p));
    }

    bool empty() const { return loops.empty(); }
    std::size_t vertex_count() const {
        std::size_t k = 0;
        for (const auto& l : loops) k += l.size();
        return k;
    }

    template <class F>
    void for_each_edge(F&& f) const {
        for (const auto& l : loops)
            for (std::size_t i = 0; i < l.size(); ++i) f(l[i], l[(i + 1) % l.size()]);
    }

    double diameter() const {
        if (empty()) return 0.0;
        double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
        for (const auto& l : loops)
            for (const auto& p : l) {
                x0 = std::min(x0, p[0]); x1 = std::max(x1, p[0]);
                y0 = std::min(y0, p[1]); y1 = std::max(y1, p[1]);
            }
        return std::hypot(x1 - x0, y1 - y0);
    }

    double signed_area() const {
        KahanSum s;
        for_each_edge([&](const Vec& a, const Vec& b) { s += 0.5 * cross2(a, b); });
        return s.value();
    }

    /// Nonzero winding rule.
    bool contains(const Vec& x) const {
        int w = 0;
        for_each_edge([&](const Vec& a, const Vec& b) {
            if (a[1] <= x[1]) {
                if (b[1] > x[1] && cross2(b - a, x - a) > 0) ++w;
            } else if (b[1] <= x[1] && cross2(b - a, x - a) < 0) {
                --w;
            }
        });
        return w != 0;
    }

    PolySet scaled(double t) const {
        if (!(t > 0)) throw std::invalid_argument("PolySet::scaled: t must be positive");
        PolySet s = *this;
        for (auto& l : s.loops)
            for (auto& p : l) p *= t;
        return s;
    }
    PolySet translated(const Vec& d) const {
        PolySet s = *this;
        for (auto& l : s.loops)
            for (auto& p : l) p += d;
        return s;
    }

    /// Loops are non-degenerate, pairwise non-crossing and enclose positive area.
    void validate() const {
        const double diam = diameter();
        const double eps = 1e-12 * diam;
        std::vector<std::pair<Vec, Vec>> e;
        for_each_edge([&](const Vec& a, const Vec& b) {
            if (!(dist(a, b) > eps)) throw std::invalid_argument("PolySet: degenerate edge");
            e.push_back({a, b});
        });
        for (const auto& l : loops)
            if (l.size() < 3) throw std::invalid_argument("PolySet: loop with fewer than 3 vertices");
        auto proper = [](const Vec& p, const Vec& q, const Vec& r, const Vec& s) {
            double d1 = cross2(q - p, r - p), d2 = cross2(q - p, s - p);
            double d3 = cross2(s - r, p - r), d4 = cross2(s - r, q - r);
            return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
        };
        for (std::size_t i = 0; i < e.size(); ++i) {
            double xi0 = std::min(e[i].first[0], e[i].second[0]), xi1 = std::max(e[i].first[0], e[i].second[0]);
            double yi0 = std::min(e[i].first[1], e[i].second[1]), yi1 = std::max(e[i].first[1], e[i].second[1]);
            for (std::size_t j = i + 1; j < e.size(); ++j) {
                const auto& [r, s] = e[j];
                if (std::max(r[0], s[0]) < xi0 || std::min(r[0], s[0]) > xi1) continue;
                if (std::max(r[1], s[1]) < yi0 || std::min(r[1], s[1]) > yi1) continue;
                if (proper(e[i].first, e[i].second, r, s)) throw std::invalid_argument("PolySet: loops self-intersect");
            }
        }
        if (!(signed_area() > 0)) throw std::invalid_argument("PolySet: loops must enclose positive area (material on the left)");
    }

    /// Drops vertices whose neighbours are collinear within tol * diameter and
    /// rotates each loop to start at its lexicographically smallest vertex.
    PolySet normalized(double tol = 1e-12) const {
        const double eps = tol * std::max(diameter(), 1e-300);
        PolySet out;
        for (auto l : loops) {
            bool changed = true;
            while (changed && l.size() > 3) {
                changed = false;
                for (std::size_t i = 0; i < l.size() && l.size() > 3; ++i) {
                    const Vec& a = l[(i + l.size() - 1) % l.size()];
                    const Vec& b = l[i];
                    const Vec& c = l[(i + 1) % l.size()];
                    double len = dist(a, c);
                    bool dup = dist(a, b) <= eps;
                    bool on = len > 0 && std::abs(cross2(c - a, b - a)) / len <= eps && dot(b - a, c - b) >= 0;
                    if (dup || on) {
                        l.erase(l.begin() + static_cast<std::ptrdiff_t>(i));
                        changed = true;
                        --i;
                    }
                }
            }
            auto it = std::min_element(l.begin(), l.end(), [](const Vec& p, const Vec& q) {
                return p[0] < q[0] || (p[0] == q[0] && p[1] < q[1]);
            });
            std::rotate(l.begin(), it, l.end());
            out.loops.push_back(std::move(l));
        }
        std::sort(out.loops.begin(), out.loops.end(), [](const auto& p, const auto& q) {
            return p[0][0] < q[0][0] || (p[0][0] == q[0][0] && p[0][1] < q[0][1]);
        });
        return out;
    }
};

/// Vertex-by-vertex comparison after normalization.
inline bool approx_equal(const PolySet& A, const PolySet& B, double tol = 1e-12) {
    auto a = A.normalized(tol), b = B.normalized(tol);
    if (a.loops.size() != b.loops.size()) return false;
    const double eps = tol * std::max({A.diameter(), B.diameter(), 1e-300}) * 10;
    for (std::size_t i = 0; i < a.loops.size(); ++i) {
        if (a.loops[i].size() != b.loops[i].size()) return false;
        for (std::size_t k = 0; k < a.loops[i].size(); ++k)
            if (dist(a.loops[i][k], b.loops[i][k]) > eps) return false;
    }
    return true;
}

namespace detail {

/// Signed area of triangle (0, a, b) intersected with the disk |x| < r.
inline double triangle_disk_area(const Vec& a, const Vec& b, double r) {
    auto iv = segment_ball(a, b, Vec(0, 0), r);
    std::vector<double> cuts{0.0};
    if (iv) {
        if (iv->first > 0) cuts.push_back(iv->first);
        if (iv->second < 1) cuts.push_back(iv->second);
    }
    cuts.push_back(1.0);
    double s = 0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        Vec p = a + (b - a) * cuts[k], q = a + (b - a) * cuts[k + 1];
        double mid = 0.5 * (cuts[k] + cuts[k + 1]);
        bool inside = iv && mid > iv->first && mid < iv->second;
        if (inside) s += 0.5 * cross2(p, q);
        else s += 0.5 * r * r * std::atan2(cross2(p, q), dot(p, q));
    }
    return s;
}

/// One Sutherland-Hodgman pass: keeps the part of the loop with <n, x> <= c.
inline std::vector<Vec> clip_halfplane(const std::vector<Vec>& loop, const Vec& nrm, double c) {
    std::vector<Vec> out;
    for (std::size_t i = 0; i < loop.size(); ++i) {
        const Vec& p = loop[i];
        const Vec& q = loop[(i + 1) % loop.size()];
        double fp = dot(nrm, p) - c, fq = dot(nrm, q) - c;
        if (fp <= 0) out.push_back(p);
        if ((fp < 0 && fq > 0) || (fp > 0 && fq < 0)) out.push_back(p + (q - p) * (fp / (fp - fq)));
    }
    return out;
}

inline double loop_area(const std::vector<Vec>& l) {
    KahanSum s;
    for (std::size_t i = 0; i < l.size(); ++i) s += 0.5 * cross2(l[i], l[(i + 1) % l.size()]);
    return s.value();
}

} // namespace detail

} // namespace visilab
