#pragma once

#include "polyset.hpp"

#include <map>

namespace visilab {

enum class SetStatus { none, minimizer, lambda_minimizer, non_minimizer };

inline std::string_view to_string(SetStatus s) {
    switch (s) {
    case SetStatus::minimizer: return "minimizer";
    case SetStatus::lambda_minimizer: return "lambda-minimizer";
    case SetStatus::non_minimizer: return "non-minimizer";
    default: return "none";
    }
}

using Params = std::map<std::string, double>;

struct CorpusEntry {
    std::string name;
    std::string description;
    GraphDomain dom;
    VisibilityFunction u;
    std::optional<PolySet> set;
    SetStatus status = SetStatus::none;
    double lambda = 0;
    Verdict expected = Verdict::pass;
    Params params; // every parameter, defaults filled in

    OffcentricChart chart() const { return to_offcentric(u); }
};

inline const std::vector<std::string>& example_names() {
    static const std::vector<std::string> names{"wedge",    "halfplane",         "c1beta",          "convex-paraboloid",
                                                "bounce",   "sin-graph",         "quadrant",        "shifted-halfplane",
                                                "bumped-quadrant", "disk"};
    return names;
}

namespace detail {

inline GraphDomain planar(Profile p, double lip, double rho = 1.0, double m = 10.0) {
    GraphDomain d;
    d.n = 2;
    d.rho = rho;
    d.m = m;
    d.omega = std::move(p);
    d.lipschitz = lip;
    d.validate();
    return d;
}

/// Omega cap {x_1 < 0} cut off at height H, inside the cone omega = c|x|.
inline PolySet left_half(double c, double H, double rho) {
    double w = std::min(0.999 * rho, c > 0 ? H / c : H);
    if (c * w >= H) w = 0.999 * H / c;
    return PolySet::polygon({Vec(0, 0), Vec(0, H), Vec(-w, H), Vec(-w, c * w)});
}

/// Quadrant of side L with tents bulging into x_1 < 0: tent k has vertices
/// (0, r_k), (-a r_k^2, 3 r_k / 4), (0, r_k / 2) with r_k = 2^-k.
inline PolySet bumped_quadrant(double L, double a, int first, int levels) {
    std::vector<Vec> p{Vec(0, 0), Vec(L, 0), Vec(L, L), Vec(0, L)};
    for (int k = first; k < first + levels; ++k) {
        double r = std::ldexp(1.0, -k);
        if (!(r < L)) throw std::invalid_argument("bumped-quadrant: first tent must lie below L");
        if (k == first) p.push_back(Vec(0, r));
        p.push_back(Vec(-a * r * r, 0.75 * r));
        p.push_back(Vec(0, 0.5 * r));
    }
    return PolySet::polygon(std::move(p));
}

inline PolySet disk_set(double cx, double cy, double r, int N, bool half) {
    if (!half) return PolySet::regular_disk(Vec(cx, cy), r, N);
    // upper half of the disk centered on the wall point (cx, 0)
    std::vector<Vec> p;
    for (int k = 0; k <= N / 2; ++k) {
        double th = std::numbers::pi * k / (N / 2);
        p.push_back(Vec(cx + r * std::cos(th), r * std::sin(th)));
    }
    p.back() = Vec(cx - r, 0);
    p.front() = Vec(cx + r, 0);
    return PolySet::polygon(std::move(p));
}

} // namespace detail

/// A named example; params override the defaults listed in the returned entry.
inline CorpusEntry make_example(const std::string& name, const Params& overrides = {}) {
    CorpusEntry e;
    e.name = name;
    auto take = [&](Params defaults) {
        for (const auto& [k, v] : overrides) {
            if (!defaults.count(k)) throw std::invalid_argument("make_example(" + name + "): unknown parameter " + k);
            defaults[k] = v;
        }
        e.params = defaults;
        return defaults;
    };
    auto halfplane_dom = [](double rho) { return detail::planar(Profile::linear({0}), 0.0, rho); };

    if (name == "wedge") {
        auto p = take({{"c", 1.0}, {"H", 0.8}});
        if (!(p["c"] > 0)) throw std::invalid_argument("wedge: c must be positive");
        e.description = "Lipschitz cone omega = c|x|, visibility u = 0";
        e.dom = detail::planar(Profile::cone(p["c"]), p["c"]);
        e.u = VisibilityFunction::zero(1.0);
        e.set = detail::left_half(p["c"], p["H"], e.dom.rho);
    } else if (name == "halfplane") {
        auto p = take({{"H", 0.8}});
        e.description = "flat wall omega = 0, visibility u = 0";
        e.dom = halfplane_dom(1.0);
        e.u = VisibilityFunction::zero(1.0);
        e.set = detail::left_half(0.0, p["H"], e.dom.rho);
        e.status = SetStatus::minimizer;
    } else if (name == "c1beta") {
        auto p = take({{"beta", 0.5}, {"C", 1.0}});
        double b = p["beta"];
        if (!(b > 0 && b <= 1)) throw std::invalid_argument("c1beta: beta must lie in (0, 1]");
        e.description = "omega = |x|^{1+beta} with Hoelder gradient, u = C t^{1+beta}";
        e.dom = detail::planar(Profile::power(1.0, 1 + b), 1 + b);
        e.u = VisibilityFunction::power(p["C"], 1 + b, 0.5);
    } else if (name == "convex-paraboloid") {
        take({});
        e.description = "convex wall omega = |x|^2, u = t^2";
        e.dom = detail::planar(Profile::paraboloid(), 2.0);
        e.u = VisibilityFunction::power(1.0, 2.0, 0.5);
    } else if (name == "bounce") {
        auto p = take({{"alpha", 16.0}});
        e.description = "piecewise-linear wall bouncing between y and y + y^2, u = alpha y^2";
        e.dom = detail::planar(Profile::bouncing(), bounce::a(0));
        e.u = VisibilityFunction::power(p["alpha"], 2.0, 0.5);
    } else if (name == "sin-graph") {
        auto p = take({{"C", 16.0}});
        e.description = "omega = x^2 sin(1/|x|), not visible for any quadratic u";
        e.dom = detail::planar(Profile::sin_graph(), 3.0);
        e.u = VisibilityFunction::power(p["C"], 2.0, 1.0);
        e.expected = Verdict::fail;
    } else if (name == "quadrant") {
        auto p = take({{"L", 0.9}});
        e.description = "quadrant {x_1 > 0} in the half-plane, a relative perimeter minimizer";
        e.dom = halfplane_dom(1.0);
        e.u = VisibilityFunction::zero(1.0);
        double L = p["L"];
        e.set = PolySet::polygon({Vec(0, 0), Vec(L, 0), Vec(L, L), Vec(0, L)});
        e.status = SetStatus::minimizer;
    } else if (name == "shifted-halfplane") {
        auto p = take({{"c", 0.5}, {"L", 0.9}});
        e.description = "half-plane {x_2 < c} parallel to the wall";
        e.dom = halfplane_dom(1.0);
        e.u = VisibilityFunction::zero(1.0);
        double L = p["L"], c = p["c"];
        e.set = PolySet::polygon({Vec(-L, 0), Vec(L, 0), Vec(L, c), Vec(-L, c)});
        e.status = SetStatus::minimizer;
    } else if (name == "bumped-quadrant") {
        auto p = take({{"a", 1.0 / 32}, {"first", 0}, {"levels", 12}, {"L", 1.5}});
        e.description = "quadrant with tents of height a r^2 on [r/2, r] at every dyadic r";
        e.dom = halfplane_dom(2.0);
        e.u = VisibilityFunction::zero(1.0);
        e.set = detail::bumped_quadrant(p["L"], p["a"], static_cast<int>(p["first"]), static_cast<int>(p["levels"]));
        e.status = SetStatus::lambda_minimizer;
        // a tent on [r/2, r] adds 2 sqrt(r^2/16 + a^2 r^4) - r/2 <= 4 a^2 r^3 of length, so the
        // gap on B_r is at most (32/7) a^2 r^3 <= Lambda pi r^2 for r <= 1 with Lambda = 2 a^2
        // (the tents start at r = 2^-first <= 1)
        e.lambda = 2 * p["a"] * p["a"];
    } else if (name == "disk") {
        auto p = take({{"cx", 0.0}, {"cy", 0.5}, {"r", 0.3}, {"N", 4096}, {"half", 0}});
        bool half = p["half"] != 0;
        e.description = half ? "half-disk resting on the wall" : "inscribed polygonal disk away from the wall";
        e.dom = halfplane_dom(half ? p["r"] + 1 : 1.0);
        e.u = VisibilityFunction::zero(1.0);
        e.set = detail::disk_set(p["cx"], half ? 0.0 : p["cy"], p["r"], static_cast<int>(p["N"]), half);
    } else {
        throw std::invalid_argument("unknown example: " + name);
    }
    if (e.set) e.set->validate();
    return e;
}

} // namespace visilab
