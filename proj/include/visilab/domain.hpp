#pragma once

#include "core.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace visilab {

// ---------------------------------------------------------------------------
// Profiles

enum class Family { linear, cone, power, paraboloid, bounce, sin_graph, sampled };

inline std::string_view family_name(Family f) {
    switch (f) {
    case Family::linear: return "linear";
    case Family::cone: return "cone";
    case Family::power: return "power";
    case Family::paraboloid: return "convex-paraboloid";
    case Family::bounce: return "bounce";
    case Family::sin_graph: return "sin-graph";
    default: return "sampled";
    }
}

inline Family family_from_name(std::string_view s) {
    for (Family f : {Family::linear, Family::cone, Family::power, Family::paraboloid,
                     Family::bounce, Family::sin_graph, Family::sampled})
        if (family_name(f) == s) return f;
    throw std::invalid_argument("unknown profile family: " + std::string(s));
}

namespace bounce {
inline double y(int i) { return std::ldexp(1.0, -i); }
inline double ytilde(int i) { return std::ldexp(1.0, -i) + std::ldexp(1.0, -2 * i); }
inline double a(int i) { return (1 + 3 * std::ldexp(1.0, -(i + 1))) / (1 - std::ldexp(1.0, -(i + 1))); }
inline double b(int i) {
    return (std::ldexp(1.0, -2 * i) + std::ldexp(1.0, -(3 * i + 1))) / (1 - std::ldexp(1.0, -(i + 1)));
}

namespace detail {
struct Tables {
    static constexpr int size = 1100;
    std::array<double, size> a, b, yt;
    Tables() {
        for (int i = 0; i < size; ++i) {
            a[static_cast<std::size_t>(i)] = bounce::a(i);
            b[static_cast<std::size_t>(i)] = bounce::b(i);
            yt[static_cast<std::size_t>(i)] = bounce::ytilde(i);
        }
    }
};
inline const Tables& tables() {
    static const Tables t;
    return t;
}
} // namespace detail

/// The piecewise-linear profile: on (y_{i+1}, y~_{i+1}] constant y~_{i+1},
/// on [y~_{i+1}, y_i] the line a_i y - b_i.
inline double value(double t) {
    if (t <= 0) return 0.0;
    if (t > 1) return a(0) * t - b(0);
    int e;
    double m = std::frexp(t, &e);
    int i = (m == 0.5) ? 1 - e : -e;
    const auto& T = detail::tables();
    if (i + 1 >= T.size) return t;
    double yt = T.yt[static_cast<std::size_t>(i + 1)];
    if (t <= yt) return yt;
    return T.a[static_cast<std::size_t>(i)] * t - T.b[static_cast<std::size_t>(i)];
}

/// Right derivative.
inline double deriv(double t) {
    if (t < 0) return 0.0;
    if (t >= 1) return a(0);
    if (t == 0) return 0.0;
    int e;
    std::frexp(t, &e);
    int i = -e;
    const auto& T = detail::tables();
    if (i + 1 >= T.size) return 1.0;
    return t < T.yt[static_cast<std::size_t>(i + 1)] ? 0.0 : T.a[static_cast<std::size_t>(i)];
}
} // namespace bounce

/// The profile omega on the base disk.  Radial families depend on |x'| only;
/// `scale` implements omega_s(x') = omega(s x')/s without resampling.
struct Profile {
    Family family = Family::cone;
    std::vector<double> a; // linear coefficients
    double c = 1.0;        // cone / power coefficient
    double p = 2.0;        // power exponent
    double scale = 1.0;

    // sampled radial profiles: values[d][k] = omega(s[k] * dirs[d])
    std::vector<Vec> dirs;
    std::vector<double> s;
    std::vector<std::vector<double>> values;

    bool analytic() const { return family != Family::sampled; }
    bool radial() const { return family != Family::linear && family != Family::sampled; }

    static Profile linear(std::vector<double> coef) { Profile q; q.family = Family::linear; q.a = std::move(coef); return q; }
    static Profile cone(double c) { Profile q; q.family = Family::cone; q.c = c; return q; }
    static Profile power(double c, double p) { Profile q; q.family = Family::power; q.c = c; q.p = p; return q; }
    static Profile paraboloid() { Profile q; q.family = Family::paraboloid; q.c = 1; q.p = 2; return q; }
    static Profile bouncing() { Profile q; q.family = Family::bounce; return q; }
    static Profile sin_graph() { Profile q; q.family = Family::sin_graph; return q; }

    /// omega along a ray: omega(r * nu) for a unit direction nu.
    double radial_value(const Vec& nu, double r) const {
        switch (family) {
        case Family::linear: {
            double d = 0;
            for (int i = 0; i < nu.n; ++i) d += a[static_cast<std::size_t>(i)] * nu[i];
            return r * d;
        }
        case Family::cone: return c * r;
        case Family::power:
        case Family::paraboloid:
            if (p == 2) return c * scale * r * r;
            return c * std::pow(scale, p - 1) * std::pow(r, p);
        case Family::bounce: return bounce::value(scale * r) / scale;
        case Family::sin_graph: {
            double x = scale * r;
            return x == 0 ? 0.0 : x * x * std::sin(1.0 / x) / scale;
        }
        default: return sampled_value(nu, r);
        }
    }

    /// Right derivative of r -> omega(r nu).
    double radial_derivative(const Vec& nu, double r) const {
        switch (family) {
        case Family::linear: {
            double d = 0;
            for (int i = 0; i < nu.n; ++i) d += a[static_cast<std::size_t>(i)] * nu[i];
            return d;
        }
        case Family::cone: return c;
        case Family::power:
        case Family::paraboloid:
            return r == 0 ? (p > 1 ? 0.0 : std::numeric_limits<double>::infinity())
                          : c * p * std::pow(scale, p - 1) * std::pow(r, p - 1);
        case Family::bounce: return bounce::deriv(scale * r);
        case Family::sin_graph: {
            double x = scale * r;
            return x == 0 ? 0.0 : 2 * x * std::sin(1.0 / x) - std::cos(1.0 / x);
        }
        default: {
            double hstep = sampled_spacing(r);
            double lo = std::max(0.0, r - hstep);
            return (sampled_value(nu, r + hstep) - sampled_value(nu, lo)) / (r + hstep - lo);
        }
        }
    }

    double operator()(const Vec& xp) const {
        if (family == Family::linear) {
            double d = 0;
            for (int i = 0; i < xp.n; ++i) d += a[static_cast<std::size_t>(i)] * xp[i];
            return d;
        }
        double r = norm(xp);
        if (r == 0) return 0.0;
        return radial_value(xp / r, r);
    }

    /// Kinks and named critical radii in [lo, hi] (unscaled coordinates of this profile).
    std::vector<double> features(double lo, double hi) const {
        std::vector<double> f;
        if (family == Family::bounce) {
            for (int i = 0; i < 1000; ++i) {
                double yi = bounce::y(i) / scale, yt = bounce::ytilde(i) / scale;
                if (yt < lo) break;
                if (yi >= lo && yi <= hi) f.push_back(yi);
                if (yt >= lo && yt <= hi) f.push_back(yt);
            }
        } else if (family == Family::sin_graph) {
            double floor = std::max(lo, hi * 1e-2);
            for (int k = 0; k < 4096; ++k) {
                double base = (2 * k + 1) * std::numbers::pi;
                if (1.0 / ((base + std::numbers::pi / 2) * scale) < floor) break;
                for (int j = -2; j <= 2; ++j) {
                    double x = 1.0 / ((base + j * std::numbers::pi / 4) * scale);
                    if (x >= lo && x <= hi) f.push_back(x);
                }
            }
        }
        std::sort(f.begin(), f.end());
        return f;
    }

    /// Boundary points known to be invisible candidates (x_k where omega = 0 and omega' = 1).
    /// Returned as (k, x_k) with x_k decreasing.
    std::vector<std::pair<int, double>> critical_points(double lo, double hi) const {
        std::vector<std::pair<int, double>> f;
        if (family != Family::sin_graph) return f;
        for (int k = 0; k < 100000; ++k) {
            double x = 1.0 / ((2 * k + 1) * std::numbers::pi * scale);
            if (x < lo) break;
            if (x <= hi) f.emplace_back(k, x);
        }
        return f;
    }

    Profile rescaled(double t) const {
        Profile q = *this;
        if (family == Family::sampled) {
            for (auto& x : q.s) x /= t;
            for (auto& row : q.values) for (auto& v : row) v /= t;
        } else {
            q.scale *= t;
        }
        return q;
    }

private:
    std::size_t nearest_dir(const Vec& nu) const {
        std::size_t best = 0;
        double bd = -2;
        for (std::size_t d = 0; d < dirs.size(); ++d) {
            double v = dot(dirs[d], nu);
            if (v > bd) { bd = v; best = d; }
        }
        return best;
    }
    double sampled_spacing(double r) const {
        auto it = std::upper_bound(s.begin(), s.end(), r);
        std::size_t k = static_cast<std::size_t>(it - s.begin());
        if (k == 0) return s.front();
        if (k >= s.size()) return s.back() - s[s.size() - 2];
        return s[k] - s[k - 1];
    }
    double sampled_value(const Vec& nu, double r) const {
        const auto& v = values[nearest_dir(nu)];
        if (r <= 0) return 0.0;
        auto it = std::upper_bound(s.begin(), s.end(), r);
        std::size_t k = static_cast<std::size_t>(it - s.begin());
        double x0 = k ? s[k - 1] : 0.0, y0 = k ? v[k - 1] : 0.0;
        if (k >= s.size()) {
            std::size_t m = s.size();
            return v[m - 1] + (v[m - 1] - v[m - 2]) / (s[m - 1] - s[m - 2]) * (r - s[m - 1]);
        }
        return y0 + (v[k] - y0) * (r - x0) / (s[k] - x0);
    }
};

// ---------------------------------------------------------------------------
// Domains

/// Unit directions in the base space R^{n-1}.
inline std::vector<Vec> default_directions(int n, int count = 64) {
    std::vector<Vec> d;
    if (n == 2) {
        d.push_back(Vec{-1.0});
        d.push_back(Vec{1.0});
    } else if (n == 3) {
        for (int k = 0; k < count; ++k) {
            double th = 2 * std::numbers::pi * k / count;
            d.push_back(Vec(std::cos(th), std::sin(th)));
        }
    } else if (n == 4) {
        for (int i = -1; i <= 1; ++i)
            for (int j = -1; j <= 1; ++j)
                for (int k = -1; k <= 1; ++k) {
                    if (!i && !j && !k) continue;
                    Vec v(i, j, k);
                    d.push_back(v / norm(v));
                }
    } else {
        throw std::invalid_argument("default_directions: n must be 2, 3 or 4");
    }
    return d;
}

/// Log-spaced grid over [hi*2^-levels, hi] with per_level points per dyadic level.
inline std::vector<double> log_grid(double hi, int levels = 40, int per_level = 32) {
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(levels * per_level + 1));
    for (int k = levels * per_level; k >= 0; --k) g.push_back(hi * std::exp2(-static_cast<double>(k) / per_level));
    return g;
}

struct GraphDomain {
    int n = 2;
    double rho = 1.0;
    double m = 1.0;
    Profile omega;
    double lipschitz = 1.0;

    double operator()(const Vec& xp) const { return omega(xp); }

    bool contains(const Vec& x) const {
        Vec xp = x.base();
        return norm(xp) < rho && x.last() > omega(xp);
    }
    double height(const Vec& x) const { return x.last() - omega(x.base()); }

    /// Reflection through the graph, S(x) = (x', 2 omega(x') - x_n).
    Vec reflect(const Vec& x) const {
        Vec y = x;
        y.last() = 2 * omega(x.base()) - x.last();
        return y;
    }
    double lip_reflection_bound() const { return std::sqrt(3 + 6 * lipschitz * lipschitz); }

    std::vector<double> s_grid(int levels = 40, int per_level = 32) const {
        std::vector<double> g = log_grid(rho, levels, per_level);
        auto f = omega.features(g.front(), rho);
        g.insert(g.end(), f.begin(), f.end());
        std::sort(g.begin(), g.end());
        g.erase(std::unique(g.begin(), g.end()), g.end());
        return g;
    }

    void validate() const {
        if (n < 2 || n > 4) throw std::invalid_argument("GraphDomain: n must be 2..4");
        if (!(rho > 0) || !(m > 0)) throw std::invalid_argument("GraphDomain: rho and m must be positive");
        if (omega.family == Family::linear && static_cast<int>(omega.a.size()) != n - 1)
            throw std::invalid_argument("GraphDomain: linear profile needs n-1 coefficients");
        if (omega.family == Family::sampled) {
            if (omega.dirs.empty() || omega.s.size() < 2 || omega.values.size() != omega.dirs.size())
                throw std::invalid_argument("GraphDomain: malformed sampled profile");
            for (const auto& row : omega.values)
                if (row.size() != omega.s.size()) throw std::invalid_argument("GraphDomain: sampled row length mismatch");
            for (std::size_t k = 1; k < omega.s.size(); ++k)
                if (!(omega.s[k] > omega.s[k - 1]) || !(omega.s[0] > 0))
                    throw std::invalid_argument("GraphDomain: s-grid must be positive and increasing");
        }
        Vec zero(n - 1);
        if (omega(zero) != 0) throw std::invalid_argument("GraphDomain: omega(0) must vanish");
        // Lipschitz and height checks on radial samples.
        auto dirs = omega.family == Family::sampled ? omega.dirs : default_directions(n, 16);
        auto g = log_grid(rho * (1 - 1e-12), 20, 4);
        double lslack = 1e-9 * (1 + lipschitz);
        for (const auto& nu : dirs) {
            double prev_s = 0, prev_w = 0;
            for (double s : g) {
                double w = omega.radial_value(nu, s);
                if (!(std::abs(w) < m)) throw std::invalid_argument("GraphDomain: height m must exceed sup|omega|");
                if (std::abs(w - prev_w) > lipschitz * (s - prev_s) + lslack * s)
                    throw std::invalid_argument("GraphDomain: Lipschitz bound violated on samples");
                prev_s = s; prev_w = w;
            }
        }
    }
};

inline GraphDomain rescale_domain(const GraphDomain& d, double s) {
    if (!(s > 0)) throw std::invalid_argument("rescale_domain: s must be positive");
    GraphDomain r = d;
    if (s == 1) return r;
    r.omega = d.omega.rescaled(s);
    r.rho = d.rho / s;
    r.m = d.m / s;
    return r;
}

// ---------------------------------------------------------------------------
// Visibility functions

struct VisibilityFunction {
    enum class Kind { zero, power, sampled };
    Kind kind = Kind::zero;
    double C = 0, p = 2; // u = C t^p
    double T = 1;        // declared horizon
    HermiteTable table;  // sampled u with derivative

    static VisibilityFunction zero(double T) { VisibilityFunction u; u.T = T; return u; }
    static VisibilityFunction power(double C, double p, double T) {
        VisibilityFunction u; u.kind = Kind::power; u.C = C; u.p = p; u.T = T; return u;
    }
    static VisibilityFunction sampled(HermiteTable tab, double T) {
        tab.validate();
        VisibilityFunction u; u.kind = Kind::sampled; u.table = std::move(tab); u.T = T; return u;
    }

    bool closed_form() const { return kind != Kind::sampled; }

    double operator()(double t) const {
        switch (kind) {
        case Kind::zero: return 0.0;
        case Kind::power: return t <= 0 ? 0.0 : C * std::pow(t, p);
        default: return table.value(t);
        }
    }
    double deriv(double t) const {
        switch (kind) {
        case Kind::zero: return 0.0;
        case Kind::power:
            if (t <= 0) return p > 1 ? 0.0 : (p == 1 ? C : std::numeric_limits<double>::infinity());
            return C * p * std::pow(t, p - 1);
        default: return table.deriv(t);
        }
    }

    /// u(s)/s + u'(s).
    double visibility_rate(double s) const { return (*this)(s) / s + deriv(s); }

    VisibilityFunction rescaled(double s) const {
        VisibilityFunction r = *this;
        r.T = T / s;
        if (kind == Kind::power) r.C = C * std::pow(s, p - 1);
        if (kind == Kind::sampled) {
            for (auto& x : r.table.x) x /= s;
            for (auto& y : r.table.y) y /= s;
        }
        return r;
    }

    /// Integral of u(t)/t^2 over (0, x).
    double integral_u_over_t2(double x) const {
        if (x <= 0 || kind == Kind::zero) return 0.0;
        if (kind == Kind::power) {
            if (p <= 1) return C == 0 ? 0.0 : std::numeric_limits<double>::infinity();
            return C * std::pow(x, p - 1) / (p - 1);
        }
        using boost::math::quadrature::gauss_kronrod;
        auto f = [this](double t) { return t <= 0 ? 0.0 : table.value(t) / (t * t); };
        KahanSum acc;
        double hi = x;
        for (int k = 0; k < 200 && hi > 1e-300; ++k) {
            double lo = hi / 2;
            acc += gauss_kronrod<double, 15>::integrate(f, lo, hi, 10, 1e-12);
            hi = lo;
        }
        return acc.value();
    }
};

/// t^-1 sup_{0<s<=t} sqrt(u(s)/s + u'(s)).
inline double gamma_u(const VisibilityFunction& u, double t) {
    if (!(t > 0)) throw std::domain_error("gamma_u: t must be positive");
    switch (u.kind) {
    case VisibilityFunction::Kind::zero: return 0.0;
    case VisibilityFunction::Kind::power: {
        double k = u.C * (1 + u.p);
        if (k < 0) throw std::domain_error("gamma_u: u(s)/s + u'(s) < 0");
        if (k == 0) return 0.0;
        if (u.p < 1) return std::numeric_limits<double>::infinity();
        return std::sqrt(k * std::pow(t, u.p - 1)) / t;
    }
    default: {
        const auto& x = u.table.x;
        double sup = 0;
        for (std::size_t i = 0; i < x.size() && x[i] <= t; ++i) {
            double r = u.table.y[i] / x[i] + u.table.dy[i];
            if (r < 0) throw std::domain_error("gamma_u: u(s)/s + u'(s) < 0 at a sample");
            sup = std::max(sup, r);
        }
        double r = u.visibility_rate(t);
        if (r < 0) throw std::domain_error("gamma_u: u(s)/s + u'(s) < 0");
        return std::sqrt(std::max(sup, r)) / t;
    }
    }
}

// ---------------------------------------------------------------------------
// Certification

struct Witness {
    std::string test;
    Vec x;            // offending point (boundary point, or base point for V3-gradient)
    Vec aux;          // companion point (segment sample / earlier slope sample), may be empty
    double t = 0;     // scale
    double value = 0; // violated quantity
    int feature_index = -1;
};

struct SummabilityEvidence {
    std::vector<double> level_integrals; // over (T/2^{k+1}, T/2^k]
    double total = 0;
    double tail = 0; // last 10 levels
    double cauchy_defect = 0;
    int levels = 0;
};

struct V12Result {
    Verdict v1 = Verdict::inconclusive, v2 = Verdict::inconclusive;
    double T_declared = 0, T_effective = 0;
    bool clipped = false;
    std::vector<Witness> witnesses;
    SummabilityEvidence summability;
    std::vector<std::string> notes;
};

inline V12Result check_v1_v2(const VisibilityFunction& u, bool clip_horizon = true) {
    V12Result r;
    r.T_declared = r.T_effective = u.T;
    auto fail_v1 = [&](double t, double val, const std::string& why) {
        r.v1 = Verdict::fail;
        Witness w; w.test = "V1"; w.x = Vec{t}; w.t = t; w.value = val;
        r.witnesses.push_back(w);
        r.notes.push_back(why);
    };
    try {
        if (!(u.T > 0)) {
            r.notes.push_back("non-positive horizon");
            return r;
        }
        // --- V1
        if (u.kind == VisibilityFunction::Kind::zero) {
            r.v1 = Verdict::pass;
        } else if (u.kind == VisibilityFunction::Kind::power) {
            if (u.C < 0) {
                fail_v1(u.T / 2, u.deriv(u.T / 2), "u' < 0");
            } else if (u.C == 0) {
                r.v1 = Verdict::pass;
            } else if (u.p < 1) {
                fail_v1(u.T / 2, u.deriv(u.T / 2), "u'(0+) is infinite");
            } else if (u.p == 1) {
                fail_v1(u.T / 2, u.C, "u'(0+) = C != 0");
            } else {
                double tstar = std::pow(1.0 / (2 * u.C * u.p), 1.0 / (u.p - 1));
                if (tstar >= u.T) {
                    r.v1 = Verdict::pass;
                } else if (clip_horizon) {
                    r.v1 = Verdict::pass;
                    r.T_effective = tstar;
                    r.clipped = true;
                    r.notes.push_back("horizon clipped where u' reaches 1/2");
                } else {
                    double t = 0.5 * (tstar + u.T);
                    fail_v1(t, u.deriv(t), "u' > 1/2 inside the declared horizon");
                }
            }
        } else {
            const auto& tab = u.table;
            std::size_t bad = tab.x.size();
            bool neg = false;
            for (std::size_t i = 0; i < tab.x.size() && tab.x[i] < u.T; ++i) {
                if (tab.dy[i] < 0) { neg = true; bad = i; break; }
                if (tab.dy[i] > 0.5) { bad = i; break; }
            }
            if (neg) {
                fail_v1(tab.x[bad], tab.dy[bad], "u' < 0 at a sample");
            } else if (bad < tab.x.size() && bad == 0) {
                fail_v1(tab.x[0], tab.dy[0], "u' > 1/2 at the first sample");
            } else {
                if (bad < tab.x.size()) {
                    if (clip_horizon) {
                        r.T_effective = tab.x[bad - 1];
                        r.clipped = true;
                        r.notes.push_back("horizon clipped at the last sample with u' <= 1/2");
                    } else {
                        fail_v1(tab.x[bad], tab.dy[bad], "u' > 1/2 at a sample");
                    }
                }
                if (r.v1 != Verdict::fail)
                    r.v1 = (tab.dy[0] <= tol::grad_sampled && tab.y[0] <= 0.5 * tab.x[0]) ? Verdict::pass
                                                                                         : Verdict::inconclusive;
            }
        }
        // --- V2
        const double T = r.v1 == Verdict::fail ? u.T : r.T_effective;
        auto& ev = r.summability;
        if (u.kind == VisibilityFunction::Kind::zero || (u.kind == VisibilityFunction::Kind::power && u.C == 0)) {
            r.v2 = Verdict::pass;
            return r;
        }
        if (u.kind == VisibilityFunction::Kind::power && u.p <= 1) {
            r.v2 = Verdict::fail;
            r.notes.push_back("gamma_u >= c/t near 0: not summable");
            return r;
        }
        using boost::math::quadrature::gauss_kronrod;
        auto g = [&u](double t) { return gamma_u(u, t); };
        double floor_t = u.kind == VisibilityFunction::Kind::sampled ? u.table.x.front() : 0.0;
        KahanSum total;
        double hi = T;
        for (int k = 0; k < 200; ++k) {
            double lo = hi / 2;
            if (lo < floor_t || lo < 1e-290) break;
            double v = gauss_kronrod<double, 15>::integrate(g, lo, hi, 12, 1e-12);
            ev.level_integrals.push_back(v);
            total += v;
            hi = lo;
        }
        ev.levels = static_cast<int>(ev.level_integrals.size());
        ev.total = total.value();
        KahanSum tail;
        for (int k = std::max(0, ev.levels - 10); k < ev.levels; ++k) tail += ev.level_integrals[static_cast<std::size_t>(k)];
        ev.tail = tail.value();
        ev.cauchy_defect = ev.total > 0 ? ev.tail / ev.total : 0.0;
        if (ev.levels >= 10 && (ev.total == 0 || ev.tail <= tol::sum_tail * ev.total) && std::isfinite(ev.total))
            r.v2 = Verdict::pass;
        else
            r.v2 = Verdict::inconclusive;
    } catch (const std::exception& e) {
        r.notes.push_back(std::string("inconclusive: ") + e.what());
        if (r.v1 != Verdict::fail) r.v1 = worst(r.v1, Verdict::inconclusive);
        r.v2 = Verdict::inconclusive;
    }
    return r;
}

struct SlopeProfile {
    std::vector<double> s, m;
    double max_increase = 0;
    std::size_t argmax = 0; // increase between argmax and argmax+1
    bool empty = true;
    bool violated = false;
};

namespace detail {
inline double slope_tau(double m1, double m2) {
    return tol::slope_rel * (1 + std::max(std::abs(m1), std::abs(m2)));
}
/// Admissible prefix of the grid for scale t: s^2 + omega(s nu)^2 < t^2.
inline std::size_t admissible_count(const std::vector<double>& s, const std::vector<double>& w, double t) {
    std::size_t k = 0;
    while (k < s.size() && s[k] * s[k] + w[k] * w[k] < t * t) ++k;
    return k;
}
} // namespace detail

inline SlopeProfile slope_profile(const GraphDomain& dom, const VisibilityFunction& u, const Vec& nu, double t,
                                  const std::vector<double>* grid = nullptr) {
    std::vector<double> own;
    if (!grid) { own = dom.s_grid(); grid = &own; }
    SlopeProfile sp;
    const double ut = u(t);
    for (double s : *grid) {
        double w = dom.omega.radial_value(nu, s);
        if (!(s * s + w * w < t * t)) break;
        sp.s.push_back(s);
        sp.m.push_back((w + ut) / s);
    }
    sp.empty = sp.s.empty();
    if (sp.s.size() < 2) return sp;
    sp.max_increase = -std::numeric_limits<double>::infinity();
    double worst_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < sp.m.size(); ++k) {
        double inc = sp.m[k + 1] - sp.m[k];
        if (inc > sp.max_increase) sp.max_increase = inc;
        double excess = inc - detail::slope_tau(sp.m[k], sp.m[k + 1]);
        if (excess > worst_excess) { worst_excess = excess; sp.argmax = k; }
    }
    sp.violated = worst_excess > 0;
    return sp;
}

struct SliceResult {
    bool tested = false;
    bool fail = false;
    Witness witness;
};

namespace detail {

/// Direct segment test on one direction and scale with precomputed omega on the grid.
inline SliceResult direct_slice(const GraphDomain& dom, const Vec& nu, double t, double ut,
                                const std::vector<double>& s, const std::vector<double>& w, int window = 32,
                                int uniform = 31, bool stop_at_first = false) {
    SliceResult res;
    std::size_t K = admissible_count(s, w, t);
    if (K == 0) return res;
    res.tested = true;
    double worst = 0;
    for (std::size_t jj = 0; jj < K; ++jj) {
        // scan from the outermost boundary sample inwards
        const std::size_t j = K - 1 - jj;
        const double sj = s[j], wj = w[j];
        const double mj = (wj + ut) / sj;
        auto consider = [&](double sp, double wp, double lam) {
            double pn = -ut + lam * (wj + ut);
            double mp = (wp + ut) / sp;
            double excess = (pn - wp) - sp * slope_tau(mp, mj);
            if (excess > 0 && (pn - wp) > worst) {
                worst = pn - wp;
                res.fail = true;
                Vec xb(dom.n), p(dom.n);
                for (int i = 0; i < dom.n - 1; ++i) { xb[i] = sj * nu[i]; p[i] = sp * nu[i]; }
                xb.last() = wj;
                p.last() = pn;
                res.witness.test = "V3-direct";
                res.witness.x = xb;
                res.witness.aux = p;
                res.witness.t = t;
                res.witness.value = pn - wp;
            }
        };
        std::size_t i0 = j > static_cast<std::size_t>(window) ? j - static_cast<std::size_t>(window) : 0;
        for (std::size_t i = i0; i < j; ++i) consider(s[i], w[i], s[i] / sj);
        if (stop_at_first && res.fail) break;
        for (int k = 1; k <= uniform; ++k) {
            double lam = static_cast<double>(k) / (uniform + 1);
            double sp = lam * sj;
            consider(sp, dom.omega.radial_value(nu, sp), lam);
        }
        if (stop_at_first && res.fail) break;
    }
    return res;
}

inline SliceResult slope_slice(const GraphDomain& dom, const Vec& nu, double t, double ut,
                               const std::vector<double>& s, const std::vector<double>& w) {
    SliceResult res;
    std::size_t K = admissible_count(s, w, t);
    if (K < 2) return res;
    res.tested = true;
    double worst = 0;
    for (std::size_t k = 0; k + 1 < K; ++k) {
        double m1 = (w[k] + ut) / s[k], m2 = (w[k + 1] + ut) / s[k + 1];
        double inc = m2 - m1;
        if (inc > slope_tau(m1, m2) && inc > worst) {
            worst = inc;
            res.fail = true;
            Vec xb(dom.n), p(dom.n);
            for (int i = 0; i < dom.n - 1; ++i) { xb[i] = s[k + 1] * nu[i]; p[i] = s[k] * nu[i]; }
            xb.last() = w[k + 1];
            p.last() = w[k];
            res.witness.test = "V3-slope";
            res.witness.x = xb;
            res.witness.aux = p;
            res.witness.t = t;
            res.witness.value = inc;
        }
    }
    return res;
}

} // namespace detail

struct SegmentCheck {
    Verdict verdict = Verdict::inconclusive;
    std::optional<Witness> witness;
    int slices = 0;
};

inline SegmentCheck check_segment_visibility(const GraphDomain& dom, const VisibilityFunction& u, double t,
                                             const std::vector<Vec>& directions = {}) {
    if (!(t > 0 && t < u.T)) throw std::invalid_argument("check_segment_visibility: need 0 < t < T");
    auto dirs = directions.empty() ? default_directions(dom.n) : directions;
    auto grid = dom.s_grid();
    SegmentCheck out;
    double ut = u(t);
    for (const auto& nu : dirs) {
        std::vector<double> w(grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k) w[k] = dom.omega.radial_value(nu, grid[k]);
        auto r = detail::direct_slice(dom, nu, t, ut, grid, w);
        if (!r.tested) continue;
        ++out.slices;
        if (r.fail && (!out.witness || r.witness.value > out.witness->value)) out.witness = r.witness;
    }
    out.verdict = out.witness ? Verdict::fail : (out.slices ? Verdict::pass : Verdict::inconclusive);
    return out;
}

inline SegmentCheck check_gradient_criterion(const GraphDomain& dom, const VisibilityFunction& u,
                                             double horizon = -1, const std::vector<Vec>& directions = {}) {
    SegmentCheck out;
    double T = horizon > 0 ? horizon : u.T;
    T = std::min(T, dom.rho);
    auto dirs = directions.empty() ? default_directions(dom.n) : directions;
    auto grid = dom.s_grid();
    const double tau = dom.omega.analytic() ? tol::grad_analytic : tol::grad_sampled;
    bool monotone_u = true;
    for (double s : grid) {
        if (s >= T) break;
        if (u.deriv(s) < 0) monotone_u = false;
    }
    if (!monotone_u) {
        out.verdict = Verdict::inconclusive;
        return out;
    }
    for (const auto& nu : dirs) {
        ++out.slices;
        for (double s : grid) {
            if (s >= T) break;
            double val = s * dom.omega.radial_derivative(nu, s) - dom.omega.radial_value(nu, s) - u(s);
            if (val > tau && (!out.witness || val > out.witness->value)) {
                Witness w;
                w.test = "V3-gradient";
                w.x = nu * s;
                w.t = s;
                w.value = val;
                out.witness = w;
            }
        }
    }
    if (out.witness)
        out.verdict = dom.omega.analytic() ? Verdict::fail : Verdict::inconclusive;
    else
        out.verdict = Verdict::pass;
    return out;
}

/// Re-evaluates a witness; true iff it still shows a violation.
inline bool recheck_witness(const GraphDomain& dom, const VisibilityFunction& u, const Witness& w) {
    if (w.test == "V1") {
        double d = u.deriv(w.t);
        return d > 0.5 || d < 0 || (w.t > 0 && u.kind == VisibilityFunction::Kind::power && u.p <= 1 && u.C > 0);
    }
    if (w.test == "V3-gradient") {
        double s = norm(w.x);
        Vec nu = w.x / s;
        return s * dom.omega.radial_derivative(nu, s) - dom.omega.radial_value(nu, s) - u(s) > 0;
    }
    const double ut = u(w.t);
    Vec xp = w.x.base(), pp = w.aux.base();
    if (norm(w.x) >= w.t) return false;
    if (w.test == "V3-slope") {
        double s2 = norm(xp), s1 = norm(pp);
        double m2 = (dom.omega(xp) + ut) / s2, m1 = (dom.omega(pp) + ut) / s1;
        return s1 < s2 && m2 - m1 > 0;
    }
    if (w.test == "V3-direct") {
        // p on the segment from U_t to x, strictly inside Omega.
        return w.aux.last() > dom.omega(pp);
    }
    return false;
}

struct CertifyOptions {
    int scales = 20;
    std::vector<Vec> directions; // empty: defaults for the dimension
    bool clip_horizon = true;
    bool run_gradient = true;
};

struct VisibilityCertificate {
    Verdict v1 = Verdict::inconclusive, v2 = Verdict::inconclusive;
    Verdict v3_direct = Verdict::inconclusive, v3_slope = Verdict::inconclusive,
            v3_gradient = Verdict::inconclusive;
    Verdict overall = Verdict::inconclusive;
    V12Result v12;
    std::vector<double> scales;
    int directions = 0;
    int slices = 0;
    int disagreements = 0;
    std::vector<Witness> witnesses;
    std::vector<std::string> diagnostics;
};

inline std::vector<double> default_scales(double T, int count) {
    std::vector<double> t;
    for (int j = 0; j < count; ++j) t.push_back(T * std::exp2(-(j + 1) / 2.0));
    return t;
}

inline VisibilityCertificate certify_visibility(const GraphDomain& dom, const VisibilityFunction& u,
                                                std::vector<double> scales = {}, const CertifyOptions& opt = {}) {
    VisibilityCertificate c;
    c.v12 = check_v1_v2(u, opt.clip_horizon);
    c.v1 = c.v12.v1;
    c.v2 = c.v12.v2;
    for (const auto& w : c.v12.witnesses) c.witnesses.push_back(w);
    for (const auto& note : c.v12.notes) c.diagnostics.push_back(note);
    const double T = c.v1 == Verdict::fail ? u.T : c.v12.T_effective;
    if (scales.empty()) scales = default_scales(std::min(T, dom.rho), opt.scales);
    c.scales = scales;
    auto dirs = opt.directions.empty() ? default_directions(dom.n) : opt.directions;
    c.directions = static_cast<int>(dirs.size());
    auto grid = dom.s_grid();

    std::optional<Witness> wd, ws;
    int tested_d = 0, tested_s = 0;
    for (const auto& nu : dirs) {
        std::vector<double> w(grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k) w[k] = dom.omega.radial_value(nu, grid[k]);
        for (double t : scales) {
            if (!(t > 0 && t < u.T)) throw std::invalid_argument("certify_visibility: scales must lie in (0,T)");
            double ut = u(t);
            auto rs = detail::slope_slice(dom, nu, t, ut, grid, w);
            auto rd = detail::direct_slice(dom, nu, t, ut, grid, w, 32, 31, true);
            if (rs.tested) ++tested_s;
            if (rd.tested) ++tested_d;
            if (rs.tested || rd.tested) ++c.slices;
            if (rs.tested && rd.tested && rs.fail != rd.fail) ++c.disagreements;
            if (rs.fail && (!ws || rs.witness.value > ws->value)) ws = rs.witness;
            if (rd.fail && (!wd || rd.witness.value > wd->value)) wd = rd.witness;
        }
    }
    c.v3_slope = ws ? Verdict::fail : (tested_s ? Verdict::pass : Verdict::inconclusive);
    c.v3_direct = wd ? Verdict::fail : (tested_d ? Verdict::pass : Verdict::inconclusive);
    if (ws) c.witnesses.push_back(*ws);
    if (wd) c.witnesses.push_back(*wd);

    // Sharpen a segment witness to a named critical boundary point when the profile has them.
    if (ws || wd) {
        auto crit = dom.omega.critical_points(grid.front(), dom.rho);
        if (crit.size() > 2000) crit.resize(2000);
        std::optional<Witness> best;
        for (const auto& [k, xk] : crit) {
            for (const auto& nu : dirs) {
                for (double t : scales) {
                    double wk = dom.omega.radial_value(nu, xk);
                    if (!(xk * xk + wk * wk < t * t)) continue;
                    double ut = u(t);
                    const double mk = (wk + ut) / xk;
                    for (int q = 1; q <= 64 && !best; ++q) {
                        double sp = xk * (1 - q * 1e-3);
                        double wp = dom.omega.radial_value(nu, sp);
                        double lam = sp / xk;
                        double pn = -ut + lam * (wk + ut);
                        double mp = (wp + ut) / sp;
                        if ((pn - wp) > sp * detail::slope_tau(mp, mk)) {
                            Witness wt;
                            wt.test = "V3-direct";
                            wt.x = Vec::lift(nu * xk, wk);
                            wt.aux = Vec::lift(nu * sp, pn);
                            wt.t = t;
                            wt.value = pn - wp;
                            wt.feature_index = k;
                            best = wt;
                        }
                    }
                    if (best) break;
                }
                if (best) break;
            }
            if (best) break;
        }
        if (best) c.witnesses.push_back(*best);
    }

    if (opt.run_gradient) {
        auto g = check_gradient_criterion(dom, u, T, dirs);
        c.v3_gradient = g.verdict;
        if (g.witness) c.witnesses.push_back(*g.witness);
    }
    if (c.disagreements)
        c.diagnostics.push_back("resolution-inconsistency: V3-slope and V3-direct disagree on " +
                                std::to_string(c.disagreements) + " slices");
    std::vector<Verdict> v3 = {c.v3_direct, c.v3_slope};
    if (opt.run_gradient) v3.push_back(c.v3_gradient);
    bool any_pass = false, any_fail = false;
    for (Verdict v : v3) { any_pass |= v == Verdict::pass; any_fail |= v == Verdict::fail; }
    if (any_pass && any_fail)
        c.diagnostics.push_back("resolution-inconsistency: V3 tests disagree (one PASS, one FAIL)");
    if (c.v1 == Verdict::fail || c.v2 == Verdict::fail || any_fail)
        c.overall = Verdict::fail;
    else if (c.v1 == Verdict::pass && c.v2 == Verdict::pass && any_pass)
        c.overall = Verdict::pass;
    else
        c.overall = Verdict::inconclusive;
    return c;
}

// ---------------------------------------------------------------------------
// Tangent cone

struct TangentCone {
    int n = 2;
    std::vector<Vec> dirs;
    std::vector<double> slope;           // D+_nu omega(0)
    std::vector<double> error;           // extrapolation error estimate
    std::vector<double> monotone_defect; // max(c(s_{k+1}) - c(s_k), 0), s decreasing
    std::vector<std::vector<double>> s_seq, c_seq;

    /// omega_0(x') = |x'| D+_{x'/|x'|}, interpolated across the direction set.
    double omega0(const Vec& xp) const {
        double r = norm(xp);
        if (r == 0) return 0.0;
        Vec nu = xp / r;
        if (n == 3 && dirs.size() > 2) {
            double th = std::atan2(nu[1], nu[0]);
            if (th < 0) th += 2 * std::numbers::pi;
            double f = th / (2 * std::numbers::pi) * static_cast<double>(dirs.size());
            std::size_t k = static_cast<std::size_t>(std::floor(f)) % dirs.size();
            double a = f - std::floor(f);
            return r * ((1 - a) * slope[k] + a * slope[(k + 1) % dirs.size()]);
        }
        std::size_t best = 0;
        double bd = -2;
        for (std::size_t d = 0; d < dirs.size(); ++d) {
            double v = dot(dirs[d], nu);
            if (v > bd) { bd = v; best = d; }
        }
        return r * slope[best];
    }
};

inline TangentCone tangent_cone(const GraphDomain& dom, const VisibilityFunction& u,
                                const std::vector<Vec>& directions = {}) {
    TangentCone tc;
    tc.n = dom.n;
    tc.dirs = directions.empty() ? default_directions(dom.n) : directions;
    const double L = std::sqrt(1 + dom.lipschitz * dom.lipschitz);
    auto v12 = check_v1_v2(u);
    if (v12.v2 == Verdict::fail) throw std::domain_error("tangent_cone: u-integral diverges (V2 failure)");
    const double smax = std::min(dom.rho, v12.T_effective / L) * (1 - 1e-12);
    const double smin = dom.rho * std::exp2(-40);
    if (!(smax > smin)) throw std::domain_error("tangent_cone: empty s-range");
    // decreasing s-grid, dyadic-aligned at the bottom
    std::vector<double> g;
    const int per_level = 32;
    int levels = static_cast<int>(std::floor(std::log2(smax / smin) * per_level));
    for (int k = 0; k <= levels; ++k) g.push_back(smin * std::exp2(static_cast<double>(levels - k) / per_level));
    for (const auto& nu : tc.dirs) {
        std::vector<double> cs(g.size());
        double defect = 0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            double s = g[k];
            double iu = u.integral_u_over_t2(L * s);
            if (!std::isfinite(iu)) throw std::domain_error("tangent_cone: u-integral does not converge");
            cs[k] = dom.omega.radial_value(nu, s) / s - L * iu;
            if (k > 0) defect = std::max(defect, cs[k - 1] - cs[k]); // g decreasing: c(larger s) - c(smaller s)
        }
        std::size_t K = g.size();
        auto e = extrapolate_dyadic(cs[K - 1 - 2 * per_level], cs[K - 1 - per_level], cs[K - 1]);
        tc.slope.push_back(e.value);
        tc.error.push_back(e.error);
        tc.monotone_defect.push_back(std::max(defect, 0.0));
        // keep a thinned diagnostic sequence: one sample per dyadic level
        std::vector<double> ss, cc;
        for (std::size_t k = 0; k < K; k += per_level) { ss.push_back(g[k]); cc.push_back(cs[k]); }
        tc.s_seq.push_back(std::move(ss));
        tc.c_seq.push_back(std::move(cc));
    }
    return tc;
}

// ---------------------------------------------------------------------------
// Hausdorff distance between point samples

inline double hausdorff_distance(const std::vector<Vec>& A, const std::vector<Vec>& B) {
    if (A.empty() || B.empty()) throw std::invalid_argument("hausdorff_distance: empty sample");
    auto directed = [](const std::vector<Vec>& X, const std::vector<Vec>& Y) {
        double h = 0;
        for (const auto& x : X) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& y : Y) {
                double d2 = 0;
                for (int i = 0; i < x.n; ++i) { double d = x[i] - y[i]; d2 += d * d; }
                if (d2 < best) {
                    best = d2;
                    if (best <= h) break; // cannot raise the running maximum
                }
            }
            h = std::max(h, best);
        }
        return std::sqrt(h);
    };
    return std::max(directed(A, B), directed(B, A));
}

/// Lattice points of spacing `step` in Omega intersected with B_R.
inline std::vector<Vec> sample_domain_ball(const GraphDomain& dom, double R, double step) {
    std::vector<Vec> pts;
    const int k = static_cast<int>(std::ceil(R / step));
    std::array<int, 4> idx{};
    const int total_dims = dom.n;
    std::function<void(int)> rec = [&](int d) {
        if (d == total_dims) {
            Vec x(dom.n);
            double r2 = 0;
            for (int i = 0; i < dom.n; ++i) { x[i] = idx[static_cast<std::size_t>(i)] * step; r2 += x[i] * x[i]; }
            if (r2 < R * R && dom.contains(x)) pts.push_back(x);
            return;
        }
        for (int i = -k; i <= k; ++i) { idx[static_cast<std::size_t>(d)] = i; rec(d + 1); }
    };
    rec(0);
    return pts;
}

/// Same lattice, points of the tangent cone epigraph x_n > omega_0(x').
inline std::vector<Vec> sample_cone_ball(const TangentCone& tc, int n, double R, double step) {
    std::vector<Vec> pts;
    const int k = static_cast<int>(std::ceil(R / step));
    std::array<int, 4> idx{};
    std::function<void(int)> rec = [&](int d) {
        if (d == n) {
            Vec x(n);
            double r2 = 0;
            for (int i = 0; i < n; ++i) { x[i] = idx[static_cast<std::size_t>(i)] * step; r2 += x[i] * x[i]; }
            if (r2 < R * R && x.last() > tc.omega0(x.base())) pts.push_back(x);
            return;
        }
        for (int i = -k; i <= k; ++i) { idx[static_cast<std::size_t>(d)] = i; rec(d + 1); }
    };
    rec(0);
    return pts;
}

} // namespace visilab
