#pragma once

#include "domain.hpp"

namespace visilab {

/// v, the centers V_r = -v(r) e_n and the horizon R of the off-centric chart.
struct OffcentricChart {
    enum class Kind { zero, power, from_u, sampled };
    Kind kind = Kind::zero;
    double C = 0, p = 2;   // power: v = C r^p
    VisibilityFunction u;  // from_u
    double T_prime = 0;    // from_u: sub-horizon of u
    HermiteTable table;    // sampled (r, v, v')
    double R = 1;
    double tau_root = tol::root;

    static OffcentricChart zero(double R) { OffcentricChart c; c.R = R; return c; }
    /// v = C r^p with R the largest radius where v' <= 1/2 and v <= r/2 (capped at Rmax).
    static OffcentricChart power(double C, double p, double Rmax = std::numeric_limits<double>::infinity()) {
        OffcentricChart c;
        c.kind = Kind::power; c.C = C; c.p = p;
        double R = Rmax;
        if (C > 0 && p > 1) {
            R = std::min(R, std::pow(1.0 / (2 * C * p), 1.0 / (p - 1)));
            R = std::min(R, std::pow(1.0 / (2 * C), 1.0 / (p - 1)));
        }
        if (!std::isfinite(R)) throw std::invalid_argument("OffcentricChart::power: supply a finite horizon");
        c.R = R;
        return c;
    }
    static OffcentricChart sampled(HermiteTable tab, double R) {
        tab.validate();
        OffcentricChart c;
        c.kind = Kind::sampled; c.table = std::move(tab); c.R = R;
        return c;
    }

    /// z^{-1}(r) for charts built from u.
    double z_inverse(double r) const {
        if (r <= 0) return 0.0;
        if (u.kind == VisibilityFunction::Kind::zero) return r;
        if (u.kind == VisibilityFunction::Kind::power && u.p == 1) return r / (1 - u.C);
        if (u.kind == VisibilityFunction::Kind::power && u.p == 2) return 2 * r / (1 + std::sqrt(1 - 4 * u.C * r));
        double lo = r, hi = std::min(2 * r, T_prime);
        if (hi - u(hi) < r) hi = T_prime;
        for (int i = 0; i < 200; ++i) {
            double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if (mid - u(mid) < r) lo = mid; else hi = mid;
        }
        return 0.5 * (lo + hi);
    }

    double v(double r) const {
        switch (kind) {
        case Kind::zero: return 0.0;
        case Kind::power: return r <= 0 ? 0.0 : C * std::pow(r, p);
        case Kind::from_u: return u(z_inverse(r));
        default: return table.value(r);
        }
    }
    double dv(double r) const {
        switch (kind) {
        case Kind::zero: return 0.0;
        case Kind::power: return r <= 0 ? 0.0 : C * p * std::pow(r, p - 1);
        case Kind::from_u: {
            double d = u.deriv(z_inverse(r));
            return d / (1 - d);
        }
        default: return table.deriv(r);
        }
    }
    bool trivial() const { return kind == Kind::zero || (kind == Kind::power && C == 0); }

    Vec center(double r, int n) const {
        Vec c(n);
        c.last() = -v(r);
        return c;
    }

    /// t^-1 sup_{0<s<=t} sqrt(v(s)/s + v'(s)).
    double gamma_v(double t) const {
        if (trivial()) return 0.0;
        if (kind == Kind::power) return std::sqrt(C * (1 + p) * std::pow(t, p - 1)) / t;
        double sup = 0;
        for (int k = 0; k <= 40 * 16; ++k) {
            double s = t * std::exp2(-k / 16.0);
            sup = std::max(sup, v(s) / s + dv(s));
        }
        return std::sqrt(sup) / t;
    }

    /// Integral of gamma_v over (0, rho) by dyadic Gauss-Kronrod.
    double gamma_v_integral(double rho) const {
        if (trivial()) return 0.0;
        if (kind == Kind::power && p > 1) return std::sqrt(C * (1 + p)) * std::pow(rho, (p - 1) / 2) / ((p - 1) / 2);
        using boost::math::quadrature::gauss_kronrod;
        auto g = [this](double t) { return gamma_v(t); };
        KahanSum acc;
        double hi = rho;
        for (int k = 0; k < 60; ++k) {
            acc += gauss_kronrod<double, 15>::integrate(g, hi / 2, hi, 6, 1e-8);
            hi /= 2;
        }
        return acc.value();
    }
};

inline OffcentricChart to_offcentric(const VisibilityFunction& u) {
    OffcentricChart c;
    if (u.kind == VisibilityFunction::Kind::zero || (u.kind == VisibilityFunction::Kind::power && u.C == 0)) {
        c.R = u.T;
        return c;
    }
    c.kind = OffcentricChart::Kind::from_u;
    c.u = u;
    double Tp = u.T;
    if (u.kind == VisibilityFunction::Kind::power) {
        if (u.C < 0) throw std::invalid_argument("to_offcentric: u must be non-decreasing");
        if (u.p < 1) throw std::invalid_argument("to_offcentric: z is not increasing near 0");
        if (u.p == 1) {
            if (u.C > 1.0 / 3) throw std::invalid_argument("to_offcentric: u' exceeds 1/3 everywhere");
        } else {
            Tp = std::min(Tp, std::pow(1.0 / (3 * u.C * u.p), 1.0 / (u.p - 1)));
            Tp = std::min(Tp, std::pow(1.0 / (2 * u.C), 1.0 / (u.p - 1)));
        }
    } else {
        const auto& tab = u.table;
        std::size_t k = 0;
        for (; k < tab.x.size() && tab.x[k] < u.T; ++k) {
            if (tab.dy[k] < 0) throw std::invalid_argument("to_offcentric: u must be non-decreasing");
            if (tab.dy[k] > 1.0 / 3 || tab.y[k] > tab.x[k] / 2) break;
        }
        if (k == 0) throw std::invalid_argument("to_offcentric: z is not increasing on any sub-horizon");
        if (k < tab.x.size()) Tp = std::min(Tp, tab.x[k - 1]);
    }
    if (!(Tp > 0)) throw std::invalid_argument("to_offcentric: empty sub-horizon");
    c.T_prime = Tp;
    c.R = Tp - u(Tp);
    return c;
}

struct PhiEvaluation {
    double r = 0;
    double residual = 0;
    Vec grad;
    double deviation = 0;
    double bound = 0;
};

namespace detail {
inline double foliation_F(const OffcentricChart& c, const Vec& x, double r) {
    double a = x.last() + c.v(r);
    double s = a * a - r * r;
    for (int i = 0; i < x.n - 1; ++i) s += x[i] * x[i];
    return s;
}
} // namespace detail

/// The root r of F(x,r) = |x - V_r|^2 - r^2 bracketed in (lo, hi).
inline PhiEvaluation phi_bracketed(const OffcentricChart& c, const Vec& x, double lo, double hi) {
    const double nx = norm(x);
    if (nx <= 1e-14 * c.R) throw std::domain_error("phi: x too close to the vertex");
    PhiEvaluation e;
    if (c.trivial()) {
        if (!(nx < c.R)) throw std::domain_error("phi: x outside B_R(V_R)");
        e.r = nx;
        e.residual = std::abs(dot(x, x) - nx * nx);
        e.grad = x / nx;
        e.deviation = 0;
        e.bound = 0;
        return e;
    }
    if (!(detail::foliation_F(c, x, c.R) < 0)) throw std::domain_error("phi: x outside B_R(V_R)");
    if (!(detail::foliation_F(c, x, hi) < 0) || !(detail::foliation_F(c, x, lo) > 0) || lo < 0)
        throw std::invalid_argument("phi: bracket does not enclose the root");
    for (int i = 0; i < 300; ++i) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (detail::foliation_F(c, x, mid) > 0) lo = mid; else hi = mid;
    }
    double r = 0.5 * (lo + hi);
    double F = detail::foliation_F(c, x, r);
    // one Newton polish
    double a = x.last() + c.v(r);
    double Fr = -2 * r + 2 * c.dv(r) * a;
    if (Fr != 0) {
        double r1 = r - F / Fr;
        double F1 = detail::foliation_F(c, x, r1);
        if (r1 > 0 && std::abs(F1) < std::abs(F)) { r = r1; F = F1; }
    }
    e.r = r;
    e.residual = std::abs(F);
    const double v = c.v(r), dv = c.dv(r);
    Vec g = x;
    g.last() += v;
    e.grad = g / (r - dv * (x.last() + v));
    e.deviation = norm(e.grad - x / nx);
    e.bound = 4 * std::sqrt(v / r + dv);
    return e;
}

inline PhiEvaluation phi(const OffcentricChart& c, const Vec& x) { return phi_bracketed(c, x, 0.0, c.R); }

struct ConeCheck {
    Verdict verdict = Verdict::inconclusive;
    std::optional<Witness> witness;
    int samples = 0;
};

/// Samples Omega cap B_r(V_r) and checks that the ray from V_r through each sample
/// leaves the sphere inside the closure of Omega.
inline ConeCheck cone_contains(const OffcentricChart& c, const GraphDomain& dom, double r, int radial = 200,
                               int angular = 2000) {
    if (!(r > 0 && r < c.R)) throw std::invalid_argument("cone_contains: need 0 < r < R");
    ConeCheck out;
    const int n = dom.n;
    const Vec V = c.center(r, n);
    const double tol_h = 1e-12 * r;
    auto test = [&](const Vec& dir) {
        Vec z = V + dir * r;
        double hz = dom.height(z);
        for (int k = 1; k <= radial; ++k) {
            Vec x = V + dir * (r * k / (radial + 1.0));
            if (!dom.contains(x)) continue;
            ++out.samples;
            if (hz < -tol_h && (!out.witness || -hz > out.witness->value)) {
                Witness w;
                w.test = "cone";
                w.x = x;
                w.aux = z;
                w.t = r;
                w.value = -hz;
                out.witness = w;
            }
        }
    };
    if (n == 2) {
        for (int j = 0; j < angular; ++j) {
            double th = std::numbers::pi * 2 * (j + 0.5) / angular;
            test(Vec(std::cos(th), std::sin(th)));
        }
    } else if (n == 3) {
        // Fibonacci sphere
        const double ga = std::numbers::pi * (3 - std::sqrt(5.0));
        for (int j = 0; j < angular; ++j) {
            double zc = 1 - 2 * (j + 0.5) / angular;
            double rr = std::sqrt(1 - zc * zc);
            test(Vec(rr * std::cos(ga * j), rr * std::sin(ga * j), zc));
        }
    } else {
        throw std::invalid_argument("cone_contains: n must be 2 or 3");
    }
    out.verdict = out.witness ? Verdict::fail : (out.samples ? Verdict::pass : Verdict::inconclusive);
    return out;
}

/// Uniform random point of B_R(V_R) away from the vertex.
inline Vec sample_chart_point(const OffcentricChart& c, int n, Rng& rng) {
    const Vec V = c.center(c.R, n);
    for (;;) {
        Vec x(n);
        for (int i = 0; i < n; ++i) x[i] = V[i] + c.R * rng.uniform(-1, 1);
        if (detail::foliation_F(c, x, 0.99 * c.R) < 0 && norm(x) > 1e-3 * c.R) return x;
    }
}

struct FoliationAudit {
    int samples = 0;
    double max_residual = 0;  // residual / r^2
    double max_fd_error = 0;  // |finite difference - grad| / |grad|
    double max_deviation = 0; // deviation - bound, <= 0 when the bound holds
    int residual_violations = 0, fd_violations = 0, deviation_violations = 0, sandwich_violations = 0;

    bool passed() const { return residual_violations + fd_violations + deviation_violations + sandwich_violations == 0; }
};

/// Root residual, central differences of phi, deviation bound and the
/// sandwich r - v <= |x| <= r + v at random points of the chart.
inline FoliationAudit foliation_audit(const OffcentricChart& c, int n, int samples, std::uint64_t seed,
                                      double residual_tol = tol::root, double fd_tol = 1e-6) {
    FoliationAudit a;
    a.max_deviation = -INFINITY;
    Rng rng(seed);
    for (int i = 0; i < samples; ++i) {
        Vec x = sample_chart_point(c, n, rng);
        auto e = phi(c, x);
        const double r = e.r, v = c.v(r), nx = norm(x);
        ++a.samples;
        a.max_residual = std::max(a.max_residual, e.residual / (r * r));
        if (e.residual > residual_tol * r * r) ++a.residual_violations;
        a.max_deviation = std::max(a.max_deviation, e.deviation - e.bound);
        if (e.deviation > e.bound + 1e-15) ++a.deviation_violations;
        if (r - v > nx * (1 + 1e-15) || nx > (r + v) * (1 + 1e-15)) ++a.sandwich_violations;
        const double h = 1e-6 * r;
        double err = 0;
        for (int k = 0; k < n; ++k) {
            Vec xp = x, xm = x;
            xp[k] += h;
            xm[k] -= h;
            double fd = (phi(c, xp).r - phi(c, xm).r) / (2 * h);
            err = std::max(err, std::abs(fd - e.grad[k]) / norm(e.grad));
        }
        a.max_fd_error = std::max(a.max_fd_error, err);
        if (err > fd_tol) ++a.fd_violations;
    }
    return a;
}

} // namespace visilab
