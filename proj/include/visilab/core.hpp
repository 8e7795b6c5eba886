#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace visilab {

enum class Verdict { pass, fail, inconclusive };

inline std::string_view to_string(Verdict v) {
    switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::fail: return "FAIL";
    default: return "INCONCLUSIVE";
    }
}

inline Verdict verdict_from_string(std::string_view s) {
    if (s == "PASS") return Verdict::pass;
    if (s == "FAIL") return Verdict::fail;
    if (s == "INCONCLUSIVE") return Verdict::inconclusive;
    throw std::invalid_argument("unknown verdict string: " + std::string(s));
}

/// Worst of two verdicts, FAIL > INCONCLUSIVE > PASS.
inline Verdict worst(Verdict a, Verdict b) {
    if (a == Verdict::fail || b == Verdict::fail) return Verdict::fail;
    if (a == Verdict::inconclusive || b == Verdict::inconclusive) return Verdict::inconclusive;
    return Verdict::pass;
}

namespace tol {
inline constexpr double slope_rel = 1e-9;
inline constexpr double grad_analytic = 1e-9;
inline constexpr double grad_sampled = 1e-3;
inline constexpr double sum_tail = 1e-6;
inline constexpr double root = 1e-12;
inline constexpr double wall_poly = 1e-9;
inline constexpr double contain_poly = 1e-12;
} // namespace tol

/// Small fixed-capacity point/vector in R^n, n <= 4.
struct Vec {
    std::array<double, 4> c{};
    int n = 0;

    Vec() = default;
    explicit Vec(int dim) : n(dim) {}
    Vec(double x, double y) : c{x, y, 0, 0}, n(2) {}
    Vec(double x, double y, double z) : c{x, y, z, 0}, n(3) {}
    Vec(std::initializer_list<double> xs) {
        if (xs.size() > 4) throw std::invalid_argument("Vec: dimension > 4");
        n = static_cast<int>(xs.size());
        std::copy(xs.begin(), xs.end(), c.begin());
    }

    double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
    double& last() { return c[static_cast<std::size_t>(n - 1)]; }
    double last() const { return c[static_cast<std::size_t>(n - 1)]; }

    Vec& operator+=(const Vec& o) { for (int i = 0; i < n; ++i) c[i] += o.c[i]; return *this; }
    Vec& operator-=(const Vec& o) { for (int i = 0; i < n; ++i) c[i] -= o.c[i]; return *this; }
    Vec& operator*=(double s) { for (int i = 0; i < n; ++i) c[i] *= s; return *this; }
    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(Vec a, double s) { return a *= s; }
    friend Vec operator*(double s, Vec a) { return a *= s; }
    friend Vec operator/(Vec a, double s) { for (int i = 0; i < a.n; ++i) a.c[i] /= s; return a; }
    friend bool operator==(const Vec& a, const Vec& b) {
        if (a.n != b.n) return false;
        for (int i = 0; i < a.n; ++i) if (a.c[i] != b.c[i]) return false;
        return true;
    }

    /// First n-1 coordinates (the base point x').
    Vec base() const { Vec b(n - 1); for (int i = 0; i < n - 1; ++i) b.c[i] = c[i]; return b; }
    /// Point (x', xn).
    static Vec lift(const Vec& xp, double xn) {
        Vec v(xp.n + 1);
        for (int i = 0; i < xp.n; ++i) v.c[i] = xp.c[i];
        v.c[xp.n] = xn;
        return v;
    }
    static Vec unit(int dim, int axis) { Vec v(dim); v[axis] = 1.0; return v; }
};

inline double dot(const Vec& a, const Vec& b) {
    double s = 0;
    for (int i = 0; i < a.n; ++i) s += a.c[i] * b.c[i];
    return s;
}
inline double norm(const Vec& a) {
    if (a.n == 1) return std::abs(a.c[0]);
    if (a.n == 2) return std::hypot(a.c[0], a.c[1]);
    if (a.n == 3) return std::hypot(a.c[0], a.c[1], a.c[2]);
    return std::sqrt(dot(a, a));
}
inline double dist(const Vec& a, const Vec& b) { return norm(a - b); }
inline double cross2(const Vec& a, const Vec& b) { return a[0] * b[1] - a[1] * b[0]; }

/// Neumaier-compensated running sum.
class KahanSum {
public:
    void add(double x) {
        double t = s_ + x;
        if (std::abs(s_) >= std::abs(x)) c_ += (s_ - t) + x;
        else c_ += (x - t) + s_;
        s_ = t;
    }
    KahanSum& operator+=(double x) { add(x); return *this; }
    double value() const { return s_ + c_; }

private:
    double s_ = 0, c_ = 0;
};

inline double unit_ball_volume(int n) {
    return std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
}

/// Deterministic 64-bit generator with platform-independent double conversion.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : s_(seed) {}
    std::uint64_t next() {
        // splitmix64
        std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    int integer(int lo, int hi) { // inclusive
        return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    std::uint64_t s_;
};

/// Log-spaced radii in [rmin, rmax] with per_decade points per factor 10, each
/// jittered multiplicatively by a seeded offset of at most a quarter step.
inline std::vector<double> make_radius_grid(double rmin, double rmax, int per_decade,
                                            std::uint64_t seed) {
    if (!(rmin > 0) || !(rmax > rmin) || per_decade < 1)
        throw std::invalid_argument("make_radius_grid: need 0 < rmin < rmax, per_decade >= 1");
    const double step = std::log(10.0) / per_decade;
    const int k = std::max(1, static_cast<int>(std::ceil(std::log(rmax / rmin) / step - 1e-9)));
    Rng rng(seed);
    std::vector<double> r;
    r.reserve(static_cast<std::size_t>(k) + 1);
    for (int i = 0; i <= k; ++i) {
        double base = std::log(rmin) + (std::log(rmax) - std::log(rmin)) * i / k;
        double j = rng.uniform(-0.25, 0.25) * step;
        if (i == 0) j = std::abs(j);
        if (i == k) j = -std::abs(j);
        r.push_back(std::exp(base + j));
    }
    std::sort(r.begin(), r.end());
    return r;
}

/// Least-squares slope of log(y) against log(x) over entries with y > 0.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(y[i] > 0) || !(x[i] > 0)) continue;
        double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly; ++m;
    }
    if (m < 2) return std::nan("");
    double d = m * sxx - sx * sx;
    if (d == 0) return std::nan("");
    return (m * sxy - sx * sy) / d;
}

/// Richardson-style limit from three values at successively halved scales.
/// Falls back to the last value with the spread as error when the differences
/// are not geometrically contracting.
struct Extrapolation {
    double value = 0;
    double error = 0;
    bool richardson = false;
};

inline Extrapolation extrapolate_dyadic(double f0, double f1, double f2) {
    double d1 = f1 - f0, d2 = f2 - f1;
    Extrapolation e;
    if (d1 != 0 && d2 != 0) {
        double q = d2 / d1;
        if (q > 0 && q < 0.9) {
            e.value = f2 + d2 * q / (1 - q);
            e.error = std::abs(d2 * q / (1 - q));
            e.richardson = true;
            return e;
        }
    }
    e.value = f2;
    e.error = std::max({std::abs(d1), std::abs(d2)});
    return e;
}

/// Piecewise cubic Hermite interpolant through (x_k, y_k, y'_k), anchored at
/// (0, 0, 0) below the first sample and extended linearly past the last one.
struct HermiteTable {
    std::vector<double> x, y, dy;

    bool empty() const { return x.empty(); }

    void validate() const {
        if (x.empty() || x.size() != y.size() || x.size() != dy.size())
            throw std::invalid_argument("HermiteTable: sample columns must be non-empty and of equal length");
        if (!(x.front() > 0)) throw std::invalid_argument("HermiteTable: abscissae must be positive");
        for (std::size_t i = 1; i < x.size(); ++i)
            if (!(x[i] > x[i - 1])) throw std::invalid_argument("HermiteTable: abscissae must increase");
    }

    double value(double t) const { return eval(t, false); }
    double deriv(double t) const { return eval(t, true); }

private:
    double eval(double t, bool d) const {
        if (t <= 0) return 0.0;
        if (t >= x.back()) return d ? dy.back() : y.back() + dy.back() * (t - x.back());
        auto it = std::upper_bound(x.begin(), x.end(), t);
        std::size_t k = static_cast<std::size_t>(it - x.begin());
        double x0 = k ? x[k - 1] : 0.0, y0 = k ? y[k - 1] : 0.0, d0 = k ? dy[k - 1] : 0.0;
        double x1 = x[k], y1 = y[k], d1 = dy[k];
        double hh = x1 - x0, s = (t - x0) / hh;
        double s2 = s * s, s3 = s2 * s;
        if (!d) {
            return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * hh * d0 +
                   (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * hh * d1;
        }
        return ((6 * s2 - 6 * s) * y0 + (-6 * s2 + 6 * s) * y1) / hh +
               (3 * s2 - 4 * s + 1) * d0 + (3 * s2 - 2 * s) * d1;
    }
};

} // namespace visilab
