#pragma once

#include "mingap.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <type_traits>

namespace visilab {

/// mu(r) = P(E; Omega cap B_r(V_r)) / r^{n-1}.
template <class Set>
double mu(const Set& E, const GraphDomain& dom, const OffcentricChart& chart, double r) {
    if (!(r > 0) || !(r < chart.R)) throw std::invalid_argument("mu: need 0 < r < R");
    const int n = dom.n;
    return perimeter_rel(E, dom, Region::offball(chart, r, n)) / std::pow(r, n - 1);
}

namespace detail {

/// Per-shell integrals over boundary elements. Shell 0 is the core phi < r_0,
/// shell s in 1..K is r_{s-1} < phi < r_s; elements beyond r_K are dropped.
struct ShellSums {
    std::vector<double> lhs;  // phi^{1-n} |<nu, grad phi>|
    std::vector<double> K;    // |grad phi| phi^{1-n}
    std::vector<double> J;    // |grad phi| - 1
    std::vector<double> mass; // element measure
};

struct PointTerms {
    double phi, lhs, K, J;
};

inline PointTerms point_terms(const OffcentricChart& c, const Vec& x, const Vec& nu, int n) {
    if (c.trivial()) {
        double r = norm(x);
        double d = 0;
        for (int i = 0; i < n; ++i) d += nu[i] * x[i];
        double w = std::pow(r, 1 - n);
        return {r, w * std::abs(d) / r, w, 0.0};
    }
    auto ev = phi(c, x);
    double g = norm(ev.grad);
    double w = std::pow(ev.r, 1 - n);
    return {ev.r, w * std::abs(dot(nu, ev.grad)), g * w, g - 1};
}

inline ShellSums shell_sums(const std::vector<BoundaryElement>& els, const OffcentricChart& c,
                            const std::vector<double>& radii, int n) {
    using GL = boost::math::quadrature::gauss<double, 10>;
    const std::size_t S = radii.size() + 1;
    ShellSums s{std::vector<double>(S), std::vector<double>(S), std::vector<double>(S), std::vector<double>(S)};
    std::vector<KahanSum> acc(4 * S);
    auto shell_of = [&](double p) {
        return static_cast<std::size_t>(std::upper_bound(radii.begin(), radii.end(), p) - radii.begin());
    };
    auto add = [&](std::size_t sh, const PointTerms& t, double w) {
        if (sh >= S) return;
        acc[4 * sh] += t.lhs * w;
        acc[4 * sh + 1] += t.K * w;
        acc[4 * sh + 2] += t.J * w;
        acc[4 * sh + 3] += w;
    };
    std::vector<double> cuts;
    for (const auto& e : els) {
        if (e.a == e.b) {
            if (norm(e.a) == 0) continue;
            auto t = point_terms(c, e.a, e.nu, n);
            add(shell_of(t.phi), t, e.measure);
            continue;
        }
        cuts.assign({0.0, 1.0});
        for (double r : radii)
            if (auto iv = segment_ball(e.a, e.b, c.center(r, n), r)) {
                if (iv->first > 0) cuts.push_back(iv->first);
                if (iv->second < 1) cuts.push_back(iv->second);
            }
        std::sort(cuts.begin(), cuts.end());
        const Vec d = e.b - e.a;
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            double s0 = cuts[k], s1 = cuts[k + 1];
            if (!(s1 > s0)) continue;
            double len = e.measure * (s1 - s0);
            double pm = point_terms(c, e.a + d * (0.5 * (s0 + s1)), e.nu, n).phi;
            std::size_t sh = shell_of(pm);
            if (sh >= S) continue;
            // the integrands vary on the scale of the distance to the vertex
            double sc = std::clamp(-dot(e.a, d) / dot(d, d), s0, s1);
            double dist = std::max(norm(e.a + d * sc), radii.front() / 8);
            int m = static_cast<int>(std::clamp(std::ceil(len / (0.5 * dist)), 1.0, 256.0));
            const auto& xs = GL::abscissa();
            const auto& ws = GL::weights();
            for (int piece = 0; piece < m; ++piece) {
                double p0 = s0 + (s1 - s0) * piece / m, p1 = s0 + (s1 - s0) * (piece + 1) / m;
                for (std::size_t q = 0; q < xs.size(); ++q)
                    for (int sg : {1, -1}) {
                        if (xs[q] == 0 && sg == -1) continue;
                        double u = 0.5 * (p0 + p1) + 0.5 * (p1 - p0) * sg * xs[q];
                        add(sh, point_terms(c, e.a + d * u, e.nu, n), 0.5 * (len / m) * ws[q]);
                    }
            }
        }
    }
    for (std::size_t k = 0; k < S; ++k) {
        s.lhs[k] = acc[4 * k].value();
        s.K[k] = acc[4 * k + 1].value();
        s.J[k] = acc[4 * k + 2].value();
        s.mass[k] = acc[4 * k + 3].value();
    }
    return s;
}

template <class Set>
std::vector<BoundaryElement> chart_elements(const Set& E, const GraphDomain& dom, const OffcentricChart& c, double r) {
    return boundary_elements(E, dom, Region::offball(c, r, dom.n));
}

/// Trapezoid of (n-1) rho^{-n} y(rho) on a radius grid, cumulative from the first node.
inline std::vector<double> cumulative_weighted(const std::vector<double>& r, const std::vector<double>& y, int n) {
    std::vector<double> out(r.size(), 0.0);
    for (std::size_t k = 1; k < r.size(); ++k) {
        double a = (n - 1) * y[k - 1] / std::pow(r[k - 1], n), b = (n - 1) * y[k] / std::pow(r[k], n);
        out[k] = out[k - 1] + 0.5 * (a + b) * (r[k] - r[k - 1]);
    }
    return out;
}

} // namespace detail

/// Squared conical deviation over the annulus phi in (r1, r2).
template <class Set>
double lhs_conical_deviation(const Set& E, const GraphDomain& dom, const OffcentricChart& chart, double r1, double r2) {
    if (r1 == r2) return 0.0;
    if (!(r1 < r2)) throw std::invalid_argument("lhs_conical_deviation: need r1 <= r2");
    auto s = detail::shell_sums(detail::chart_elements(E, dom, chart, r2), chart, {r1, r2}, dom.n);
    return s.lhs[1] * s.lhs[1];
}

/// J(rho) = integral of (|grad phi| - 1) d|D1_E| over Omega cap B_rho(V_rho), on each radius.
template <class Set>
std::vector<double> j_profile(const Set& E, const GraphDomain& dom, const OffcentricChart& chart,
                              const std::vector<double>& radii) {
    std::vector<double> J(radii.size(), 0.0);
    if (chart.trivial()) return J;
    auto s = detail::shell_sums(detail::chart_elements(E, dom, chart, radii.back()), chart, radii, dom.n);
    double c = 0;
    for (std::size_t k = 0; k < radii.size(); ++k) J[k] = (c += s.J[k]);
    return J;
}

/// G(E; r1, r2) with the rho-integral on `nodes` log-spaced radii.
template <class Set>
double g_term(const Set& E, const GraphDomain& dom, const OffcentricChart& chart, double r1, double r2,
              int nodes = 33) {
    if (r1 == r2 || chart.trivial()) return 0.0;
    if (!(0 < r1 && r1 < r2 && r2 < chart.R)) throw std::invalid_argument("g_term: need 0 < r1 < r2 < R");
    const int n = dom.n;
    std::vector<double> rs(static_cast<std::size_t>(nodes));
    for (int k = 0; k < nodes; ++k) rs[static_cast<std::size_t>(k)] = r1 * std::pow(r2 / r1, double(k) / (nodes - 1));
    rs.back() = r2;
    auto J = j_profile(E, dom, chart, rs);
    auto cum = detail::cumulative_weighted(rs, J, n);
    return cum.back() + J.back() / std::pow(r2, n - 1) - J.front() / std::pow(r1, n - 1);
}

struct GLimit {
    double value = 0;
    double tail_bound = 0;
    double mu_bound = 0;
};

/// G(E; r) = lim G(E; rho, r): quadrature down to rho0, plus the bound
/// 4C (n-1) int_0^rho0 gamma_v + 4C rho0 gamma_v(rho0) on the rest, with C the
/// sampled sup of mu, which must stay below mu_cap.
template <class Set>
GLimit g_limit(const Set& E, const GraphDomain& dom, const OffcentricChart& chart, double r, double rho0,
               double mu_cap = 100) {
    GLimit g;
    if (chart.trivial()) return g;
    if (!(0 < rho0 && rho0 < r)) throw std::invalid_argument("g_limit: need 0 < rho0 < r");
    for (int k = 0; k <= 16; ++k) g.mu_bound = std::max(g.mu_bound, mu(E, dom, chart, rho0 * std::pow(r / rho0, k / 16.0)));
    if (!(g.mu_bound < mu_cap)) throw std::domain_error("g_limit: mu is not bounded on the sampled radii");
    g.value = g_term(E, dom, chart, rho0, r);
    const int n = dom.n;
    g.tail_bound = 4 * g.mu_bound * ((n - 1) * chart.gamma_v_integral(rho0) + rho0 * chart.gamma_v(rho0));
    return g;
}

struct AuditPair {
    int k = 0, l = 0;
    double lhs = 0, weight = 0, dmu = 0, dI = 0, G = 0, rhs = 0, slack = 0;
};

struct MonotonicityAudit {
    std::vector<double> radii, mu, psi, I, J, G, M;
    std::vector<AuditPair> pairs;
    bool psi_computed = false;
    double mu_max = 0, tau = 0;
    double min_slack = INFINITY;
    std::size_t violations = 0;
    std::size_t monotone_prefix = 0; // M non-decreasing within tau on radii[0..prefix]
    double max_m_drop = 0;
    Extrapolation theta, centric;
    std::array<double, 3> theta_radii{}, theta_mu{}, centric_mu{};
    double max_radial_deviation = 0; // max |<nu, grad phi>| over boundary elements in the audited range

    bool passed() const { return violations == 0 && monotone_prefix + 1 == radii.size(); }
};

struct AuditOptions {
    const CutMetric* metric = nullptr;
    bool compute_gap = true; // grids only; polygons use Psi = 0
};

/// Every term of the monotonicity inequality on each pair of audited radii.
/// Polygonal sets take Psi = 0, which can only lower the right-hand side.
template <class Set>
MonotonicityAudit audit(const Set& E, const GraphDomain& dom, const OffcentricChart& chart,
                        std::vector<double> radii, const AuditOptions& opt = {}) {
    constexpr bool grid = std::is_same_v<Set, GridSet>;
    std::sort(radii.begin(), radii.end());
    if (radii.size() < 2) throw std::invalid_argument("audit: need at least two radii");
    if (!(radii.front() > 0) || !(radii.back() < chart.R)) throw std::invalid_argument("audit: radii must lie in (0, R)");
    const int n = dom.n;
    const std::size_t K = radii.size();
    MonotonicityAudit a;
    a.radii = radii;
    a.mu.resize(K);
    a.psi.assign(K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        a.mu[k] = mu(E, dom, chart, radii[k]);
        a.mu_max = std::max(a.mu_max, a.mu[k]);
        if constexpr (grid) {
            if (opt.compute_gap) {
                a.psi[k] = minimality_gap({E, dom, Region::offball(chart, radii[k], n), opt.metric}).psi;
                a.psi_computed = true;
            }
        }
    }
    a.I = detail::cumulative_weighted(radii, a.psi, n);

    auto els = detail::chart_elements(E, dom, chart, radii.back());
    auto sh = detail::shell_sums(els, chart, radii, n);
    a.J.resize(K);
    double cj = 0;
    for (std::size_t k = 0; k < K; ++k) a.J[k] = (cj += sh.J[k]);
    auto gi = detail::cumulative_weighted(radii, a.J, n);
    a.G.resize(K);
    a.M.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        a.G[k] = gi[k] + a.J[k] / std::pow(radii[k], n - 1) - a.J[0] / std::pow(radii[0], n - 1);
        a.M[k] = a.mu[k] + a.I[k] + a.G[k];
    }

    double eps = 1e-9;
    if constexpr (grid) eps = 10 * (opt.metric ? *opt.metric : CutMetric::standard(n)).epsilon;
    a.tau = eps * (1 + a.mu_max) * (1 + a.mu_max);

    // prefix sums over shells 1..K-1
    std::vector<double> pl(K, 0.0), pk(K, 0.0);
    for (std::size_t s = 1; s < K; ++s) {
        pl[s] = pl[s - 1] + sh.lhs[s];
        pk[s] = pk[s - 1] + sh.K[s];
    }
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = k + 1; l < K; ++l) {
            AuditPair p;
            p.k = static_cast<int>(k);
            p.l = static_cast<int>(l);
            double L = pl[l] - pl[k];
            p.lhs = L * L;
            p.weight = pk[l] - pk[k];
            p.dmu = a.mu[l] - a.mu[k];
            p.dI = a.I[l] - a.I[k];
            p.G = a.G[l] - a.G[k];
            p.rhs = 2 * p.weight * (p.dmu + p.dI + p.G);
            p.slack = p.rhs - p.lhs;
            a.min_slack = std::min(a.min_slack, p.slack);
            if (p.slack < -a.tau) ++a.violations;
            a.pairs.push_back(p);
        }

    a.monotone_prefix = 0;
    bool mono = true;
    for (std::size_t k = 1; k < K; ++k) {
        double drop = a.M[k - 1] - a.M[k];
        a.max_m_drop = std::max(a.max_m_drop, drop);
        if (drop > a.tau) mono = false;
        if (mono) a.monotone_prefix = k;
    }

    for (const auto& e : els) {
        Vec x = e.mid();
        if (norm(x) == 0) continue;
        auto t = detail::point_terms(chart, x, e.nu, n);
        if (t.phi > radii.front() && t.phi < radii.back())
            a.max_radial_deviation = std::max(a.max_radial_deviation, t.lhs / t.K);
    }

    // limits from the three smallest dyadic radii
    const double r0 = radii.front();
    for (int j = 0; j < 3; ++j) {
        double r = r0 * std::ldexp(1.0, 2 - j);
        a.theta_radii[static_cast<std::size_t>(j)] = r;
        a.theta_mu[static_cast<std::size_t>(j)] = r < chart.R ? mu(E, dom, chart, r) : std::nan("");
        a.centric_mu[static_cast<std::size_t>(j)] =
            perimeter_rel(E, dom, Region::ball(Vec(n), r)) / std::pow(r, n - 1);
    }
    a.theta = extrapolate_dyadic(a.theta_mu[0], a.theta_mu[1], a.theta_mu[2]);
    a.centric = extrapolate_dyadic(a.centric_mu[0], a.centric_mu[1], a.centric_mu[2]);
    return a;
}

} // namespace visilab
