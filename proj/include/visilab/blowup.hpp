#pragma once

#include "monotonicity.hpp"

namespace visilab {

/// t^{-1} E.
inline PolySet rescale_set(const PolySet& E, double t) {
    if (!(t > 0)) throw std::invalid_argument("rescale_set: t must be positive");
    return E.scaled(1 / t);
}

/// t^{-1} E on the lattice of spacing h / t; t must be a power of two so the
/// lattice is an exact dilation of the original one.
inline GridSet rescale_set(const GridSet& E, double t) {
    int e = 0;
    if (!(t > 0) || std::frexp(t, &e) != 0.5)
        throw std::invalid_argument("rescale_set: grid sets rescale by powers of two only");
    return E.scaled(1 / t);
}

/// max |<nu, x - vertex>| / |x - vertex| over boundary elements in A.
/// On a segment <nu, x - vertex> is constant, so the maximum sits at the point
/// closest to the vertex; lines through the vertex up to rounding count as radial.
inline double conicality_defect(const PolySet& E, const GraphDomain& dom, const Vec& vertex,
                                const Region& A = Region::whole()) {
    double k = 0;
    for (const auto& e : boundary_elements(E, dom, A)) {
        Vec a = e.a - vertex, d = e.b - e.a;
        double c = std::abs(dot(e.nu, a));
        double span = std::max(norm(a), norm(e.b - vertex));
        if (c <= 1e-12 * span) continue;
        double s = std::clamp(-dot(a, d) / dot(d, d), 0.0, 1.0);
        k = std::max(k, std::min(1.0, c / norm(a + d * s)));
    }
    return k;
}

inline double conicality_defect(const GridSet& E, const GraphDomain& dom, const Vec& vertex,
                                const Region& A = Region::whole(), const CutMetric* m = nullptr) {
    double k = 0;
    for (const auto& e : boundary_elements(E, dom, A, m)) {
        Vec x = e.a - vertex;
        double r = norm(x);
        if (r > 0) k = std::max(k, std::abs(dot(e.nu, x)) / r);
    }
    return k;
}

struct BlowupOptions {
    double h = 1.0 / 256;       // lattice spacing of every rescaled set
    double R = 1;               // observation ball B_R
    int jitter = 8;             // random radii for perimeter convergence and density constancy
    std::uint64_t seed = 1;
    std::optional<PolySet> reference; // expected limit, digitized like the trace
    const CutMetric* metric = nullptr;
    bool all_gaps = true;       // gap at every scale, or only at the last one
    double hausdorff_step = 1.0 / 32; // sampling step (relative to R) for the domain convergence check
};

struct BlowupScale {
    int j = 0;
    double t = 1;
    GridSet E;
    GraphDomain dom;
    double volume = 0, complement_volume = 0;
    double perimeter = 0;          // P(E_j; B_R)
    double l1_to_final = 0;
    double l1_to_reference = std::nan("");
    double kappa = 0;              // on the annulus R/2 < |x| < R
    double psi = std::nan("");
    double hausdorff = 0;          // Omega_j against the tangent cone on B_R
    std::vector<double> jitter_perimeter;
};

struct GapRescaling {
    double t = 0;
    double lhs = 0, rhs = 0;       // Psi(t^{-1}F; B_R) and t^{1-n} Psi(F; B_{tR})
    Int128 lhs_units = 0, rhs_units = 0;
    bool exact() const { return lhs == rhs && lhs_units == rhs_units; }
};

struct BlowupTrace {
    double R = 1, h = 0;
    std::uint64_t seed = 0;
    std::vector<BlowupScale> scales;
    std::vector<std::vector<double>> l1;  // pairwise |E_j sym E_k| on B_R
    std::vector<double> jitter_radii;

    // (a) L1 Cauchy decay toward the last iterate
    bool l1_decreasing = false;
    bool reference_decreasing = false;
    // (b) max over jittered radii of |P(E_j; B_r) - P(E_0; B_r)|, per scale
    std::vector<double> perimeter_gap;
    double perimeter_ratio_max = 0; // max_j P(E_j; B_R) / R^{n-1}
    // (c)
    bool kappa_decreasing = false;
    // (d)
    double psi0 = std::nan(""), psi0_bound = 0;
    // (e)
    Extrapolation theta;
    std::vector<double> mu0;        // at the jittered radii
    double mu0_deviation = 0, tau = 0;
    // nontriviality of the limit
    double volume_constant = 0;     // from the density report of the first rescaled set
    double nontrivial = 0;          // min(|E_0 cap B_R|, |B_R cap Omega_0 \ E_0|) / R^n
    std::vector<GapRescaling> rescaling;

    const BlowupScale& limit() const { return scales.back(); }
    bool gap_small() const { return psi0 <= psi0_bound; }
    bool density_constant() const { return mu0_deviation <= 2 * tau; }
    // a cone attains the sampled density constant exactly, so lattice error gets a factor 2
    bool nontrivial_limit() const { return 2 * nontrivial * volume_constant >= 1; }
};

namespace detail {

inline double l1_on_ball(const GridSet& a, const GridSet& b, double R) {
    if (!a.same_lattice(b)) throw std::logic_error("l1_on_ball: lattices differ");
    std::size_t k = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.bits[i] != b.bits[i]) {
            Vec x = a.center(i);
            if (dot(x, x) < R * R) ++k;
        }
    return static_cast<double>(k) * a.cell_volume();
}

inline std::pair<double, double> ball_volumes(const GridSet& E, const GraphDomain& dom, double R) {
    std::size_t in = 0, out = 0;
    for (std::size_t i = 0; i < E.size(); ++i) {
        Vec x = E.center(i);
        if (!(dot(x, x) < R * R) || !dom.contains(x)) continue;
        (E.bits[i] ? in : out) += 1;
    }
    return {static_cast<double>(in) * E.cell_volume(), static_cast<double>(out) * E.cell_volume()};
}

inline bool non_increasing(const std::vector<double>& v, bool strict_while_positive) {
    for (std::size_t k = 1; k < v.size(); ++k) {
        if (v[k] > v[k - 1]) return false;
        if (strict_while_positive && v[k - 1] > 0 && !(v[k] < v[k - 1])) return false;
    }
    return true;
}

} // namespace detail

/// Dyadic blow-up of E at the origin: E_j = t_j^{-1} E digitized at spacing h on
/// a box around B_R, for t_j = 2^{-j}, j in scales. The last iterate stands in for the limit.
inline BlowupTrace blowup_trace(const PolySet& E, const GraphDomain& dom, const VisibilityFunction& u,
                                const std::vector<int>& scales, const BlowupOptions& opt = {}) {
    if (scales.empty()) throw std::invalid_argument("blowup_trace: no scales");
    for (std::size_t k = 0; k < scales.size(); ++k)
        if (scales[k] < 0 || (k && scales[k] <= scales[k - 1]))
            throw std::invalid_argument("blowup_trace: scales must be distinct non-negative dyadic exponents, increasing");
    if (!(opt.R > 0) || !(opt.h > 0) || !(opt.h < opt.R / 8))
        throw std::invalid_argument("blowup_trace: need 0 < 8h < R");
    if (dom.n != 2) throw std::invalid_argument("blowup_trace: planar sets only");
    const CutMetric& m = opt.metric ? *opt.metric : CutMetric::standard(2);
    const int n = 2;
    const double R = opt.R, h = opt.h;
    const auto [lo, hi] = window_box(dom, Vec(n), R, h, &m);

    BlowupTrace tr;
    tr.R = R;
    tr.h = h;
    tr.seed = opt.seed;
    Rng rng(opt.seed);
    for (int i = 0; i < opt.jitter; ++i) tr.jitter_radii.push_back(R * rng.uniform(0.25, 0.95));
    std::sort(tr.jitter_radii.begin(), tr.jitter_radii.end());

    auto tc = tangent_cone(dom, u);
    const double step = opt.hausdorff_step * R;
    auto cone_pts = sample_cone_ball(tc, n, R, step);

    for (int j : scales) {
        BlowupScale s;
        s.j = j;
        s.t = std::ldexp(1.0, -j);
        s.dom = rescale_domain(dom, s.t);
        s.E = digitize(rescale_set(E, s.t), s.dom, h, lo, hi);
        std::tie(s.volume, s.complement_volume) = detail::ball_volumes(s.E, s.dom, R);
        s.perimeter = perimeter_rel(s.E, s.dom, Region::ball(Vec(n), R), &m);
        s.kappa = conicality_defect(s.E, s.dom, Vec(n), Region::annulus(OffcentricChart::zero(2 * R), R / 2, R, n), &m);
        if (opt.reference)
            s.l1_to_reference = detail::l1_on_ball(s.E, digitize(rescale_set(*opt.reference, s.t), s.dom, h, lo, hi), R);
        for (double r : tr.jitter_radii) s.jitter_perimeter.push_back(perimeter_rel(s.E, s.dom, Region::ball(Vec(n), r), &m));
        s.hausdorff = hausdorff_distance(sample_domain_ball(s.dom, R, step), cone_pts);
        tr.scales.push_back(std::move(s));
    }
    const std::size_t J = tr.scales.size();
    auto gap_at = [&](BlowupScale& s) { s.psi = minimality_gap({s.E, s.dom, Region::ball(Vec(n), R), &m}).psi; };
    if (opt.all_gaps)
        for (auto& s : tr.scales) gap_at(s);
    else
        gap_at(tr.scales.back());

    tr.l1.assign(J, std::vector<double>(J, 0.0));
    for (std::size_t a = 0; a < J; ++a)
        for (std::size_t b = a + 1; b < J; ++b)
            tr.l1[a][b] = tr.l1[b][a] = detail::l1_on_ball(tr.scales[a].E, tr.scales[b].E, R);
    std::vector<double> to_final, to_ref, kap;
    for (std::size_t a = 0; a < J; ++a) {
        auto& s = tr.scales[a];
        s.l1_to_final = tr.l1[a][J - 1];
        to_final.push_back(s.l1_to_final);
        to_ref.push_back(s.l1_to_reference);
        kap.push_back(s.kappa);
        tr.perimeter_ratio_max = std::max(tr.perimeter_ratio_max, s.perimeter / std::pow(R, n - 1));
        double g = 0;
        for (std::size_t i = 0; i < tr.jitter_radii.size(); ++i)
            g = std::max(g, std::abs(s.jitter_perimeter[i] - tr.scales.back().jitter_perimeter[i]));
        tr.perimeter_gap.push_back(g);
    }
    tr.l1_decreasing = detail::non_increasing(to_final, true);
    tr.reference_decreasing = opt.reference && detail::non_increasing(to_ref, true);
    tr.kappa_decreasing = detail::non_increasing(kap, false);

    const auto& E0 = tr.scales.back();
    tr.psi0 = E0.psi;
    tr.psi0_bound = m.epsilon * E0.perimeter;

    // density of the limit: mu at the jittered radii against its dyadic extrapolation
    auto chart = to_offcentric(u.rescaled(E0.t));
    double mu_max = 0;
    for (double r : tr.jitter_radii) {
        tr.mu0.push_back(mu(E0.E, E0.dom, chart, r));
        mu_max = std::max(mu_max, tr.mu0.back());
    }
    tr.theta = extrapolate_dyadic(mu(E0.E, E0.dom, chart, R / 2), mu(E0.E, E0.dom, chart, R / 4),
                                  mu(E0.E, E0.dom, chart, R / 8));
    for (double v : tr.mu0) tr.mu0_deviation = std::max(tr.mu0_deviation, std::abs(v - tr.theta.value));
    tr.tau = 10 * m.epsilon * (1 + mu_max) * (1 + mu_max);

    std::vector<double> dr;
    for (double r = R / 2; r >= 8 * h; r /= 2) dr.push_back(r);
    auto dens = density_report(tr.scales.front().E, tr.scales.front().dom, Vec(n), dr, &m);
    tr.volume_constant = dens.volume_constant;
    tr.nontrivial = std::min(E0.volume, E0.complement_volume) / std::pow(R, n);

    // Psi(t^{-1} F; B_R) = t^{1-n} Psi(F; B_{tR}) with F the first rescaled set
    const auto& F = tr.scales.front();
    for (double t : {0.5, 0.25}) {
        GapRescaling g;
        g.t = t;
        auto big = minimality_gap({rescale_set(F.E, t), rescale_domain(F.dom, t), Region::ball(Vec(n), R), &m});
        auto small = minimality_gap({F.E, F.dom, Region::ball(Vec(n), t * R), &m});
        g.lhs = big.psi;
        g.rhs = std::pow(t, 1 - n) * small.psi;
        g.lhs_units = big.psi_units;
        g.rhs_units = small.psi_units;
        tr.rescaling.push_back(g);
    }
    return tr;
}

} // namespace visilab
