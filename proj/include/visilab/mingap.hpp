#pragma once

#include "maxflow.hpp"
#include "perimeter.hpp"

#include <bit>

namespace visilab {

/// Minimality gap of the grid set E in the window A: every cell of the domain
/// outside the free set keeps its value.
struct MinGapProblem {
    GridSet E;
    GraphDomain dom;
    Region A;
    const CutMetric* metric = nullptr;

    const CutMetric& cut_metric() const { return metric ? *metric : CutMetric::standard(E.n); }
};

struct MinGapResult {
    double psi = 0;
    Int128 psi_units = 0; // units of 2^-40 h^{n-1}
    GridSet competitor;
    double perimeter_E = 0, perimeter_F = 0; // relative perimeters in A
    double rounding_bound = 0;
    std::size_t free_cells = 0, nodes = 0, arcs = 0;
    Int128 flow_units = 0;
};

namespace detail {

struct GapPair {
    std::uint32_t a, b; // box indices; a is always free
    std::int64_t w;
    bool b_free;
};

/// The free cells of a window and every coupled pair touching them. A cell is
/// free when it lies in the domain at distance more than reach*h inside A and
/// none of its pairs has its midpoint outside A, so the energy over these
/// pairs differs from P(.;A) by a constant.
class GapGraph {
public:
    GapGraph(const GridSet& g, const GraphDomain& dom, const Region& A, const CutMetric& m)
        : ps_(g, dom, m), node_(g.size(), -1) {
        const auto& inside = ps_.inside();
        const double margin = m.reach * g.h;
        auto [lo, hi] = padded_range(g, dom, A, m);
        std::vector<std::uint8_t> cand(g.size(), 0);
        for (int c2 = lo[2]; c2 < hi[2]; ++c2)
            for (int c1 = lo[1]; c1 < hi[1]; ++c1)
                for (int c0 = lo[0]; c0 < hi[0]; ++c0) {
                    std::size_t i = g.index(Cell{c0, c1, c2});
                    if (inside[i] && A.inner_distance(g.center(i)) > margin) cand[i] = 1;
                }
        std::vector<std::uint8_t> demote(g.size(), 0);
        ps_.visit(lo, hi, [&](std::size_t i, std::size_t j, std::size_t, std::int64_t, const Vec& mid) {
            if ((cand[i] || cand[j]) && !A.contains(mid)) demote[i] = demote[j] = 1;
        });
        for (std::size_t i = 0; i < g.size(); ++i)
            if (cand[i] && !demote[i]) {
                node_[i] = static_cast<int>(free_.size());
                free_.push_back(i);
            }
        if (free_.empty()) throw std::invalid_argument("minimality gap: the window contains no free cell");
        check_box(g, dom, m);

        Int128 total = 0;
        ps_.visit(lo, hi, [&](std::size_t i, std::size_t j, std::size_t, std::int64_t w, const Vec&) {
            bool fi = node_[i] >= 0, fj = node_[j] >= 0;
            if (!fi && !fj) return;
            if (!fi) std::swap(i, j);
            pairs_.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), w, fi && fj});
            total += w;
        });
        if (total >= (Int128(1) << 62)) throw std::overflow_error("minimality gap: total cut weight overflows");
    }

    const PairStructure& pairs_structure() const { return ps_; }
    const std::vector<std::size_t>& free_cells() const { return free_; }
    const std::vector<GapPair>& pairs() const { return pairs_; }
    int node(std::size_t i) const { return node_[i]; }

    /// Cut value over the pairs touching free cells.
    template <class Label>
    Int128 energy(Label&& label) const {
        Int128 s = 0;
        for (const auto& p : pairs_)
            if (label(p.a) != label(p.b)) s += p.w;
        return s;
    }

private:
    PairStructure ps_;
    std::vector<int> node_;
    std::vector<std::size_t> free_;
    std::vector<GapPair> pairs_;

    static std::pair<Cell, Cell> padded_range(const GridSet& g, const GraphDomain& dom, const Region& A,
                                              const CutMetric& m) {
        auto bb = A.bbox(g.n);
        if (!bb) return {Cell{0, 0, 0}, g.dims};
        // mirror partners sit within about Lip(S) pair lengths of the pair itself
        int pad = static_cast<int>(std::ceil(m.reach * (2 + dom.lip_reflection_bound()))) + 2;
        Cell lo{0, 0, 0}, hi{1, 1, 1};
        for (int i = 0; i < g.n; ++i) {
            auto u = static_cast<std::size_t>(i);
            lo[u] = std::clamp(static_cast<int>(std::floor((bb->first[i] - g.origin[i]) / g.h)) - pad, 0, g.dims[u]);
            hi[u] = std::clamp(static_cast<int>(std::ceil((bb->second[i] - g.origin[i]) / g.h)) + pad, 0, g.dims[u]);
        }
        return {lo, hi};
    }

    void check_box(const GridSet& g, const GraphDomain& dom, const CutMetric& m) const {
        for (std::size_t i : free_) {
            Cell c = g.coords(i);
            for (const auto& o : m.offsets)
                for (int s : {1, -1}) {
                    Cell q{c[0] + s * o[0], c[1] + s * o[1], g.n == 3 ? c[2] + s * o[2] : 0};
                    if (!g.in_box(q) && dom.contains(g.center(q)))
                        throw std::invalid_argument("minimality gap: window is not compactly inside the grid box");
                }
        }
    }
};

inline double rounding_bound(const CutMetric& m, double pe, double pf) {
    double wmin = *std::min_element(m.weight.begin(), m.weight.end());
    return std::ldexp(pe + pf, -weight_bits) / wmin;
}

inline MinGapResult finish(const MinGapProblem& p, const GapGraph& G, const std::vector<std::uint8_t>& labels,
                           Int128 best) {
    const GridSet& E = p.E;
    auto lab = [&](std::size_t i) { return G.node(i) >= 0 ? labels[static_cast<std::size_t>(G.node(i))] : E.bits[i]; };
    Int128 cur = G.energy([&](std::size_t i) { return E.bits[i]; });
    if (G.energy(lab) != best) throw std::logic_error("minimality gap: competitor energy does not match the cut");
    MinGapResult r;
    r.psi_units = cur - best;
    r.psi = units_to_measure(r.psi_units, E.h, E.n);
    r.competitor = E;
    for (std::size_t k = 0; k < G.free_cells().size(); ++k) r.competitor.bits[G.free_cells()[k]] = labels[k];
    const auto& ps = G.pairs_structure();
    Int128 pe = cut_units(ps, p.A, [&](std::size_t i) { return static_cast<int>(E.bits[i]); });
    Int128 pf = cut_units(ps, p.A, [&](std::size_t i) { return static_cast<int>(r.competitor.bits[i]); });
    if (pe - pf != r.psi_units) throw std::logic_error("minimality gap: window perimeter identity violated");
    r.perimeter_E = units_to_measure(pe, E.h, E.n);
    r.perimeter_F = units_to_measure(pf, E.h, E.n);
    r.rounding_bound = rounding_bound(p.cut_metric(), r.perimeter_E, r.perimeter_F);
    r.free_cells = G.free_cells().size();
    return r;
}

} // namespace detail

/// Exact binary minimum over competitors agreeing with E off the free cells,
/// as a minimum s-t cut with material on the source side.
inline MinGapResult minimality_gap(const MinGapProblem& p) {
    const CutMetric& m = p.cut_metric();
    detail::GapGraph G(p.E, p.dom, p.A, m);
    check_contained(p.E, G.pairs_structure().inside());
    const auto& fc = G.free_cells();
    MaxFlow mf(static_cast<int>(fc.size()));
    for (const auto& e : G.pairs()) {
        int a = G.node(e.a);
        if (e.b_free) {
            mf.add_edge(a, G.node(e.b), e.w, e.w);
        } else if (p.E.bits[e.b]) {
            mf.add_tweights(a, e.w, 0);
        } else {
            mf.add_tweights(a, 0, e.w);
        }
    }
    std::size_t arcs = mf.arcs();
    Int128 flow = mf.solve();
    std::vector<std::uint8_t> lab(fc.size());
    for (std::size_t k = 0; k < fc.size(); ++k) lab[k] = mf.source_side(static_cast<int>(k)) ? 1 : 0;
    auto r = detail::finish(p, G, lab, flow);
    r.nodes = fc.size();
    r.arcs = arcs;
    r.flow_units = flow;
    return r;
}

inline constexpr std::size_t brute_force_limit = 22;

/// Exhaustive Gray-code enumeration of all competitors (at most 22 free cells).
inline MinGapResult brute_force_gap(const MinGapProblem& p) {
    const CutMetric& m = p.cut_metric();
    detail::GapGraph G(p.E, p.dom, p.A, m);
    check_contained(p.E, G.pairs_structure().inside());
    const auto& fc = G.free_cells();
    const std::size_t k = fc.size();
    if (k > brute_force_limit) throw std::invalid_argument("brute_force_gap: more than 22 free cells");
    struct Nb { int other; int pinned; std::int64_t w; };
    std::vector<std::vector<Nb>> adj(k);
    for (const auto& e : G.pairs()) {
        auto a = static_cast<std::size_t>(G.node(e.a));
        if (e.b_free) {
            int b = G.node(e.b);
            adj[a].push_back({b, 0, e.w});
            adj[static_cast<std::size_t>(b)].push_back({static_cast<int>(a), 0, e.w});
        } else {
            adj[a].push_back({-1, p.E.bits[e.b], e.w});
        }
    }
    std::vector<std::uint8_t> lab(k);
    for (std::size_t i = 0; i < k; ++i) lab[i] = p.E.bits[fc[i]];
    Int128 cur = G.energy([&](std::size_t i) { return p.E.bits[i]; });
    Int128 best = cur;
    std::vector<std::uint8_t> best_lab = lab;
    const std::uint64_t total = std::uint64_t{1} << k;
    for (std::uint64_t step = 1; step < total; ++step) {
        auto v = static_cast<std::size_t>(std::countr_zero(step));
        int lv = lab[v];
        for (const auto& nb : adj[v]) {
            int lo = nb.other >= 0 ? lab[static_cast<std::size_t>(nb.other)] : nb.pinned;
            cur += (lv != lo) ? -nb.w : nb.w;
        }
        lab[v] = static_cast<std::uint8_t>(1 - lv);
        if (cur < best) {
            best = cur;
            best_lab = lab;
        }
    }
    auto r = detail::finish(p, G, best_lab, best);
    r.nodes = k;
    return r;
}

struct ProfileRow {
    double r = 0, psi = 0, psi_hat = 0;
    std::size_t free_cells = 0;
};
struct AlmostMinProfile {
    std::vector<ProfileRow> rows;
    double psi_hat_log_sum = 0;  // sum of psi_hat(r_k) dlog r_k (trapezoid)
    double psi_integral = 0;     // trapezoid of Psi(r)/r^n dr
    double slope = std::nan(""); // of log psi_hat against log r over rows with psi_hat > 0
};

/// Gap on B_r(x) (or on the off-centric balls of a chart) for each radius,
/// with psi_hat = Psi / (omega_n^{1-1/n} r^{n-1}).
inline AlmostMinProfile almost_min_profile(const GridSet& E, const GraphDomain& dom, const Vec& x,
                                           const std::vector<double>& radii, const OffcentricChart* chart = nullptr,
                                           const CutMetric* metric = nullptr) {
    AlmostMinProfile out;
    const int n = E.n;
    const double cn = std::pow(unit_ball_volume(n), 1.0 - 1.0 / n);
    for (double r : radii) {
        Region A = chart ? Region::offball(*chart, r, n) : Region::ball(x, r);
        auto res = minimality_gap({E, dom, A, metric});
        out.rows.push_back({r, res.psi, res.psi / (cn * std::pow(r, n - 1)), res.free_cells});
    }
    std::vector<double> rs, ph;
    for (std::size_t k = 0; k + 1 < out.rows.size(); ++k) {
        const auto& a = out.rows[k];
        const auto& b = out.rows[k + 1];
        out.psi_hat_log_sum += 0.5 * (a.psi_hat + b.psi_hat) * std::log(b.r / a.r);
        out.psi_integral += 0.5 * (a.psi / std::pow(a.r, n) + b.psi / std::pow(b.r, n)) * (b.r - a.r);
    }
    for (const auto& row : out.rows)
        if (row.psi_hat > 0) { rs.push_back(row.r); ph.push_back(row.psi_hat); }
    out.slope = loglog_slope(rs, ph);
    return out;
}

struct DensityReport {
    std::vector<double> radii, perimeter, vol_in, vol_out;
    std::vector<double> skipped;
    double perimeter_slope = std::nan(""), volume_slope = std::nan("");
    double perimeter_constant = 0; // max of P / r^{n-1} and its inverse
    double volume_constant = 0;    // max of r^n / min volume
    bool violation = false;
};

/// Perimeter and volume densities of E around x; radii whose perimeter is
/// below four cut weights are skipped.
inline DensityReport density_report(const GridSet& E, const GraphDomain& dom, const Vec& x,
                                    const std::vector<double>& radii, const CutMetric* metric = nullptr) {
    const CutMetric& m = metric ? *metric : CutMetric::standard(E.n);
    const int n = E.n;
    const double floor_p = 4 * *std::min_element(m.weight.begin(), m.weight.end()) * std::pow(E.h, n - 1);
    DensityReport d;
    std::vector<double> mv;
    for (double r : radii) {
        Region B = Region::ball(x, r);
        double P = perimeter_rel(E, dom, B, &m);
        if (P < floor_p) { d.skipped.push_back(r); continue; }
        double vi = volume(E, dom, B), vo = complement_volume(E, dom, B);
        d.radii.push_back(r);
        d.perimeter.push_back(P);
        d.vol_in.push_back(vi);
        d.vol_out.push_back(vo);
        mv.push_back(std::min(vi, vo));
        double cp = P / std::pow(r, n - 1);
        d.perimeter_constant = std::max({d.perimeter_constant, cp, 1 / cp});
        d.volume_constant = std::max(d.volume_constant, mv.back() > 0 ? std::pow(r, n) / mv.back() : INFINITY);
    }
    if (d.radii.size() < 2) throw std::invalid_argument("density_report: fewer than two usable radii");
    d.perimeter_slope = loglog_slope(d.radii, d.perimeter);
    d.volume_slope = loglog_slope(d.radii, mv);
    d.violation = !(std::abs(d.perimeter_slope - (n - 1)) <= 0.15) || !(std::abs(d.volume_slope - n) <= 0.2);
    return d;
}

struct StabilityReport {
    double psi_f = 0, psi_g = 0;
    double lhs = 0, variation_term = 0, trace_term = 0, rhs = 0, slack = 0;
    Int128 lhs_units = 0, rhs_units = 0;
    bool holds() const { return lhs_units <= rhs_units; }
};

/// Both sides of |Psi(f;A) - Psi(g;A)| <= ||Df|(A) - |Dg|(A)| + trace mismatch,
/// where the variations are window energies and the trace term is the
/// cut-weighted mismatch of f and g on pinned cells paired with free ones.
inline StabilityReport gap_stability_check(const GridSet& f, const GridSet& g, const GraphDomain& dom,
                                           const Region& A, const CutMetric* metric = nullptr) {
    if (!f.same_lattice(g)) throw std::invalid_argument("gap_stability_check: grids on different lattices");
    auto rf = minimality_gap({f, dom, A, metric});
    auto rg = minimality_gap({g, dom, A, metric});
    const CutMetric& m = metric ? *metric : CutMetric::standard(f.n);
    detail::GapGraph G(f, dom, A, m);
    Int128 ef = G.energy([&](std::size_t i) { return f.bits[i]; });
    Int128 eg = G.energy([&](std::size_t i) { return g.bits[i]; });
    Int128 tr = 0;
    for (const auto& e : G.pairs())
        if (!e.b_free && f.bits[e.b] != g.bits[e.b]) tr += e.w;
    StabilityReport s;
    s.psi_f = rf.psi;
    s.psi_g = rg.psi;
    Int128 d = rf.psi_units - rg.psi_units, v = ef - eg;
    s.lhs_units = d < 0 ? -d : d;
    Int128 va = v < 0 ? -v : v;
    s.rhs_units = va + tr;
    s.lhs = units_to_measure(s.lhs_units, f.h, f.n);
    s.variation_term = units_to_measure(va, f.h, f.n);
    s.trace_term = units_to_measure(tr, f.h, f.n);
    s.rhs = units_to_measure(s.rhs_units, f.h, f.n);
    s.slack = units_to_measure(s.rhs_units - s.lhs_units, f.h, f.n);
    return s;
}

/// Lattice box around B_R(x) with room for the reach and the reflected wall pairs.
inline std::pair<Vec, Vec> window_box(const GraphDomain& dom, const Vec& x, double R, double h,
                                      const CutMetric* metric = nullptr) {
    const CutMetric& m = metric ? *metric : CutMetric::standard(dom.n);
    const double pad = (std::ceil(m.reach * (2 + dom.lip_reflection_bound())) + 4) * h;
    Vec lo = x, hi = x;
    for (int i = 0; i < dom.n; ++i) { lo[i] -= R + pad; hi[i] += R + pad; }
    return {lo, hi};
}

} // namespace visilab
