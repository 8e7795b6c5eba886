#pragma once

#include "polyset.hpp"

#include <Eigen/Dense>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace visilab {

using Int128 = __int128;

inline double to_double(Int128 v) {
    bool neg = v < 0;
    unsigned __int128 u = neg ? static_cast<unsigned __int128>(-v) : static_cast<unsigned __int128>(v);
    double hi = static_cast<double>(static_cast<std::uint64_t>(u >> 64));
    double lo = static_cast<double>(static_cast<std::uint64_t>(u));
    double d = std::ldexp(hi, 64) + lo;
    return neg ? -d : d;
}

/// Integer weights carry this many fractional bits.
inline constexpr int weight_bits = 40;

using Offset = std::array<int, 3>;

/// Neighbourhood cut metric with Crofton weights: the cut of a digitized
/// half-space with unit normal nu costs sum_k w_k |<o_k, nu>| per unit area.
struct CutMetric {
    int n = 2;
    std::string name;
    std::vector<Offset> offsets;       // half neighbourhood, one per unordered pair
    std::vector<double> weight;        // per offset, after integer rounding
    std::vector<std::int64_t> iweight; // even integers, weight * 2^40
    double epsilon = 0;                // max |length factor - 1| over 3600 directions
    double reach = 0;                  // longest offset in cells

    double length_factor(const Vec& nu) const {
        double s = 0;
        for (std::size_t k = 0; k < offsets.size(); ++k) {
            double d = 0;
            for (int i = 0; i < n; ++i) d += offsets[k][static_cast<std::size_t>(i)] * nu[i];
            s += weight[k] * std::abs(d);
        }
        return s;
    }

    static const CutMetric& planar16() {
        static const CutMetric m = calibrate(2, "planar16", {{1, 0, 0}, {1, 1, 0}, {2, 1, 0}});
        return m;
    }
    static const CutMetric& planar24() {
        static const CutMetric m = calibrate(2, "planar24", {{1, 0, 0}, {1, 1, 0}, {2, 1, 0}, {3, 1, 0}});
        return m;
    }
    static const CutMetric& spatial26() {
        static const CutMetric m = calibrate(3, "spatial26", {{1, 0, 0}, {1, 1, 0}, {1, 1, 1}});
        return m;
    }
    static const CutMetric& standard(int n) { return n == 2 ? planar16() : spatial26(); }
    static const CutMetric& by_name(std::string_view s) {
        if (s == "planar16") return planar16();
        if (s == "planar24") return planar24();
        if (s == "spatial26") return spatial26();
        throw std::invalid_argument("unknown cut metric: " + std::string(s));
    }

    static std::vector<Vec> calibration_directions(int n, int count) {
        std::vector<Vec> d;
        if (n == 2) {
            for (int i = 0; i < count; ++i) {
                double th = std::numbers::pi * (i + 0.5) / count;
                d.push_back(Vec(std::cos(th), std::sin(th)));
            }
        } else {
            const double ga = std::numbers::pi * (3 - std::sqrt(5.0));
            for (int i = 0; i < count; ++i) {
                double z = 1 - (i + 0.5) / count; // upper hemisphere suffices by symmetry
                double rr = std::sqrt(1 - z * z);
                d.push_back(Vec(rr * std::cos(ga * i), rr * std::sin(ga * i), z));
            }
        }
        return d;
    }

private:
    /// All signed permutations of each class representative, one per unordered pair.
    static std::vector<std::vector<Offset>> expand(int n, const std::vector<Offset>& reps) {
        std::vector<std::vector<Offset>> classes;
        for (auto rep : reps) {
            std::vector<Offset> cls;
            std::array<int, 3> p = rep;
            std::sort(p.begin(), p.begin() + n);
            do {
                for (int signs = 0; signs < (1 << n); ++signs) {
                    Offset o{0, 0, 0};
                    for (int i = 0; i < n; ++i) o[static_cast<std::size_t>(i)] = (signs >> i & 1) ? -p[static_cast<std::size_t>(i)] : p[static_cast<std::size_t>(i)];
                    // canonical half: first non-zero component positive
                    int first = 0;
                    for (int i = 0; i < n; ++i)
                        if (o[static_cast<std::size_t>(i)] != 0) { first = o[static_cast<std::size_t>(i)]; break; }
                    if (first <= 0) continue;
                    if (std::find(cls.begin(), cls.end(), o) == cls.end()) cls.push_back(o);
                }
            } while (std::next_permutation(p.begin(), p.begin() + n));
            std::sort(cls.begin(), cls.end());
            classes.push_back(cls);
        }
        return classes;
    }

    // Least squares over 360 directions, reweighted (Lawson) toward the minimax fit.
    static CutMetric calibrate(int n, std::string name, const std::vector<Offset>& reps) {
        auto classes = expand(n, reps);
        auto dirs = calibration_directions(n, 360);
        const int m = static_cast<int>(dirs.size()), K = static_cast<int>(classes.size());
        Eigen::MatrixXd A(m, K);
        for (int i = 0; i < m; ++i)
            for (int k = 0; k < K; ++k) {
                double s = 0;
                for (const auto& o : classes[static_cast<std::size_t>(k)]) {
                    double d = 0;
                    for (int a = 0; a < n; ++a) d += o[static_cast<std::size_t>(a)] * dirs[static_cast<std::size_t>(i)][a];
                    s += std::abs(d);
                }
                A(i, k) = s;
            }
        Eigen::VectorXd lam = Eigen::VectorXd::Constant(m, 1.0 / m), w(K);
        for (int it = 0; it < 400; ++it) {
            Eigen::VectorXd sq = lam.cwiseSqrt();
            Eigen::MatrixXd Aw = sq.asDiagonal() * A;
            w = Aw.colPivHouseholderQr().solve(sq);
            Eigen::VectorXd res = (A * w - Eigen::VectorXd::Ones(m)).cwiseAbs();
            Eigen::VectorXd nl = lam.cwiseProduct(res);
            double s = nl.sum();
            if (!(s > 0)) break;
            lam = nl / s;
        }
        CutMetric cm;
        cm.n = n;
        cm.name = std::move(name);
        for (int k = 0; k < K; ++k) {
            if (!(w(k) > 0)) throw std::logic_error("CutMetric: calibration produced a non-positive weight");
            std::int64_t iw = 2 * std::llround(std::ldexp(w(k), weight_bits - 1));
            for (const auto& o : classes[static_cast<std::size_t>(k)]) {
                cm.offsets.push_back(o);
                cm.iweight.push_back(iw);
                cm.weight.push_back(std::ldexp(static_cast<double>(iw), -weight_bits));
                double len = 0;
                for (int a = 0; a < n; ++a) len += o[static_cast<std::size_t>(a)] * o[static_cast<std::size_t>(a)];
                cm.reach = std::max(cm.reach, std::sqrt(len));
            }
        }
        for (const auto& d : calibration_directions(n, 3600))
            cm.epsilon = std::max(cm.epsilon, std::abs(cm.length_factor(d) - 1));
        return cm;
    }
};

using Cell = std::array<int, 3>;

/// Binary occupancy over a box of n-cubes of side h; cell (i,j,k) has center
/// origin + (i+1/2, j+1/2, k+1/2) h and linear index (k*ny + j)*nx + i.
struct GridSet {
    int n = 2;
    double h = 1;
    Vec origin;
    Cell dims{1, 1, 1};
    std::vector<std::uint8_t> bits;

    static GridSet empty_box(int n, double h, const Vec& origin, Cell dims) {
        if (n < 2 || n > 3) throw std::invalid_argument("GridSet: n must be 2 or 3");
        if (!(h > 0)) throw std::invalid_argument("GridSet: h must be positive");
        if (n == 2) dims[2] = 1;
        GridSet g;
        g.n = n; g.h = h; g.origin = origin; g.dims = dims;
        g.bits.assign(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2], 0);
        return g;
    }
    /// Box [lo, hi] snapped outward to whole cells of a lattice anchored at 0.
    static GridSet covering(int n, double h, const Vec& lo, const Vec& hi) {
        Vec o(n);
        Cell d{1, 1, 1};
        for (int i = 0; i < n; ++i) {
            double a = std::floor(lo[i] / h), b = std::ceil(hi[i] / h);
            o[i] = a * h;
            d[static_cast<std::size_t>(i)] = static_cast<int>(b - a);
        }
        return empty_box(n, h, o, d);
    }

    std::size_t size() const { return bits.size(); }
    std::size_t index(const Cell& c) const {
        return (static_cast<std::size_t>(c[2]) * static_cast<std::size_t>(dims[1]) + static_cast<std::size_t>(c[1])) *
                   static_cast<std::size_t>(dims[0]) + static_cast<std::size_t>(c[0]);
    }
    Cell coords(std::size_t idx) const {
        Cell c{0, 0, 0};
        c[0] = static_cast<int>(idx % static_cast<std::size_t>(dims[0]));
        idx /= static_cast<std::size_t>(dims[0]);
        c[1] = static_cast<int>(idx % static_cast<std::size_t>(dims[1]));
        c[2] = static_cast<int>(idx / static_cast<std::size_t>(dims[1]));
        return c;
    }
    bool in_box(const Cell& c) const {
        for (int i = 0; i < n; ++i)
            if (c[static_cast<std::size_t>(i)] < 0 || c[static_cast<std::size_t>(i)] >= dims[static_cast<std::size_t>(i)]) return false;
        return true;
    }
    Vec center(const Cell& c) const {
        Vec x(n);
        for (int i = 0; i < n; ++i) x[i] = origin[i] + (c[static_cast<std::size_t>(i)] + 0.5) * h;
        return x;
    }
    Vec center(std::size_t idx) const { return center(coords(idx)); }
    Cell cell_of(const Vec& x) const {
        Cell c{0, 0, 0};
        for (int i = 0; i < n; ++i) c[static_cast<std::size_t>(i)] = static_cast<int>(std::floor((x[i] - origin[i]) / h));
        return c;
    }
    bool get(std::size_t idx) const { return bits[idx] != 0; }
    bool get(const Cell& c) const { return in_box(c) && bits[index(c)] != 0; }
    void set(const Cell& c, bool v) { bits[index(c)] = v ? 1 : 0; }

    std::size_t count() const {
        std::size_t k = 0;
        for (auto b : bits) k += b;
        return k;
    }
    double cell_volume() const { return std::pow(h, n); }
    bool same_lattice(const GridSet& o) const { return n == o.n && h == o.h && origin == o.origin && dims == o.dims; }

    /// Exact dyadic rescaling x -> t x (t a power of two keeps every coordinate exact).
    GridSet scaled(double t) const {
        int e = 0;
        if (!(t > 0) || std::frexp(t, &e) != 0.5)
            throw std::invalid_argument("GridSet::scaled: t must be a power of two");
        GridSet g = *this;
        g.h *= t;
        g.origin *= t;
        return g;
    }

    template <class Pred>
    static GridSet from_predicate(int n, double h, const Vec& lo, const Vec& hi, Pred&& pred) {
        GridSet g = covering(n, h, lo, hi);
        for (std::size_t i = 0; i < g.size(); ++i) g.bits[i] = pred(g.center(i)) ? 1 : 0;
        return g;
    }

    void write(std::ostream& os) const {
        char buf[256];
        os << "visilab-grid 1\n";
        std::snprintf(buf, sizeof buf, "%d %d %d %d\n%a\n%a %a %a\n", n, dims[0], dims[1], dims[2], h, origin[0],
                      origin[1], n == 3 ? origin[2] : 0.0);
        os << buf << "bits\n";
        std::uint8_t byte = 0;
        int fill = 0;
        for (auto b : bits) {
            byte = static_cast<std::uint8_t>(byte << 1 | (b & 1));
            if (++fill == 8) { os.put(static_cast<char>(byte)); byte = 0; fill = 0; }
        }
        if (fill) os.put(static_cast<char>(byte << (8 - fill)));
    }
    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open " + path);
        write(f);
    }
    static GridSet read(std::istream& is) {
        std::string magic, line;
        int ver = 0;
        is >> magic >> ver;
        if (magic != "visilab-grid" || ver != 1) throw std::runtime_error("GridSet: bad bitmask header");
        GridSet g;
        is >> g.n >> g.dims[0] >> g.dims[1] >> g.dims[2];
        std::string hs, o0, o1, o2;
        is >> hs >> o0 >> o1 >> o2 >> line;
        if (line != "bits" || g.n < 2 || g.n > 3) throw std::runtime_error("GridSet: bad bitmask header");
        is.get();
        g.h = std::strtod(hs.c_str(), nullptr);
        g.origin = Vec(g.n);
        g.origin[0] = std::strtod(o0.c_str(), nullptr);
        g.origin[1] = std::strtod(o1.c_str(), nullptr);
        if (g.n == 3) g.origin[2] = std::strtod(o2.c_str(), nullptr);
        std::size_t total = static_cast<std::size_t>(g.dims[0]) * g.dims[1] * g.dims[2];
        g.bits.assign(total, 0);
        for (std::size_t i = 0; i < total; i += 8) {
            int c = is.get();
            if (c == EOF) throw std::runtime_error("GridSet: truncated bitmask");
            for (std::size_t b = 0; b < 8 && i + b < total; ++b) g.bits[i + b] = (c >> (7 - b)) & 1;
        }
        return g;
    }
    static GridSet load(const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open " + path);
        return read(f);
    }
};

/// Cells whose centers are interior to the domain.
inline std::vector<std::uint8_t> inside_mask(const GridSet& g, const GraphDomain& dom) {
    std::vector<std::uint8_t> m(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) m[i] = dom.contains(g.center(i)) ? 1 : 0;
    return m;
}

/// Scanline digitization: a cell is material when its center lies in E and in the domain.
inline GridSet digitize(const PolySet& E, const GraphDomain& dom, double h, const Vec& lo, const Vec& hi) {
    GridSet g = GridSet::covering(2, h, lo, hi);
    std::vector<std::pair<double, int>> xs;
    for (int j = 0; j < g.dims[1]; ++j) {
        double y = g.origin[1] + (j + 0.5) * h;
        xs.clear();
        E.for_each_edge([&](const Vec& a, const Vec& b) {
            if (a[1] <= y && b[1] > y) xs.push_back({a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1]), 1});
            else if (b[1] <= y && a[1] > y) xs.push_back({a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1]), -1});
        });
        std::sort(xs.begin(), xs.end());
        int w = 0;
        std::size_t q = 0;
        for (int i = 0; i < g.dims[0]; ++i) {
            double x = g.origin[0] + (i + 0.5) * h;
            while (q < xs.size() && xs[q].first <= x) w += xs[q++].second;
            if (w != 0) {
                Cell c{i, j, 0};
                if (dom.contains(g.center(c))) g.set(c, true);
            }
        }
    }
    return g;
}

namespace detail {

/// The relative-perimeter pair structure of a grid inside a domain. Pairs with
/// both centers in the domain carry their full weight. A pair reaching across
/// the wall is coupled to the mirror image S(x_j) of its outside cell with half
/// weight (the other half belongs to the mirrored pair), so lines crossing the
/// interface next to the wall are still counted.
class PairStructure {
public:
    PairStructure(const GridSet& g, const GraphDomain& dom, const CutMetric& m)
        : g_(g), dom_(dom), m_(m), inside_(inside_mask(g, dom)) {
        if (m.n != g.n) throw std::invalid_argument("cut metric dimension does not match the grid");
    }

    const std::vector<std::uint8_t>& inside() const { return inside_; }
    const GridSet& grid() const { return g_; }
    const CutMetric& metric() const { return m_; }
    const GraphDomain& domain() const { return dom_; }

    /// Mirror partner of an outside cell, or npos.
    std::size_t mirror(const Cell& q) const {
        Vec x = dom_.reflect(g_.center(q));
        Cell c = g_.cell_of(x);
        if (!g_.in_box(c)) return npos;
        std::size_t id = g_.index(c);
        return inside_[id] ? id : npos;
    }

    /// f(i, j, k, weight, midpoint) over every coupled pair whose lower cell
    /// lies in [lo, hi); i and j are box indices of cells inside the domain.
    template <class F>
    void visit(const Cell& lo, const Cell& hi, F&& f) const {
        const int n = g_.n;
        for (int c2 = lo[2]; c2 < hi[2]; ++c2)
            for (int c1 = lo[1]; c1 < hi[1]; ++c1)
                for (int c0 = lo[0]; c0 < hi[0]; ++c0) {
                    Cell ci{c0, c1, c2};
                    std::size_t i = g_.index(ci);
                    bool in_i = inside_[i];
                    for (std::size_t k = 0; k < m_.offsets.size(); ++k) {
                        const Offset& o = m_.offsets[k];
                        for (int sgn : {1, -1}) {
                            Cell cj{c0 + sgn * o[0], c1 + sgn * o[1], n == 3 ? c2 + sgn * o[2] : 0};
                            bool boxed = g_.in_box(cj);
                            if (sgn == -1 && boxed) continue; // visited from the other end
                            Vec mid = (g_.center(ci) + g_.center(cj)) * 0.5;
                            if (boxed) {
                                std::size_t j = g_.index(cj);
                                bool in_j = inside_[j];
                                if (in_i && in_j) { f(i, j, k, m_.iweight[k], mid); continue; }
                                if (!in_i && !in_j) continue;
                                std::size_t p = in_i ? i : j;
                                std::size_t q = mirror(in_i ? cj : ci);
                                if (q != npos && q != p) f(p, q, k, m_.iweight[k] / 2, mid);
                            } else {
                                if (!in_i || dom_.contains(g_.center(cj))) continue;
                                std::size_t q = mirror(cj);
                                if (q != npos && q != i) f(i, q, k, m_.iweight[k] / 2, mid);
                            }
                        }
                    }
                }
    }
    template <class F>
    void visit(F&& f) const { visit(Cell{0, 0, 0}, g_.dims, std::forward<F>(f)); }

    /// Cell range covering a region's pairs (whole box if unbounded).
    std::pair<Cell, Cell> range(const Region& A) const {
        auto bb = A.bbox(g_.n);
        if (!bb) return {Cell{0, 0, 0}, g_.dims};
        Cell lo{0, 0, 0}, hi{1, 1, 1};
        int pad = static_cast<int>(std::ceil(m_.reach)) + 1;
        for (int i = 0; i < g_.n; ++i) {
            auto u = static_cast<std::size_t>(i);
            lo[u] = std::clamp(static_cast<int>(std::floor((bb->first[i] - g_.origin[i]) / g_.h)) - pad, 0, g_.dims[u]);
            hi[u] = std::clamp(static_cast<int>(std::ceil((bb->second[i] - g_.origin[i]) / g_.h)) + pad, 0, g_.dims[u]);
        }
        return {lo, hi};
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    const GridSet& g_;
    const GraphDomain& dom_;
    const CutMetric& m_;
    std::vector<std::uint8_t> inside_;
};

} // namespace detail

/// Integer cut value (units 2^-40 h^{n-1}) of a labelling over pairs with midpoint in A.
template <class Label>
Int128 cut_units(const detail::PairStructure& ps, const Region& A, Label&& label) {
    Int128 s = 0;
    auto [lo, hi] = ps.range(A);
    ps.visit(lo, hi, [&](std::size_t i, std::size_t j, std::size_t, std::int64_t w, const Vec& mid) {
        int d = label(i) - label(j);
        if (d != 0 && A.contains(mid)) s += static_cast<Int128>(w) * (d < 0 ? -d : d);
    });
    return s;
}

inline double units_to_measure(Int128 u, double h, int n) {
    return std::ldexp(to_double(u), -weight_bits) * std::pow(h, n - 1);
}

} // namespace visilab
