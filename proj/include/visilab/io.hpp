#pragma once

#include "blowup.hpp"
#include "corpus.hpp"

#include <json.hpp>

#include <cstdlib>
#include <cstdio>
#include <filesystem>

namespace visilab {

using json = nlohmann::ordered_json;

inline constexpr const char* schema_version = "visilab/1";

inline std::string int128_string(Int128 v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
    std::string s;
    while (u) { s.push_back(static_cast<char>('0' + static_cast<int>(u % 10))); u /= 10; }
    if (neg) s.push_back('-');
    return {s.rbegin(), s.rend()};
}

inline json to_json(const Vec& v) {
    json a = json::array();
    for (int i = 0; i < v.n; ++i) a.push_back(v[i]);
    return a;
}

inline json to_json(const std::vector<double>& v) { return json(v); }

inline json to_json(const Witness& w) {
    json j{{"test", w.test}, {"x", to_json(w.x)}, {"t", w.t}, {"value", w.value}};
    if (w.aux.n) j["aux"] = to_json(w.aux);
    if (w.feature_index >= 0) j["feature_index"] = w.feature_index;
    return j;
}

inline json to_json(const Profile& p) {
    json j{{"family", family_name(p.family)}};
    switch (p.family) {
    case Family::linear: j["coefficients"] = p.a; break;
    case Family::cone: j["c"] = p.c; break;
    case Family::power: j["c"] = p.c; j["p"] = p.p; break;
    case Family::sampled: j["samples"] = p.s.size(); j["directions"] = p.dirs.size(); break;
    default: break;
    }
    if (p.scale != 1) j["scale"] = p.scale;
    return j;
}

inline json to_json(const GraphDomain& d) {
    return {{"n", d.n}, {"rho", d.rho}, {"m", d.m}, {"lipschitz", d.lipschitz}, {"omega", to_json(d.omega)}};
}

inline json to_json(const VisibilityFunction& u) {
    json j{{"T", u.T}};
    switch (u.kind) {
    case VisibilityFunction::Kind::zero: j["kind"] = "zero"; break;
    case VisibilityFunction::Kind::power: j["kind"] = "power"; j["C"] = u.C; j["p"] = u.p; break;
    default: j["kind"] = "sampled"; j["samples"] = u.table.x.size(); break;
    }
    return j;
}

inline json to_json(const OffcentricChart& c) {
    json j{{"R", c.R}};
    switch (c.kind) {
    case OffcentricChart::Kind::zero: j["kind"] = "zero"; break;
    case OffcentricChart::Kind::power: j["kind"] = "power"; j["C"] = c.C; j["p"] = c.p; break;
    case OffcentricChart::Kind::from_u: j["kind"] = "from-u"; j["u"] = to_json(c.u); break;
    default: j["kind"] = "sampled"; break;
    }
    return j;
}

inline json to_json(const PolySet& E) {
    json loops = json::array();
    for (const auto& l : E.loops) {
        json pts = json::array();
        for (const auto& p : l) pts.push_back(to_json(p));
        loops.push_back(pts);
    }
    return loops;
}

inline json to_json(const CorpusEntry& e, bool with_set = false) {
    json j{{"name", e.name},
           {"description", e.description},
           {"params", e.params},
           {"domain", to_json(e.dom)},
           {"u", to_json(e.u)},
           {"chart", to_json(e.chart())},
           {"expected", to_string(e.expected)},
           {"status", to_string(e.status)}};
    if (e.status == SetStatus::lambda_minimizer) j["lambda"] = e.lambda;
    if (e.set) {
        j["set"] = {{"loops", e.set->loops.size()}, {"area", e.set->signed_area()}};
        if (with_set) j["set"]["polygons"] = to_json(*e.set);
    }
    return j;
}

inline json to_json(const VisibilityCertificate& c) {
    json w = json::array();
    for (const auto& x : c.witnesses) w.push_back(to_json(x));
    return {{"overall", to_string(c.overall)},
            {"V1", to_string(c.v1)},
            {"V2", to_string(c.v2)},
            {"V3", {{"direct", to_string(c.v3_direct)}, {"slope", to_string(c.v3_slope)}, {"gradient", to_string(c.v3_gradient)}}},
            {"horizon", {{"declared", c.v12.T_declared}, {"effective", c.v12.T_effective}, {"clipped", c.v12.clipped}}},
            {"summability", {{"total", c.v12.summability.total}, {"tail", c.v12.summability.tail}, {"levels", c.v12.summability.levels}}},
            {"directions", c.directions},
            {"scales", c.scales},
            {"slices", c.slices},
            {"disagreements", c.disagreements},
            {"witnesses", w},
            {"diagnostics", c.diagnostics}};
}

inline json to_json(const TangentCone& tc) {
    json d = json::array();
    for (const auto& v : tc.dirs) d.push_back(to_json(v));
    return {{"n", tc.n}, {"directions", d}, {"slope", tc.slope}, {"error", tc.error}, {"monotone_defect", tc.monotone_defect}};
}

inline json to_json(const FoliationAudit& a) {
    return {{"samples", a.samples},
            {"max_residual_over_r2", a.max_residual},
            {"max_fd_error", a.max_fd_error},
            {"max_deviation_minus_bound", a.max_deviation},
            {"violations", {{"residual", a.residual_violations}, {"finite_difference", a.fd_violations},
                            {"deviation", a.deviation_violations}, {"sandwich", a.sandwich_violations}}}};
}

inline json to_json(const MinGapResult& r) {
    return {{"psi", r.psi},
            {"psi_units", int128_string(r.psi_units)},
            {"perimeter_E", r.perimeter_E},
            {"perimeter_F", r.perimeter_F},
            {"rounding_bound", r.rounding_bound},
            {"free_cells", r.free_cells},
            {"nodes", r.nodes},
            {"arcs", r.arcs}};
}

inline json to_json(const DensityReport& d) {
    return {{"perimeter_slope", d.perimeter_slope},
            {"volume_slope", d.volume_slope},
            {"perimeter_constant", d.perimeter_constant},
            {"volume_constant", d.volume_constant},
            {"skipped", d.skipped},
            {"violation", d.violation}};
}

inline json to_json(const Extrapolation& e) {
    return {{"value", e.value}, {"error", e.error}, {"richardson", e.richardson}};
}

inline json to_json(const MonotonicityAudit& a) {
    return {{"radii", a.radii.size()},
            {"pairs", a.pairs.size()},
            {"gap_computed", a.psi_computed},
            {"mu_max", a.mu_max},
            {"tau", a.tau},
            {"min_slack", a.min_slack},
            {"violations", a.violations},
            {"monotone_prefix", a.monotone_prefix},
            {"max_M_drop", a.max_m_drop},
            {"theta", to_json(a.theta)},
            {"centric", to_json(a.centric)},
            {"theta_radii", a.theta_radii},
            {"theta_mu", a.theta_mu},
            {"centric_mu", a.centric_mu},
            {"max_radial_deviation", a.max_radial_deviation}};
}

inline json to_json(const BlowupTrace& t) {
    json sc = json::array();
    for (const auto& s : t.scales)
        sc.push_back({{"j", s.j}, {"t", s.t}, {"perimeter", s.perimeter}, {"volume", s.volume},
                      {"complement_volume", s.complement_volume}, {"l1_to_final", s.l1_to_final},
                      {"l1_to_reference", s.l1_to_reference}, {"kappa", s.kappa}, {"psi", s.psi},
                      {"hausdorff", s.hausdorff}});
    json rs = json::array();
    for (const auto& g : t.rescaling)
        rs.push_back({{"t", g.t}, {"lhs", g.lhs}, {"rhs", g.rhs}, {"lhs_units", int128_string(g.lhs_units)},
                      {"rhs_units", int128_string(g.rhs_units)}, {"exact", g.exact()}});
    return {{"R", t.R},
            {"h", t.h},
            {"scales", sc},
            {"l1", t.l1},
            {"jitter_radii", t.jitter_radii},
            {"perimeter_gap", t.perimeter_gap},
            {"perimeter_ratio_max", t.perimeter_ratio_max},
            {"l1_decreasing", t.l1_decreasing},
            {"reference_decreasing", t.reference_decreasing},
            {"kappa_decreasing", t.kappa_decreasing},
            {"psi0", t.psi0},
            {"psi0_bound", t.psi0_bound},
            {"theta", to_json(t.theta)},
            {"mu0", t.mu0},
            {"mu0_deviation", t.mu0_deviation},
            {"tau", t.tau},
            {"volume_constant", t.volume_constant},
            {"nontrivial", t.nontrivial},
            {"rescaling", rs}};
}

/// A small CSV table; numbers are written with 17 significant digits.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    CsvTable& row(const std::vector<std::string>& cells) {
        if (cells.size() != header_.size()) throw std::logic_error("CsvTable: row width does not match the header");
        rows_.push_back(cells);
        return *this;
    }
    static std::string num(double x) {
        if (std::isnan(x)) return "nan";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return buf;
    }
    static std::string num(long long x) { return std::to_string(x); }

    void write(std::ostream& os) const {
        auto line = [&](const std::vector<std::string>& r) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
            os << '\n';
        };
        line(header_);
        for (const auto& r : rows_) line(r);
    }
    std::size_t size() const { return rows_.size(); }

    CsvTable& constant_column(const std::string& name, const std::string& value) {
        header_.push_back(name);
        for (auto& r : rows_) r.push_back(value);
        return *this;
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

inline CsvTable audit_table(const MonotonicityAudit& a) {
    CsvTable t({"r", "mu", "psi", "I", "J", "G", "M"});
    for (std::size_t k = 0; k < a.radii.size(); ++k)
        t.row({CsvTable::num(a.radii[k]), CsvTable::num(a.mu[k]), CsvTable::num(a.psi[k]), CsvTable::num(a.I[k]),
               CsvTable::num(a.J[k]), CsvTable::num(a.G[k]), CsvTable::num(a.M[k])});
    return t;
}

inline CsvTable audit_pairs_table(const MonotonicityAudit& a) {
    CsvTable t({"k", "l", "r1", "r2", "lhs", "weight", "dmu", "dI", "G", "rhs", "slack"});
    for (const auto& p : a.pairs)
        t.row({CsvTable::num(static_cast<long long>(p.k)), CsvTable::num(static_cast<long long>(p.l)),
               CsvTable::num(a.radii[static_cast<std::size_t>(p.k)]), CsvTable::num(a.radii[static_cast<std::size_t>(p.l)]),
               CsvTable::num(p.lhs), CsvTable::num(p.weight), CsvTable::num(p.dmu), CsvTable::num(p.dI),
               CsvTable::num(p.G), CsvTable::num(p.rhs), CsvTable::num(p.slack)});
    return t;
}

inline CsvTable blowup_table(const BlowupTrace& tr) {
    CsvTable t({"j", "t", "l1_to_final", "perimeter", "kappa", "psi"});
    for (const auto& s : tr.scales)
        t.row({CsvTable::num(static_cast<long long>(s.j)), CsvTable::num(s.t), CsvTable::num(s.l1_to_final),
               CsvTable::num(s.perimeter), CsvTable::num(s.kappa), CsvTable::num(s.psi)});
    return t;
}

inline CsvTable density_table(const DensityReport& d) {
    CsvTable t({"r", "perimeter", "vol_in", "vol_out"});
    for (std::size_t k = 0; k < d.radii.size(); ++k)
        t.row({CsvTable::num(d.radii[k]), CsvTable::num(d.perimeter[k]), CsvTable::num(d.vol_in[k]),
               CsvTable::num(d.vol_out[k])});
    return t;
}

inline CsvTable certificate_table(const VisibilityCertificate& c) {
    CsvTable t({"test", "t", "value", "x0", "x1"});
    for (const auto& w : c.witnesses)
        t.row({w.test, CsvTable::num(w.t), CsvTable::num(w.value), CsvTable::num(w.x.n > 0 ? w.x[0] : std::nan("")),
               CsvTable::num(w.x.n > 1 ? w.x[1] : std::nan(""))});
    return t;
}

/// Report envelope: schema, command and seed come first in every JSON output.
inline json envelope(const std::string& command, std::uint64_t seed) {
    return {{"schema", schema_version}, {"command", command}, {"seed", seed}};
}

/// --out, else $VISILAB_OUT, else the working directory.
inline std::filesystem::path output_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("VISILAB_OUT"); env && *env) return env;
    return ".";
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << text;
}

inline void write_json(const std::filesystem::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

inline void write_csv(const std::filesystem::path& p, const CsvTable& t) {
    std::ostringstream os;
    t.write(os);
    write_text(p, os.str());
}

} // namespace visilab
