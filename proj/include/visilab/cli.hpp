#pragma once

#include "io.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace visilab::cli {

enum Exit { ok = 0, failed = 1, inconclusive_only = 2, usage = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    std::string corpus;
    std::vector<std::string> params;
    std::string h = "1/256";
    double rmin = 0, rmax = 0;
    int per_decade = 8;
    std::uint64_t seed = 1;
    std::string out;
    double tau_root = 0, tau_audit = 0; // 0: defaults
    int scales = 20, directions = 64;
    int samples = 1000;
    std::string power; // "C,p": foliation chart v = C r^p instead of the entry's
    double chart_radius = 1;
    double R = 1;
    int jmax = 6;
    bool all_gaps = false;
    std::string dump_name;
    bool with_set = false;
};

/// "0.25", "1/256" or "2^-8".
inline double parse_number(const std::string& s) {
    auto one = [&](const std::string& t) {
        std::size_t used = 0;
        double v = 0;
        try { v = std::stod(t, &used); } catch (const std::exception&) { used = 0; }
        if (used != t.size() || t.empty()) throw UsageError("not a number: " + s);
        return v;
    };
    if (auto k = s.find('/'); k != std::string::npos) return one(s.substr(0, k)) / one(s.substr(k + 1));
    if (auto k = s.find('^'); k != std::string::npos) return std::pow(one(s.substr(0, k)), one(s.substr(k + 1)));
    return one(s);
}

inline Params parse_params(const std::vector<std::string>& kv) {
    Params p;
    for (const auto& s : kv) {
        auto k = s.find('=');
        if (k == std::string::npos || k == 0) throw UsageError("--param expects key=value, got " + s);
        p[s.substr(0, k)] = parse_number(s.substr(k + 1));
    }
    return p;
}

inline CorpusEntry load_entry(const RunConfig& cfg) {
    try {
        return make_example(cfg.corpus, parse_params(cfg.params));
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

inline const PolySet& entry_set(const CorpusEntry& e) {
    if (!e.set) throw UsageError("corpus entry " + e.name + " carries no set");
    return *e.set;
}

struct Outcome {
    json result;
    std::vector<std::pair<std::string, Verdict>> checks;
    std::vector<std::pair<std::string, CsvTable>> tables; // file suffix, table
    std::vector<std::string> notes;                       // echoed to stdout
};

inline Verdict verdict_of(bool ok) { return ok ? Verdict::pass : Verdict::fail; }

inline json config_json(const RunConfig& c) {
    json j{{"corpus", c.corpus}, {"params", parse_params(c.params)}};
    if (c.command != "certify" && c.command != "tangent" && c.command != "foliate") j["h"] = c.h;
    if (c.rmax > 0) j["radii"] = {{"min", c.rmin}, {"max", c.rmax}, {"per_decade", c.per_decade}};
    if (c.tau_root > 0) j["tau_root"] = c.tau_root;
    if (c.tau_audit > 0) j["tau_audit"] = c.tau_audit;
    return j;
}

inline std::vector<double> radii(const RunConfig& c, double rmin, double rmax) {
    double lo = c.rmin > 0 ? c.rmin : rmin, hi = c.rmax > 0 ? c.rmax : rmax;
    try {
        return make_radius_grid(lo, hi, c.per_decade, c.seed);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

inline double grid_step(const RunConfig& c) {
    double h = parse_number(c.h);
    if (!(h > 0) || !(h < 1)) throw UsageError("--h must lie in (0, 1)");
    return h;
}

inline GridSet grid_of(const CorpusEntry& e, double h, double R) {
    auto [lo, hi] = window_box(e.dom, Vec(e.dom.n), R, h);
    return digitize(entry_set(e), e.dom, h, lo, hi);
}

inline Outcome cmd_certify(const RunConfig& c, const CorpusEntry& e) {
    CertifyOptions opt;
    opt.scales = c.scales;
    opt.directions = default_directions(e.dom.n, c.directions);
    auto cert = certify_visibility(e.dom, e.u, {}, opt);
    Outcome o;
    o.result = to_json(cert);
    o.checks.push_back({"overall", cert.overall});
    o.tables.push_back({"witnesses", certificate_table(cert)});
    for (const auto& w : cert.witnesses) {
        std::ostringstream s;
        s << "witness " << w.test << " t=" << CsvTable::num(w.t) << " x=" << to_json(w.x).dump();
        if (w.feature_index >= 0) s << " k=" << w.feature_index;
        o.notes.push_back(s.str());
    }
    return o;
}

inline Outcome cmd_tangent(const RunConfig& c, const CorpusEntry& e) {
    auto tc = tangent_cone(e.dom, e.u, default_directions(e.dom.n, c.directions));
    Outcome o;
    o.result = to_json(tc);
    CsvTable t({"direction", "slope", "error", "monotone_defect"});
    bool finite = true;
    for (std::size_t k = 0; k < tc.dirs.size(); ++k) {
        finite = finite && std::isfinite(tc.slope[k]) && std::isfinite(tc.error[k]);
        t.row({to_json(tc.dirs[k]).dump(), CsvTable::num(tc.slope[k]), CsvTable::num(tc.error[k]),
               CsvTable::num(tc.monotone_defect[k])});
    }
    o.tables.push_back({"cone", t});
    o.checks.push_back({"finite", verdict_of(finite)});
    return o;
}

inline Outcome cmd_foliate(const RunConfig& c, const CorpusEntry& e) {
    OffcentricChart ch = e.chart();
    if (!c.power.empty()) {
        auto k = c.power.find(',');
        if (k == std::string::npos) throw UsageError("--power expects C,p");
        ch = OffcentricChart::power(parse_number(c.power.substr(0, k)), parse_number(c.power.substr(k + 1)),
                                    c.chart_radius);
    }
    if (c.tau_root > 0) ch.tau_root = c.tau_root;
    auto a = foliation_audit(ch, e.dom.n, c.samples, c.seed, c.tau_root > 0 ? c.tau_root : tol::root);
    Outcome o;
    o.result = {{"chart", to_json(ch)}, {"audit", to_json(a)}};
    CsvTable t({"r", "v", "dv"});
    for (int k = 1; k <= 64; ++k) {
        double r = ch.R * k / 64;
        t.row({CsvTable::num(r), CsvTable::num(ch.v(r)), CsvTable::num(ch.dv(r))});
    }
    o.tables.push_back({"chart", t});
    o.checks.push_back({"audit", verdict_of(a.passed())});
    return o;
}

inline Outcome cmd_mingap(const RunConfig& c, const CorpusEntry& e) {
    const double h = grid_step(c);
    auto rs = radii(c, 1.0 / 16, 0.5);
    auto E = grid_of(e, h, rs.back());
    auto prof = almost_min_profile(E, e.dom, Vec(e.dom.n), rs);
    Outcome o;
    CsvTable t({"r", "psi", "psi_hat", "free_cells"});
    bool nonneg = true;
    for (const auto& row : prof.rows) {
        nonneg = nonneg && row.psi >= 0;
        t.row({CsvTable::num(row.r), CsvTable::num(row.psi), CsvTable::num(row.psi_hat),
               CsvTable::num(static_cast<long long>(row.free_cells))});
    }
    o.result = {{"rows", prof.rows.size()}, {"psi_hat_log_sum", prof.psi_hat_log_sum},
                {"psi_integral", prof.psi_integral}, {"slope", prof.slope}};
    o.tables.push_back({"profile", t});
    o.checks.push_back({"nonnegative", verdict_of(nonneg)});
    return o;
}

inline Outcome cmd_density(const RunConfig& c, const CorpusEntry& e) {
    const double h = grid_step(c);
    auto rs = radii(c, 1.0 / 32, 0.25);
    auto E = grid_of(e, h, rs.back());
    auto d = density_report(E, e.dom, Vec(e.dom.n), rs);
    Outcome o;
    o.result = to_json(d);
    o.tables.push_back({"density", density_table(d)});
    o.checks.push_back({"densities", verdict_of(!d.violation)});
    return o;
}

inline Outcome cmd_monotonicity(const RunConfig& c, const CorpusEntry& e) {
    auto rs = radii(c, 0.01, 0.5);
    auto ch = e.chart();
    if (c.tau_root > 0) ch.tau_root = c.tau_root;
    MonotonicityAudit a;
    const bool grid = c.h != "none";
    if (grid) a = audit(grid_of(e, grid_step(c), rs.back()), e.dom, ch, rs);
    else a = audit(entry_set(e), e.dom, ch, rs);
    std::size_t bad = a.violations;
    if (c.tau_audit > 0) {
        bad = 0;
        for (const auto& p : a.pairs)
            if (p.slack < -c.tau_audit) ++bad;
    }
    Outcome o;
    o.result = to_json(a);
    o.result["backend"] = grid ? "grid" : "polygon";
    o.tables.push_back({"radii", audit_table(a)});
    o.tables.push_back({"pairs", audit_pairs_table(a)});
    o.checks.push_back({"slack", verdict_of(bad == 0)});
    return o;
}

inline Outcome cmd_blowup(const RunConfig& c, const CorpusEntry& e) {
    BlowupOptions opt;
    opt.h = grid_step(c);
    opt.R = c.R;
    opt.seed = c.seed;
    opt.all_gaps = c.all_gaps;
    if (e.name == "bumped-quadrant") {
        double L = e.params.at("L");
        opt.reference = PolySet::polygon({Vec(0, 0), Vec(L, 0), Vec(L, L), Vec(0, L)});
    }
    if (c.jmax < 1) throw UsageError("--jmax must be at least 1");
    std::vector<int> js;
    for (int j = 0; j <= c.jmax; ++j) js.push_back(j);
    auto tr = blowup_trace(entry_set(e), e.dom, e.u, js, opt);
    Outcome o;
    o.result = to_json(tr);
    o.tables.push_back({"trace", blowup_table(tr)});
    const auto& last = tr.limit();
    if (opt.reference) {
        o.checks.push_back({"reference_decreasing", verdict_of(tr.reference_decreasing)});
        o.checks.push_back({"reference_final", verdict_of(last.l1_to_reference <= 2 * opt.h)});
    } else {
        o.checks.push_back({"l1_decreasing", verdict_of(tr.l1_decreasing)});
    }
    o.checks.push_back({"kappa_final", verdict_of(last.kappa <= 2 * opt.h)});
    o.checks.push_back({"gap_small", verdict_of(tr.gap_small())});
    bool exact = !tr.rescaling.empty();
    for (const auto& g : tr.rescaling) exact = exact && g.exact();
    o.checks.push_back({"rescaling", verdict_of(exact)});
    return o;
}

inline int exit_code(const std::vector<std::pair<std::string, Verdict>>& checks) {
    bool any_fail = false, any_inc = false;
    for (const auto& [name, v] : checks) {
        any_fail = any_fail || v == Verdict::fail;
        any_inc = any_inc || v == Verdict::inconclusive;
    }
    return any_fail ? failed : any_inc ? inconclusive_only : ok;
}

inline int execute(const RunConfig& c, std::ostream& out, std::ostream& err) {
    if (c.command == "corpus-list") {
        json j = envelope("corpus list", c.seed);
        json list = json::array();
        for (const auto& name : example_names()) list.push_back(to_json(make_example(name)));
        j["examples"] = list;
        out << j.dump(2) << '\n';
        return ok;
    }
    if (c.command == "corpus-dump") {
        CorpusEntry e;
        try {
            e = make_example(c.dump_name, parse_params(c.params));
        } catch (const std::invalid_argument& ex) {
            throw UsageError(ex.what());
        }
        json j = envelope("corpus dump", c.seed);
        j["entry"] = to_json(e, c.with_set);
        out << j.dump(2) << '\n';
        return ok;
    }

    const CorpusEntry e = load_entry(c);
    Outcome o;
    std::string error;
    try {
        if (c.command == "certify") o = cmd_certify(c, e);
        else if (c.command == "tangent") o = cmd_tangent(c, e);
        else if (c.command == "foliate") o = cmd_foliate(c, e);
        else if (c.command == "mingap") o = cmd_mingap(c, e);
        else if (c.command == "density") o = cmd_density(c, e);
        else if (c.command == "monotonicity") o = cmd_monotonicity(c, e);
        else if (c.command == "blowup") o = cmd_blowup(c, e);
        else throw UsageError("unknown command " + c.command);
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& ex) {
        // numeric trouble is a verdict, not a crash
        error = ex.what();
        o = Outcome{};
        o.checks.push_back({"numeric", Verdict::fail});
    }

    json j = envelope(c.command, c.seed);
    j["config"] = config_json(c);
    j["entry"] = to_json(e);
    json checks = json::object();
    for (const auto& [name, v] : o.checks) checks[name] = to_string(v);
    const int code = exit_code(o.checks);
    j["verdict"] = code == ok ? "PASS" : code == failed ? "FAIL" : "INCONCLUSIVE";
    j["checks"] = checks;
    if (!error.empty()) j["error"] = error;
    j["result"] = o.result;

    const auto dir = output_dir(c.out);
    const std::string stem = c.command + "_" + c.corpus;
    write_json(dir / (stem + ".json"), j);
    out << j["verdict"].get<std::string>() << ' ' << c.command << ' ' << c.corpus << " -> "
        << (dir / (stem + ".json")).string() << '\n';
    for (const auto& [suffix, table] : o.tables) {
        auto p = dir / (stem + "_" + suffix + ".csv");
        write_csv(p, CsvTable(table).constant_column("seed", std::to_string(c.seed)));
        out << "  " << p.string() << '\n';
    }
    for (const auto& n : o.notes) out << "  " << n << '\n';
    if (!error.empty()) err << "error: " << error << '\n';
    return code;
}

/// Parses arguments (without the program name) and runs one command.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Visibility, monotonicity and blow-up audits for perimeter minimizers in graph domains", "visilab"};
    app.set_help_flag("--help", "print this help and exit"); // -h would clash with --h
    app.set_version_flag("--version", std::string(schema_version));
    app.require_subcommand(1);
    RunConfig c;

    auto common = [&](CLI::App* s) {
        s->add_option("--corpus", c.corpus, "corpus entry")->required();
        s->add_option("--param", c.params, "override an entry parameter, key=value")->take_all();
        s->add_option("--seed", c.seed, "seed for radius jitter and sampling")->capture_default_str();
        s->add_option("--out", c.out, "output directory (default $VISILAB_OUT or .)");
    };
    auto radius = [&](CLI::App* s) {
        s->add_option("--rmin", c.rmin, "smallest radius");
        s->add_option("--rmax", c.rmax, "largest radius");
        s->add_option("--per-decade", c.per_decade, "radii per decade")->capture_default_str();
    };
    auto* certify = app.add_subcommand("certify", "check (V1)-(V3) for an entry's wall and visibility function");
    common(certify);
    certify->add_option("--scales", c.scales, "visibility scales")->capture_default_str();
    certify->add_option("--directions", c.directions, "directions for three-dimensional domains")->capture_default_str();

    auto* tangent = app.add_subcommand("tangent", "tangent cone of the wall at the origin");
    common(tangent);
    tangent->add_option("--directions", c.directions, "directions for three-dimensional domains")->capture_default_str();

    auto* foliate = app.add_subcommand("foliate", "audit the off-centric foliation");
    common(foliate);
    foliate->add_option("--samples", c.samples, "random points")->capture_default_str();
    foliate->add_option("--power", c.power, "use v = C r^p, given as C,p");
    foliate->add_option("--radius", c.chart_radius, "horizon cap for --power")->capture_default_str();
    foliate->add_option("--tau-root", c.tau_root, "root residual tolerance relative to r^2");

    auto* mingap = app.add_subcommand("mingap", "minimality gap on balls around the origin");
    common(mingap);
    radius(mingap);
    mingap->add_option("--h", c.h, "lattice step")->capture_default_str();

    auto* density = app.add_subcommand("density", "perimeter and volume density slopes at the origin");
    common(density);
    radius(density);
    density->add_option("--h", c.h, "lattice step")->capture_default_str();

    auto* mono = app.add_subcommand("monotonicity", "audit the monotonicity inequality");
    common(mono);
    radius(mono);
    mono->add_option("--h", c.h, "lattice step, or none for the exact polygon")->default_str("none");
    mono->add_option("--tau-audit", c.tau_audit, "slack tolerance override");
    mono->add_option("--tau-root", c.tau_root, "root residual tolerance relative to r^2");

    auto* blowup = app.add_subcommand("blowup", "dyadic blow-up trace");
    common(blowup);
    blowup->add_option("--h", c.h, "lattice step")->capture_default_str();
    blowup->add_option("--R", c.R, "window radius")->capture_default_str();
    blowup->add_option("--jmax", c.jmax, "last dyadic exponent")->capture_default_str();
    blowup->add_flag("--all-gaps", c.all_gaps, "gap at every scale, not only the last");

    auto* corpus = app.add_subcommand("corpus", "list or describe corpus entries");
    corpus->require_subcommand(1);
    auto* list = corpus->add_subcommand("list", "all entries with default parameters");
    auto* dump = corpus->add_subcommand("dump", "one entry");
    dump->add_option("name", c.dump_name, "entry name")->required();
    dump->add_option("--param", c.params, "override an entry parameter, key=value")->take_all();
    dump->add_flag("--polygons", c.with_set, "include the polygon vertices");

    bool mono_h_given = false;
    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
        mono_h_given = mono->count("--h") > 0;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? ok : usage;
    }
    if (mono->parsed() && !mono_h_given) c.h = "none";
    for (auto* s : {certify, tangent, foliate, mingap, density, mono, blowup})
        if (s->parsed()) c.command = s->get_name();
    if (list->parsed()) c.command = "corpus-list";
    if (dump->parsed()) c.command = "corpus-dump";

    try {
        return execute(c, out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return failed;
    }
}

} // namespace visilab::cli
