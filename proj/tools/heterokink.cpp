// heterokink: command-line driver for heteroclinic antikinks of the CCH and HCCH equations.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "heterokink/analysis.hpp"
#include "heterokink/asymptotics.hpp"
#include "heterokink/bvp.hpp"
#include "heterokink/io.hpp"
#include "heterokink/shoot.hpp"
#include "heterokink/systems.hpp"

namespace fs = std::filesystem;
using namespace heterokink;
using ojson = nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct Common {
    std::string kind = "cch";
    ModelKind model() const { return parse_model_kind(kind); }
};

// Numerical failure carrying extra diagnostics for stderr.
struct Diagnostics {
    std::string command;
    ojson extra = ojson::object();
};

ojson complex_json(std::complex<double> z) { return ojson{{"re", z.real()}, {"im", z.imag()}}; }

ojson vector_json(const Eigen::VectorXd& v) {
    ojson a = ojson::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

std::vector<double> log_schedule(double from, double to, int n) {
    if (n < 1) throw ContractViolation("schedule needs at least one point");
    if (!(from > 0.0) || !(to > 0.0)) throw ContractViolation("log-spaced schedule needs positive endpoints");
    std::vector<double> out;
    if (n == 1) return {from};
    for (int i = 0; i < n; ++i) out.push_back(std::exp(std::log(from) + (std::log(to) - std::log(from)) * i / (n - 1)));
    out.front() = from;
    out.back() = to;
    return out;
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << text;
    } else {
        write_atomic(out, text);
    }
}

// ---------------------------------------------------------------------------

int cmd_eig(const Common& c, double A, double delta) {
    const ModelKind kind = c.model();
    const ModelParams params{A, delta};
    ojson j;
    j["schema"] = 1;
    j["kind"] = to_string(kind);
    j["A"] = A;
    j["delta"] = delta;
    auto& eq = j["equilibria"] = ojson::array();
    for (auto sign : {EquilibriumSign::Plus, EquilibriumSign::Minus}) {
        const EquilibriumInfo info = equilibrium_analysis(kind, params, sign);
        ojson e;
        e["sign"] = sign == EquilibriumSign::Plus ? "+" : "-";
        e["point"] = vector_json(info.point);
        e["char_poly"] = info.char_poly;
        auto& ev = e["eigenvalues"] = ojson::array();
        for (auto z : info.eigenvalues) ev.push_back(complex_json(z));
        e["n_unstable"] = info.n_unstable;
        e["n_stable"] = info.n_stable;
        e["n_center"] = info.n_center;
        eq.push_back(e);
    }
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_scan(const Common& c, RunConfig cfg, double delta, const std::string& out, const std::string& distance_out) {
    const ModelKind kind = c.model();
    const ScanResult r = scan(kind, delta, cfg.shoot);
    std::vector<BranchRow> rows;
    for (const auto& p : r.points) rows.push_back(to_row(p));
    if (out.empty()) {
        std::cout << branch_csv(rows);
    } else {
        write_branch(out, kind, Source::Shoot, rows);
    }
    if (!distance_out.empty()) write_atomic(distance_out, distance_csv(r.profile));
    std::cerr << rows.size() << " root(s) at delta = " << delta << '\n';
    return 0;
}

/// Re-locates a stored branch row as a full BranchPoint.
BranchPoint locate_start(ModelKind kind, int k, const BranchRow& row, const ShootConfig& cfg) {
    if (kind == ModelKind::CCH) {
        for (double w : {1e-9, 1e-7, 1e-5}) {
            if (auto p = refine_root(kind, row.delta, k, row.A - w, row.A + w, cfg)) return *p;
        }
    } else {
        const int n = std::max(cfg.angle_samples, 1);
        for (int i = 0; i < n; ++i) {
            auto p = refine_hcch(row.delta, row.A, 2.0 * std::numbers::pi * i / n, cfg);
            if (p && p->k == k) return *p;
        }
    }
    throw NumericalFailure("could not re-locate het_" + std::to_string(k) + " at delta = " + std::to_string(row.delta));
}

BranchPoint fresh_start(ModelKind kind, int k, double delta, const ShootConfig& cfg) {
    for (const auto& p : scan(kind, delta, cfg).points)
        if (p.k == k) return p;
    throw NumericalFailure("no het_" + std::to_string(k) + " root at delta = " + std::to_string(delta) +
                           " in the scan window");
}

int trace_shoot(ModelKind kind, int k, const RunConfig& cfg, std::vector<double> schedule, const std::string& from,
                const std::string& out, Diagnostics& diag) {
    // Resume: rows already present in the output are kept and skipped.
    BranchTable table(kind, k, Source::Shoot);
    if (!out.empty() && fs::exists(out)) table = read_branch(out, kind, k);

    BranchPoint start;
    if (!table.empty()) {
        // Continue from the stored row nearest the first pending delta.
        std::vector<double> pending;
        for (double d : schedule) {
            bool done = false;
            for (const auto& r : table.rows()) done = done || std::abs(r.delta - d) <= 1e-12 * d;
            if (!done) pending.push_back(d);
        }
        if (pending.empty()) {
            std::cerr << "nothing to do: all " << schedule.size() << " deltas present\n";
            return 0;
        }
        const BranchRow* best = &table.rows().front();
        for (const auto& r : table.rows())
            if (std::abs(std::log(r.delta / pending.front())) < std::abs(std::log(best->delta / pending.front())))
                best = &r;
        start = locate_start(kind, k, *best, cfg.shoot);
        schedule = pending;
    } else if (!from.empty()) {
        const BranchFile f = read_branch_file(from, kind);
        const BranchRow* row = nullptr;
        for (const auto& r : f.rows)
            if (r.k == k) row = &r;
        if (!row) throw ContractViolation(from + " has no het_" + std::to_string(k) + " row");
        start = locate_start(kind, k, *row, cfg.shoot);
    } else {
        start = fresh_start(kind, k, schedule.front(), cfg.shoot);
    }

    auto save = [&](const std::vector<BranchPoint>& pts) {
        for (const auto& p : pts) table.add(to_row(p));
        if (out.empty()) {
            std::cout << branch_csv(table);
        } else {
            write_branch(out, table);
        }
    };
    try {
        save(trace_branch(kind, k, start, schedule, cfg.shoot));
    } catch (const BranchLost& e) {
        save(e.partial());
        diag.extra["rows_kept"] = table.size();
        throw;
    }
    return 0;
}

int trace_bvp(ModelKind kind, int k, const RunConfig& cfg, const std::vector<double>& schedule,
              const std::string& out, Diagnostics& diag) {
    ContinuationConfig cont = cfg.cont;
    cont.k = k;
    cont.rescale_L = true;
    const BvpSolution first = solve_het(kind, k, schedule.front(), cfg.bvp);
    std::vector<BvpSolution> sols;
    try {
        sols = continue_in_delta(first, schedule, cfg.bvp, cont);
    } catch (const ContinuationStalled&) {
        diag.extra["rows_kept"] = 0;
        throw;
    }
    BranchTable table = BranchTable::from_solutions(sols, k);
    if (out.empty()) {
        std::cout << branch_csv(table);
    } else {
        write_branch(out, table);
    }
    return 0;
}

/// Half-domain guess [-L, 0] cut from a full or half profile.
MeshFunction left_half(const MeshFunction& m) {
    MeshFunction h;
    for (std::size_t i = 0; i < m.x.size() && m.x[i] < 0.0; ++i) {
        h.x.push_back(m.x[i]);
        h.U.push_back(m.U[i]);
        h.dU.push_back(m.dU[i]);
    }
    h.x.push_back(0.0);
    h.U.push_back(m.value(0.0));
    h.dU.push_back(m.slope(0.0));
    return h;
}

int cmd_bvp(const Common& c, const RunConfig& cfg, int k, double delta, const std::string& guess_file,
            bool auto_guess, const std::string& formulation, std::optional<double> L, std::optional<double> A0,
            const std::string& out, Diagnostics& diag) {
    const ModelKind kind = c.model();
    if (formulation != "half" && formulation != "full")
        throw ContractViolation("--formulation must be half or full");
    if (guess_file.empty() == !auto_guess) throw ContractViolation("pass exactly one of --guess and --auto-guess");
    const bool full = formulation == "full";
    diag.extra["kind"] = to_string(kind);
    diag.extra["k"] = k;
    diag.extra["delta"] = delta;
    diag.extra["formulation"] = formulation;

    BvpSolution sol;
    if (auto_guess) {
        const BvpSolution half = solve_het(kind, k, delta, cfg.bvp, L);
        sol = full ? solve(build_full_problem(kind, delta, reflect(half), half.L, A0.value_or(half.A)), cfg.bvp)
                   : half;
    } else {
        const ProfileFile pf = read_profile(guess_file);
        if (pf.meta.kind != kind) throw MismatchedFamilies("guess file is " + to_string(pf.meta.kind));
        const MeshFunction m = pf.mesh_function();
        const double a0 = A0.value_or(pf.meta.A);
        if (full) {
            const double len = L.value_or(std::min(-m.x.front(), m.x.back()));
            sol = solve(build_full_problem(kind, delta, m, len, a0), cfg.bvp);
        } else {
            if (!(m.x.front() < 0.0)) throw ContractViolation("guess profile must extend to negative x");
            const double len = L.value_or(-m.x.front());
            sol = solve(build_half_problem(kind, delta, len, a0, left_half(m)), cfg.bvp);
        }
    }

    const MeshFunction prof = reflect(sol);
    const int crossings = static_cast<int>(zero_crossings(prof).size());
    if (crossings != 2 * k + 1)
        std::cerr << "warning: profile has " << crossings << " zero crossing(s), het_" << k << " has "
                  << 2 * k + 1 << '\n';
    ProfileFile pf;
    pf.meta = {kind, k, sol.A, delta, sol.L, Source::Bvp, sol.max_residual, tool_version()};
    pf.x = prof.x;
    pf.U = prof.U;
    if (out.empty()) {
        std::cout << profile_csv(pf.x, pf.U);
    } else {
        write_profile(out, pf);
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "A = %.12f  sqrt(A) = %.8f  sigma = %.3e  L = %g  nodes = %zu  residual = %.2e\n",
                  sol.A, std::sqrt(sol.A), sol.sigma, sol.L, prof.x.size(), sol.max_residual);
    std::cerr << buf;
    return 0;
}

int cmd_asym(const Common& c, int k, const std::vector<double>& deltas, const std::string& out) {
    const ModelKind kind = c.model();
    std::vector<AsymptoticPrediction> rows;
    for (double d : deltas) {
        if (!(d >= 0.0)) throw ContractViolation("delta must be nonnegative");
        rows.push_back(predict(kind, k, d));
    }
    emit(prediction_csv(rows), out);
    return 0;
}

BranchTable load_table(const std::string& file, const std::optional<std::string>& kind, std::optional<int> k,
                       const RunConfig& cfg) {
    std::optional<ModelKind> mk;
    if (kind) mk = parse_model_kind(*kind);
    return read_branch(file, mk, k).subset(cfg.fit_delta_min, cfg.fit_delta_max);
}

int cmd_fit(const BranchTable& t, const std::string& model, const std::string& json_out) {
    Report rep;
    rep.kind = t.kind();
    rep.k = t.k();
    rep.provenance = A_law_provenance(t.kind(), t.k());
    const bool want_A = model == "auto" || model == "linear" || model == "cube";
    if (model != "auto" && model != "linear" && model != "cube" && model != "log")
        throw ContractViolation("--model must be auto, linear, log or cube");
    if (want_A) {
        const bool cube = model == "cube" || (model == "auto" && t.kind() == ModelKind::HCCH);
        rep.fits.push_back(cube ? fit_cube_root_A(t) : fit_linear_A(t));
    }
    if (model == "log" || (model == "auto" && t.k() > 0)) rep.fits.push_back(fit_log_width(t));
    std::cout << rep.to_text();
    if (!json_out.empty()) write_atomic(json_out, rep.to_json().dump(2) + "\n");
    return 0;
}

int cmd_compare(const BranchTable& t, const std::string& json_out) {
    std::vector<AsymptoticPrediction> preds;
    for (const auto& r : t.rows()) preds.push_back(predict(t.kind(), t.k(), r.delta));
    const Report rep = compare_report(t, preds);
    std::cout << rep.to_text();
    if (!json_out.empty()) write_atomic(json_out, rep.to_json().dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heteroclinic antikinks of the stationary CCH and HCCH equations"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version());

    Diagnostics diag;
    RunConfig cfg;
    try {
        cfg = load_run_config();
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    }

    Common common;
    auto add_kind = [&](CLI::App* sub) {
        sub->add_option("--kind", common.kind, "cch or hcch")->check(CLI::IsMember({"cch", "hcch"}))->required();
    };

    // eig
    double A = 1.0, delta = 0.0;
    auto* eig = app.add_subcommand("eig", "eigenvalues at both equilibria (JSON)");
    add_kind(eig);
    eig->add_option("--A", A)->required();
    eig->add_option("--delta", delta)->required();

    // scan
    std::string out, distance_out;
    auto* sc = app.add_subcommand("scan", "scan the distance function over A and refine roots");
    add_kind(sc);
    sc->add_option("--delta", delta)->required();
    sc->add_option("--a-min", cfg.shoot.a_min);
    sc->add_option("--a-max", cfg.shoot.a_max);
    sc->add_option("--a-step", cfg.shoot.a_step);
    sc->add_option("--threads", cfg.shoot.threads);
    sc->add_option("--out,-o", out, "branch CSV (stdout when omitted)");
    sc->add_option("--distance-out", distance_out, "sampled distance function CSV");

    // trace
    int k = 1;
    double d_from = 2e-2, d_to = 1e-4;
    int n_points = 10;
    std::vector<double> deltas;
    std::string from, method = "shoot";
    auto* tr = app.add_subcommand("trace", "follow one het_k branch in delta");
    add_kind(tr);
    tr->add_option("--k", k)->required()->check(CLI::NonNegativeNumber);
    tr->add_option("--delta-from", d_from, "first delta of a log-spaced schedule");
    tr->add_option("--delta-to", d_to, "last delta");
    tr->add_option("--points", n_points);
    tr->add_option("--deltas", deltas, "explicit schedule (overrides the log-spaced one)")->delimiter(',');
    tr->add_option("--from", from, "start from a row of this branch file");
    tr->add_option("--method", method)->check(CLI::IsMember({"shoot", "bvp"}));
    tr->add_option("--out,-o", out, "branch CSV; rows already there are kept");

    // bvp
    std::string guess, formulation = "half";
    bool auto_guess = false;
    std::optional<double> L, A0;
    auto* bvp = app.add_subcommand("bvp", "solve the boundary value problem for het_k");
    add_kind(bvp);
    bvp->add_option("--k", k)->required()->check(CLI::NonNegativeNumber);
    bvp->add_option("--delta", delta)->required();
    bvp->add_option("--guess", guess, "profile CSV with sidecar");
    bvp->add_flag("--auto-guess", auto_guess, "seed from the asymptotic laws");
    bvp->add_option("--formulation", formulation)->check(CLI::IsMember({"half", "full"}));
    bvp->add_option("--L", L, "domain half-length");
    bvp->add_option("--A0", A0, "starting A");
    bvp->add_option("--mesh-tol", cfg.bvp.mesh_tol);
    bvp->add_option("--out,-o", out, "profile CSV (stdout when omitted)");

    // asym
    auto* as = app.add_subcommand("asym", "asymptotic predictions");
    add_kind(as);
    as->add_option("--k", k)->required()->check(CLI::NonNegativeNumber);
    as->add_option("--deltas", deltas)->required()->delimiter(',');
    as->add_option("--out,-o", out);

    // fit / compare
    std::string branch, model = "auto", json_out;
    std::optional<std::string> kind_opt;
    std::optional<int> k_opt;
    auto add_table = [&](CLI::App* sub) {
        sub->add_option("branch", branch, "branch CSV")->required();
        sub->add_option("--kind", kind_opt, "needed when the file has no sidecar")
            ->check(CLI::IsMember({"cch", "hcch"}));
        sub->add_option("--k", k_opt, "family to use from a mixed file");
        sub->add_option("--delta-min", cfg.fit_delta_min);
        sub->add_option("--delta-max", cfg.fit_delta_max);
        sub->add_option("--json", json_out, "write the report as JSON");
    };
    auto* fit = app.add_subcommand("fit", "least-squares fits of a branch");
    add_table(fit);
    fit->add_option("--model", model)->check(CLI::IsMember({"auto", "linear", "log", "cube"}));
    auto* cmp = app.add_subcommand("compare", "numerics against the asymptotic laws");
    add_table(cmp);

    // config
    auto* conf = app.add_subcommand("config", "print the effective configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*eig) return cmd_eig(common, A, delta);
        if (*conf) {
            std::cout << cfg.dump();
            return 0;
        }
        cfg.shoot.validate();
        cfg.bvp.validate();
        if (*sc) {
            diag.command = "scan";
            return cmd_scan(common, cfg, delta, out, distance_out);
        }
        if (*tr) {
            diag.command = "trace";
            const auto schedule = deltas.empty() ? log_schedule(d_from, d_to, n_points) : deltas;
            if (method == "bvp") return trace_bvp(common.model(), k, cfg, schedule, out, diag);
            return trace_shoot(common.model(), k, cfg, schedule, from, out, diag);
        }
        if (*bvp) {
            diag.command = "bvp";
            return cmd_bvp(common, cfg, k, delta, guess, auto_guess, formulation, L, A0, out, diag);
        }
        if (*as) return cmd_asym(common, k, deltas, out);
        if (*fit) return cmd_fit(load_table(branch, kind_opt, k_opt, cfg), model, json_out);
        if (*cmp) return cmd_compare(load_table(branch, kind_opt, k_opt, cfg), json_out);
    } catch (const NumericalFailure& e) {
        ojson d;
        d["error"] = "numerical_failure";
        d["command"] = diag.command;
        d["message"] = e.what();
        for (auto& [key, v] : diag.extra.items()) d[key] = v;
        std::cerr << d.dump(2) << '\n';
        return kExitNumerical;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
