#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "plapvar/conditions.hpp"
#include "plapvar/config.hpp"
#include "plapvar/eigen.hpp"
#include "plapvar/nonlinearity.hpp"
#include "plapvar/solver.hpp"

namespace plapvar {

/// Exit codes of run().
enum class RunStatus { ok = 0, error = 1, inconclusive = 2 };

inline MeshPtr build_mesh(const ExperimentConfig &c) {
    const auto &b = c.bounds;
    if (c.domain == "rectangle") return build_rectangle_mesh(b[0], b[1], b[2], b[3], c.cells[0], c.cells[1]);
    return build_interval_mesh(b[0], b[1], c.cells[0]);
}

/// Weight backed by a config expression; constant when it ignores x and y.
inline Weight make_weight(const Expression &e, double exponent, double lambda1, double p) {
    Weight w;
    w.eval = [e, lambda1, p](const Point &x) { return e(ExprScope{x[0], x[1], lambda1, p}); };
    w.exponent = exponent;
    w.label = e.text();
    w.constant = !e.uses("x") && !e.uses("y");
    return w;
}

inline ComparisonFunction make_comparison(const ExperimentConfig &c) {
    return c.phi == "power_log" ? ComparisonFunction::power_log(c.alpha) : ComparisonFunction::power(c.alpha);
}

inline NonlinearitySpec build_spec(const ExperimentConfig &c, double lambda1) {
    const double p = c.p;
    const std::string &n = c.nonlinearity;
    if (n == "zero") return catalog::zero();
    if (n == "paper_example") return catalog::paper_example(make_weight(c.d, c.d_exponent, lambda1, p));
    if (n == "power_perturbation") return catalog::power_perturbation(lambda1, c.beta, p);
    if (n == "power_law") return catalog::power_law(c.mu(ExprScope{0.0, 0.0, lambda1, p}), p);
    if (n == "eta_phi")
        return catalog::eta_phi(make_weight(c.eta, c.eta_exponent, lambda1, p), make_comparison(c), lambda1, p);
    if (n == "eta_linear") return catalog::eta_linear(make_weight(c.eta, c.eta_exponent, lambda1, p), lambda1, p);
    if (n == "example4")
        return catalog::example4(make_weight(c.a, std::numeric_limits<double>::infinity(), lambda1, p),
                                 make_comparison(c), lambda1, p);
    throw Error("cli", "build_spec", "unknown nonlinearity '" + n + "'");
}

inline DualVector build_h(const ExperimentConfig &c, const MeshPtr &mesh, const EigenResult &eig) {
    if (c.h == "density") {
        const Expression e = c.h_density;
        const double l = eig.lambda1, p = c.p;
        return load_vector(mesh, [&](const Point &x) { return e(ExprScope{x[0], x[1], l, p}); });
    }
    if (c.h == "phi1") {
        DualVector h = load_vector(mesh, eig.phi1);
        h *= c.h_scale;
        return h;
    }
    return DualVector(mesh);
}

namespace detail {

inline std::string g17(double v) { return ExtendedReal(v).str(); }

/// Structured text report: `[section]` headers followed by `key = value`.
class Report {
public:
    void section(const std::string &name) { text_ += (text_.empty() ? "[" : "\n[") + name + "]\n"; }
    void kv(const std::string &k, const std::string &v) { text_ += k + " = " + v + "\n"; }
    void kv(const std::string &k, double v) { kv(k, g17(v)); }
    void kv(const std::string &k, bool v) { kv(k, std::string(v ? "true" : "false")); }
    void kv(const std::string &k, int v) { kv(k, std::to_string(v)); }
    void kv(const std::string &k, std::size_t v) { kv(k, std::to_string(v)); }
    const std::string &text() const { return text_; }

private:
    std::string text_;
};

inline void write_file(const std::filesystem::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cli", "run", "cannot write " + path.string());
    out << text;
    if (!out) throw Error("cli", "run", "write failed for " + path.string());
}

/// Nodal table x[,y],u over every vertex, boundary zeros included.
inline std::string field_csv(const DiscreteField &u) {
    const Mesh &m = *u.mesh();
    const bool two_d = m.dimension() == 2;
    std::string out = two_d ? "x,y,u\n" : "x,u\n";
    const auto nodal = u.nodal();
    for (std::size_t v = 0; v < m.vertex_count(); ++v) {
        out += g17(m.vertex(v)[0]) + ",";
        if (two_d) out += g17(m.vertex(v)[1]) + ",";
        out += g17(nodal[v]) + "\n";
    }
    return out;
}

inline std::string residual_csv(const Mesh &m, const ResidualReport &r) {
    const bool two_d = m.dimension() == 2;
    std::string out = two_d ? "index,x,y,residual\n" : "index,x,residual\n";
    for (std::size_t j = 0; j < r.residuals.size(); ++j) {
        const Point &x = m.vertex(m.free_vertex(j));
        out += std::to_string(j) + "," + g17(x[0]) + ",";
        if (two_d) out += g17(x[1]) + ",";
        out += g17(r.residuals[j]) + "\n";
    }
    return out;
}

/// CSV field: quoted when it contains a separator or quote.
inline std::string csv_field(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

/// Verdict rows; only decisive rows (theorem overall, standalone checks)
/// make the run inconclusive. An undecided hypothesis next to a failed one
/// leaves the theorem's verdict settled.
class VerdictTable {
public:
    void add(const std::string &group, const std::string &check, Verdict v, bool decisive = true) {
        rows_ += csv_field(group) + "," + csv_field(check) + "," + to_string(v) + "\n";
        if (decisive && v == Verdict::inconclusive) inconclusive_ = true;
    }
    void add(const HypothesisReport &r, const std::string &prefix = "") {
        for (const auto &c : r.checks) add(prefix + r.theorem, c.name, c.verdict, false);
        add(prefix + r.theorem, "overall", r.overall);
    }
    bool empty() const { return rows_.empty(); }
    bool inconclusive() const { return inconclusive_; }
    std::string csv() const { return "group,check,verdict\n" + rows_; }

private:
    std::string rows_;
    bool inconclusive_ = false;
};

inline void report_theorem(Report &rep, const HypothesisReport &r, const std::string &prefix = "") {
    const std::string t = prefix + r.theorem;
    rep.kv(t + ".overall", std::string(to_string(r.overall)));
    for (const auto &c : r.checks) {
        rep.kv(t + "." + c.name, std::string(to_string(c.verdict)));
        for (const auto &[k, v] : c.evidence) rep.kv(t + "." + c.name + "." + k, v);
    }
}

inline void report_scalar(Report &rep, const std::string &name, const ScalarCheck &s) {
    rep.kv(name, std::string(to_string(s.verdict)));
    rep.kv(name + ".limsup_plus", s.plus.value.str());
    rep.kv(name + ".limsup_minus", s.minus.value.str());
    rep.kv(name + ".converged_plus", s.plus.converged);
    rep.kv(name + ".converged_minus", s.minus.converged);
}

/// At most `cap` quadrature points, evenly strided.
inline std::vector<Point> sample_points(const Mesh &m, std::size_t cap = 64) {
    const auto q = m.quadrature();
    const std::size_t stride = std::max<std::size_t>(1, q.size() / cap);
    std::vector<Point> xs;
    for (std::size_t i = 0; i < q.size(); i += stride) xs.push_back(q[i].x);
    return xs;
}

}  // namespace detail

/// Executes the configured pipeline and writes manifest.txt, report.txt and
/// the CSV tables into the output directory. Progress lines go to `log`
/// when it is non-null. Errors propagate as exceptions; the return value
/// distinguishes success from inconclusive verdicts.
inline RunStatus run(ExperimentConfig c, std::ostream *log = nullptr) {
    namespace fs = std::filesystem;
    const fs::path dir(c.output);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cli", "run", "cannot create output directory " + dir.string() + ": " + ec.message());

    c.resolved["output"] = c.output;
    c.resolved["seed"] = std::to_string(c.seed);
    c.eigen.seed = c.seed;
    c.solve.seed = c.seed;
    std::string manifest;
    for (const auto &[k, v] : c.resolved) manifest += k + " = " + v + "\n";
    detail::write_file(dir / "manifest.txt", manifest);

    auto say = [&](const std::string &s) {
        if (log) *log << s << "\n";
    };
    const std::string &pl = c.pipeline;
    const bool all = pl == "all";
    const MeshPtr mesh = build_mesh(c);
    detail::Report rep;
    detail::VerdictTable verdicts;
    bool undecided = false;

    rep.section("run");
    rep.kv("pipeline", pl);
    rep.kv("domain", c.domain);
    rep.kv("p", c.p);
    rep.kv("vertices", mesh->vertex_count());
    rep.kv("elements", mesh->element_count());

    say("eigen: computing first eigenpair");
    const EigenResult eig = first_eigenpair(mesh, c.p, c.eigen);
    rep.section("eigen");
    rep.kv("lambda1", eig.lambda1);
    rep.kv("iterations", eig.iterations);
    rep.kv("residual", eig.residual);
    rep.kv("stop_reason", eig.stop_reason);
    say("eigen: lambda1 = " + detail::g17(eig.lambda1));
    if (pl == "eigen" || all) detail::write_file(dir / "eigenfunction.csv", detail::field_csv(eig.phi1));

    if (pl == "solve" || pl == "conditions" || all) {
        const NonlinearitySpec spec = build_spec(c, eig.lambda1);
        const DualVector h = build_h(c, mesh, eig);
        rep.section("nonlinearity");
        rep.kv("name", spec.name);
        rep.kv("autonomous", spec.autonomous);
        for (const auto &[k, v] : spec.parameters) rep.kv("param." + k, v);
        rep.kv("h", c.h);

        if (pl == "solve" || all) {
            say("solve: minimizing Phi");
            const SolveResult sol = minimize_phi(mesh, spec, h, c.p, c.solve);
            const ResidualReport res = verify_weak_solution(mesh, sol.u, spec, h, c.p, c.truncation);
            rep.section("solve");
            rep.kv("converged", sol.converged);
            rep.kv("stop_reason", sol.stop_reason);
            rep.kv("phi", sol.phi_value.str());
            rep.kv("stationarity", sol.stationarity);
            rep.kv("iterations", sol.iterations);
            rep.kv("function_evaluations", sol.function_evaluations);
            rep.kv("starts", sol.starts);
            rep.kv("minimizer", std::string(sol.starts > 1 ? "best found" : "local"));
            rep.kv("max_abs_u", sol.u.max_abs());
            rep.section("residual");
            rep.kv("R", res.R);
            rep.kv("basis_size", res.basis_size);
            rep.kv("max_abs", res.max_abs);
            rep.kv("max_scaled", res.max_scaled);
            rep.kv("max_relative", res.max_relative);
            rep.kv("lambda_u", res.lambda_u);
            detail::write_file(dir / "solution.csv", detail::field_csv(sol.u));
            detail::write_file(dir / "residuals.csv", detail::residual_csv(*mesh, res));
            if (!sol.converged) undecided = true;
            say(std::string("solve: converged = ") + (sol.converged ? "true" : "false"));
        }

        if (pl == "conditions" || all) {
            say("conditions: checking hypotheses");
            TheoremOptions opts;
            opts.grid = c.limsup;
            opts.f0_radii = c.f0_radii;
            opts.f0 = detail::f0_check(spec, mesh, opts);
            rep.section("conditions");
            const GrowthReport gr = check_growth(spec, c.growth_q, detail::sample_points(*mesh));
            rep.kv("growth", std::string(to_string(gr.verdict)));
            rep.kv("growth.q", gr.q);
            rep.kv("growth.a", gr.a);
            rep.kv("growth.b", gr.b);
            verdicts.add("growth", "q=" + detail::g17(c.growth_q), gr.verdict);
            for (const auto &[k, v] : opts.f0->evidence) rep.kv("f0." + k, v);
            rep.kv("f0", std::string(to_string(opts.f0->verdict)));
            verdicts.add("f0", "all_radii", opts.f0->verdict);

            const ComparisonFunction phi = make_comparison(c);
            const auto cmp = verify_comparison_function(phi, c.p, c.seed);
            rep.kv("comparison." + phi.name, std::string(to_string(cmp.overall)));
            for (const auto &[k, v] : cmp.evidence) rep.kv("comparison." + k, v);
            verdicts.add("comparison", phi.name, cmp.overall);

            const auto g1 = check_theorem_G1(spec, eig, mesh, c.p, opts);
            const auto g2 = check_theorem_G2(spec, eig, mesh, c.p, phi, opts);
            const auto g3 = check_theorem_G3(spec, eig, h, mesh, c.p, opts);
            for (const auto *r : {&g1, &g2, &g3}) {
                detail::report_theorem(rep, *r);
                verdicts.add(*r);
            }
            if (spec.autonomous) {
                const ScalarCheck g0 = check_G0(spec, eig.lambda1, c.p, c.limsup);
                const ScalarCheck fc = check_F_coercivity(spec, eig.lambda1, c.p, c.limsup);
                detail::report_scalar(rep, "G0", g0);
                detail::report_scalar(rep, "F", fc);
                verdicts.add("G0", "overall", g0.verdict);
                verdicts.add("F", "overall", fc.verdict);
            }
        }
    }

    if (pl == "incomparability" || all) {
        say("incomparability: running examples 2-4");
        TheoremOptions opts;
        opts.grid = c.limsup;
        opts.f0_radii = c.f0_radii;
        const IncomparabilityTable t = incomparability_suite(c.p, mesh, eig, opts);
        rep.section("incomparability");
        rep.kv("alpha", t.alpha);
        rep.kv("diagonal", t.diagonal());
        std::string csv = "example,G1,G2,G3\n";
        for (const auto &row : t.rows) {
            csv += row.example + "," + to_string(row.g1.overall) + "," + to_string(row.g2.overall) + "," +
                   to_string(row.g3.overall) + "\n";
            for (const auto *r : {&row.g1, &row.g2, &row.g3}) {
                detail::report_theorem(rep, *r, row.example + ".");
                verdicts.add(*r, row.example + ".");
            }
        }
        detail::write_file(dir / "incomparability.csv", csv);
    }

    if (!verdicts.empty()) detail::write_file(dir / "verdicts.csv", verdicts.csv());
    const RunStatus status = undecided || verdicts.inconclusive() ? RunStatus::inconclusive : RunStatus::ok;
    rep.section("status");
    rep.kv("exit_code", static_cast<int>(status));
    detail::write_file(dir / "report.txt", rep.text());
    return status;
}

}  // namespace plapvar
