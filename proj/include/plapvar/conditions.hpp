#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "plapvar/eigen.hpp"
#include "plapvar/error.hpp"
#include "plapvar/extended_real.hpp"
#include "plapvar/fem.hpp"
#include "plapvar/field.hpp"
#include "plapvar/limsup.hpp"
#include "plapvar/mesh.hpp"
#include "plapvar/nonlinearity.hpp"
#include "plapvar/parallel.hpp"
#include "plapvar/weights.hpp"

namespace plapvar {

enum class Verdict { holds, fails, inconclusive };

inline const char *to_string(Verdict v) {
    switch (v) {
        case Verdict::holds: return "holds";
        case Verdict::fails: return "fails";
        default: return "inconclusive";
    }
}

/// Conjunction: fails beats inconclusive beats holds.
inline Verdict all_of(std::initializer_list<Verdict> vs) {
    Verdict out = Verdict::holds;
    for (Verdict v : vs) {
        if (v == Verdict::fails) return Verdict::fails;
        if (v == Verdict::inconclusive) out = Verdict::inconclusive;
    }
    return out;
}

using Evidence = std::vector<std::pair<std::string, std::string>>;

inline std::string num(double v) { return ExtendedReal(v).str(); }

struct HypothesisCheck {
    std::string name;
    Verdict verdict = Verdict::inconclusive;
    Evidence evidence;
};

/// Verdicts of every hypothesis of one theorem; overall holds only when all
/// of them hold.
struct HypothesisReport {
    std::string theorem;
    Verdict overall = Verdict::inconclusive;
    std::vector<HypothesisCheck> checks;

    const HypothesisCheck &check(const std::string &name) const {
        for (const auto &c : checks)
            if (c.name == name) return c;
        throw Error("conditions", "HypothesisReport", "no check named " + name);
    }

    void finish() {
        overall = Verdict::holds;
        for (const auto &c : checks) overall = all_of({overall, c.verdict});
    }
};

// ---------------------------------------------------------------- growth

struct GrowthReport {
    Verdict verdict = Verdict::inconclusive;
    double q = 0.0;
    /// Smallest a with |f| <= a |s|^{q-1} on the samples with |s| >= 1.
    double a = 0.0;
    /// Largest |f| on the samples with |s| <= 1.
    double b = 0.0;
    double ratio_small = 0.0;
    double ratio_large = 0.0;
};

/// Tests |f(x,s)| <= a|s|^{q-1} + b(x) on s = +-2^k, k = 0..10, and the
/// given x. Fails when max_x |f| / (|s|^{q-1} + 1) at the largest |s| exceeds
/// 1e6 times its value at |s| = 1 (or f overflows).
inline GrowthReport check_growth(const NonlinearitySpec &spec, double q, const std::vector<Point> &xs) {
    if (!(q > 1.0)) throw Error("conditions", "check_growth", "q must exceed 1");
    if (xs.empty()) throw Error("conditions", "check_growth", "no sample points");
    GrowthReport out;
    out.q = q;
    auto max_abs_f = [&](double s) {
        double m = 0.0;
        for (const auto &x : xs) {
            const double v = spec.f(x, s);
            if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
            m = std::max(m, std::abs(v));
        }
        return m;
    };
    for (int j = 0; j <= 16; ++j) {
        const double s = j / 16.0;
        out.b = std::max({out.b, max_abs_f(s), max_abs_f(-s)});
    }
    constexpr int kmax = 10;
    for (int k = 0; k <= kmax; ++k) {
        const double s = std::ldexp(1.0, k);
        const double m = std::max(max_abs_f(s), max_abs_f(-s));
        const double pw = std::pow(s, q - 1.0);
        out.a = std::max(out.a, m / pw);
        const double ratio = m / (pw + 1.0);
        if (k == 0) out.ratio_small = ratio;
        if (k == kmax) out.ratio_large = ratio;
    }
    const bool unbounded = !std::isfinite(out.ratio_large) || out.ratio_large > 1e6 * out.ratio_small;
    out.verdict = unbounded ? Verdict::fails : Verdict::holds;
    return out;
}

// ---------------------------------------------------------------- (f0)

struct F0Report {
    Verdict verdict = Verdict::inconclusive;
    double R = 0.0;
    /// Integral of sup_{|s|<=R} |f(x,s)| on the mesh and two refinements.
    std::vector<double> levels;
    double value = 0.0;
};

namespace detail {

inline std::vector<double> s_grid(double R, int points = 2001) {
    std::vector<double> s(points);
    for (int i = 0; i < points; ++i) s[i] = -R + 2.0 * R * i / (points - 1);
    return s;
}

inline double sup_abs_f(const NonlinearitySpec &spec, const Point &x, const std::vector<double> &ss) {
    double m = 0.0;
    for (double s : ss) {
        const double v = spec.f(x, s);
        if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
        m = std::max(m, std::abs(v));
    }
    return m;
}

inline double integrate_envelope(const NonlinearitySpec &spec, const Mesh &mesh, const std::vector<double> &ss,
                                 std::optional<double> constant) {
    const auto quad = mesh.quadrature();
    std::vector<double> vals(quad.size());
    if (constant) {
        std::fill(vals.begin(), vals.end(), *constant);
    } else {
        parallel_for(quad.size(), [&](std::size_t q) { vals[q] = sup_abs_f(spec, quad[q].x, ss); }, 16);
    }
    double sum = 0.0;
    for (std::size_t q = 0; q < quad.size(); ++q) sum += quad[q].weight * vals[q];
    return sum;
}

}  // namespace detail

namespace detail {

// Three nested meshes ending at the given one (cells n/4, n/2, n) when the
// cell counts allow it, else the mesh and two refinements of it.
inline std::vector<MeshPtr> nested_levels(const MeshPtr &mesh) {
    const auto &g = mesh->grid();
    const bool two_d = mesh->dimension() == 2;
    auto coarsenable = [](int n) { return n % 4 == 0 && n / 4 >= 2; };
    if (coarsenable(g.cells[0]) && (!two_d || coarsenable(g.cells[1]))) {
        auto make = [&](int div) {
            return two_d ? build_rectangle_mesh(g.bounds[0], g.bounds[1], g.bounds[2], g.bounds[3],
                                                g.cells[0] / div, g.cells[1] / div)
                         : build_interval_mesh(g.bounds[0], g.bounds[1], g.cells[0] / div);
        };
        return {make(4), make(2), mesh};
    }
    auto r1 = refine(*mesh);
    return {mesh, r1, refine(*r1)};
}

}  // namespace detail

/// Integral over the domain of sup_{|s|<=R} |f(x,s)|, the sup taken on 2001
/// equispaced s. Holds when the value is finite and settles across three
/// nested meshes (the second increment at most 0.85 of the first, or
/// negligible); a steady or growing increment marks a divergent integral.
inline F0Report check_f0(const NonlinearitySpec &spec, double R, const MeshPtr &mesh) {
    if (!(R > 0.0)) throw Error("conditions", "check_f0", "R must be positive");
    F0Report out;
    out.R = R;
    const auto ss = detail::s_grid(R);
    std::optional<double> constant;
    if (spec.autonomous) constant = detail::sup_abs_f(spec, Point{0.0, 0.0}, ss);
    for (const auto &m : detail::nested_levels(mesh)) out.levels.push_back(detail::integrate_envelope(spec, *m, ss, constant));
    out.value = out.levels.back();
    if (!std::isfinite(out.value) || std::abs(out.value) > detail::sentinel_threshold) {
        out.verdict = Verdict::fails;
        return out;
    }
    const double d1 = std::abs(out.levels[1] - out.levels[0]);
    const double d2 = std::abs(out.levels[2] - out.levels[1]);
    const bool settles = d2 <= 0.85 * d1 || d2 <= 1e-9 * std::max(1.0, std::abs(out.value));
    out.verdict = settles ? Verdict::holds : Verdict::fails;
    return out;
}

// ---------------------------------------------------------------- comparison functions

struct ComparisonReport {
    Verdict even = Verdict::inconclusive;
    Verdict nonnegative = Verdict::inconclusive;
    Verdict sub_p = Verdict::inconclusive;       // (i)
    Verdict super_linear = Verdict::inconclusive;  // (ii)
    Verdict homogeneous = Verdict::inconclusive;   // (iii)
    Verdict dominated = Verdict::inconclusive;     // (iv)
    Verdict overall = Verdict::inconclusive;
    Evidence evidence;
};

namespace detail {

// Largest k keeping |2^k|^p well inside double range.
inline int safe_k(double p, int K) { return std::max(8, std::min(K, static_cast<int>(900.0 / std::max(p, 1.0)))); }

// Ratio that tends to 0 (verdict holds) or stays away from it.
inline Verdict vanishes(const std::vector<double> &r) {
    const double first = r[r.size() / 2], last = r.back();
    if (last <= 1e-6) return Verdict::holds;
    const bool decreasing = std::is_sorted(r.rbegin(), r.rbegin() + static_cast<long>(r.size() / 2));
    return decreasing && first >= 1.5 * last ? Verdict::holds : Verdict::fails;
}

inline Verdict blows_up(const std::vector<double> &r) {
    const double first = r[r.size() / 2], last = r.back();
    if (last > sentinel_threshold) return Verdict::holds;
    const bool increasing = std::is_sorted(r.begin() + static_cast<long>(r.size() / 2), r.end());
    return increasing && last >= 1.5 * first ? Verdict::holds : Verdict::fails;
}

}  // namespace detail

/// Checks the comparison-function axioms for phi against p on geometric
/// grids: (i) phi/|s|^p -> 0, (ii) phi/|s| -> inf, (iii) phi(r t)/phi(t) ->
/// r^alpha for random r in [0.1, 10], (iv) phi(ts)/phi(t) <= a s^beta + b
/// for t in [10, 1e6] at beta = alpha + 0.5, with a stable fitted a.
inline ComparisonReport verify_comparison_function(const ComparisonFunction &phi, double p,
                                                   std::uint64_t seed = 0) {
    if (!(p > 1.0)) throw Error("conditions", "verify_comparison_function", "p must exceed 1");
    ComparisonReport out;
    const double alpha = phi.order;
    const int K = detail::safe_k(std::max(p, alpha), 200);

    bool even = true, nonneg = true;
    for (int k = -20; k <= K; ++k) {
        for (double m : {1.0, 1.37, 3.1}) {
            const double s = m * std::ldexp(1.0, k);
            const double a = phi(s), b = phi(-s);
            if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a))) even = false;
            if (!(a >= 0.0)) nonneg = false;
        }
    }
    out.even = even ? Verdict::holds : Verdict::fails;
    out.nonnegative = nonneg ? Verdict::holds : Verdict::fails;

    std::vector<double> r1, r2;
    for (int k = 0; k <= K; ++k) {
        const double s = std::ldexp(1.0, k);
        r1.push_back(phi(s) / std::pow(s, p));
        r2.push_back(phi(s) / s);
    }
    out.sub_p = detail::vanishes(r1);
    out.super_linear = detail::blows_up(r2);
    out.evidence.push_back({"phi_over_s_p_at_2^K", num(r1.back())});
    out.evidence.push_back({"phi_over_s_at_2^K", num(r2.back())});

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.1, 10.0);
    bool homog = true;
    double worst = 0.0;
    for (int trial = 0; trial < 8; ++trial) {
        const double r = unif(rng);
        double prev = std::numeric_limits<double>::infinity();
        for (int k = K / 4; k <= K; k += K / 4) {
            const double t = std::ldexp(1.0, k);
            const double err = std::abs(phi(r * t) / phi(t) / std::pow(r, alpha) - 1.0);
            if (err > prev * (1.0 + 1e-9) + 1e-12) homog = false;
            prev = err;
        }
        worst = std::max(worst, prev);
    }
    if (worst >= 0.05) homog = false;
    out.homogeneous = homog ? Verdict::holds : Verdict::fails;
    out.evidence.push_back({"homogeneity_rel_error", num(worst)});

    const double beta = alpha + 0.5;
    auto fit_a = [&](double s_max) {
        double a = 0.0;
        for (double t = 10.0; t <= 1e6 * 1.0001; t *= std::pow(10.0, 0.25))
            for (double s = 1.0; s <= s_max * 1.0001; s *= std::pow(10.0, 0.125))
                a = std::max(a, phi(t * s) / phi(t) / std::pow(s, beta));
        return a;
    };
    double b = 0.0;
    for (double t = 10.0; t <= 1e6 * 1.0001; t *= std::pow(10.0, 0.25))
        for (int j = 0; j <= 64; ++j) b = std::max(b, phi(t * j / 64.0) / phi(t));
    const double a3 = fit_a(1e3), a6 = fit_a(1e6);
    out.dominated = std::isfinite(a6) && std::isfinite(b) && a6 <= 2.0 * a3 ? Verdict::holds : Verdict::fails;
    out.evidence.push_back({"domination_a", num(a6)});
    out.evidence.push_back({"domination_b", num(b)});

    out.overall =
        all_of({out.even, out.nonnegative, out.sub_p, out.super_linear, out.homogeneous, out.dominated});
    return out;
}

// ---------------------------------------------------------------- X_alpha / Y_alpha

enum class WeightClass { X, Y };

struct ClassReport {
    Verdict verdict = Verdict::inconclusive;
    /// Smallest admissible exponent: (p*/alpha)' for p < N, 1 otherwise.
    double threshold = 1.0;
};

/// Membership of a weight declared in L^q in X_alpha or Y_alpha, from
/// exponent arithmetic alone. q may be +inf; an absent q is inconclusive.
inline ClassReport check_class_membership(std::optional<double> q, double alpha, double p, int N, WeightClass kind) {
    if (!(p > 1.0)) throw Error("conditions", "check_class_membership", "p must exceed 1");
    if (N < 1) throw Error("conditions", "check_class_membership", "dimension must be positive");
    ClassReport out;
    bool strict = false;
    if (p > N) {
        out.threshold = 1.0;
    } else if (p == N) {
        out.threshold = 1.0;
        strict = true;
    } else {
        const double pstar = N * p / (N - p);
        const double m = pstar / alpha;
        out.threshold = m / (m - 1.0);
        strict = kind == WeightClass::X;
    }
    if (!q) return out;
    const double t = out.threshold;
    const bool ok = strict ? *q > t * (1.0 + 1e-12) : *q >= t * (1.0 - 1e-12);
    out.verdict = ok ? Verdict::holds : Verdict::fails;
    return out;
}

// ---------------------------------------------------------------- theorem hypotheses

struct TheoremOptions {
    LimsupGrid grid{1.0, 200};
    std::vector<double> f0_radii{1.0, 10.0};
    /// Positive measure: weight fraction above this.
    double measure_fraction = 1e-6;
    double bound_slack = 1e-6;
    double strict_margin = 1e-9;
    /// Precomputed (f0) verdict; computed on demand when empty.
    std::optional<HypothesisCheck> f0;
};

/// Per-quadrature-point limsup estimates of G(x,s)/phi(s) in both
/// directions.
struct PointwiseLimsups {
    std::vector<LimsupEstimate> plus, minus;
};

namespace detail {

inline PointwiseLimsups pointwise_limsups(const NonlinearitySpec &spec, const Mesh &mesh, double lambda1, double p,
                                          const std::function<double(double)> &denom, LimsupGrid grid) {
    grid.K = safe_k(p, grid.K);
    const auto quad = mesh.quadrature();
    auto at = [&](const Point &x, Direction d) {
        return estimate_limsup(
            [&](double s) {
                const double G = eval_G(spec, x, s, lambda1, p).value();
                return G / denom(s);
            },
            d, grid);
    };
    PointwiseLimsups out;
    if (spec.autonomous) {
        const auto ep = at(quad[0].x, Direction::plus), em = at(quad[0].x, Direction::minus);
        out.plus.assign(quad.size(), ep);
        out.minus.assign(quad.size(), em);
        return out;
    }
    out.plus.resize(quad.size());
    out.minus.resize(quad.size());
    parallel_for(
        quad.size(),
        [&](std::size_t q) {
            out.plus[q] = at(quad[q].x, Direction::plus);
            out.minus[q] = at(quad[q].x, Direction::minus);
        },
        8);
    return out;
}

inline bool any_unconverged(const std::vector<LimsupEstimate> &e) {
    return std::any_of(e.begin(), e.end(), [](const auto &x) { return !x.converged; });
}

// Quadrature-weight fraction where pred(estimate) is true.
template <class Pred>
double weight_fraction(const Mesh &mesh, const std::vector<LimsupEstimate> &e, Pred &&pred) {
    const auto quad = mesh.quadrature();
    double hit = 0.0, total = 0.0;
    for (std::size_t q = 0; q < quad.size(); ++q) {
        total += quad[q].weight;
        if (pred(e[q])) hit += quad[q].weight;
    }
    return hit / total;
}

// Integral of estimate * weight(x_q) over the domain; an infinite estimate
// on positive weight makes the integral infinite (+inf wins a tie).
inline double weighted_integral(const Mesh &mesh, const std::vector<LimsupEstimate> &e,
                                const std::vector<double> &weight) {
    const auto quad = mesh.quadrature();
    double sum = 0.0;
    bool plus_inf = false, minus_inf = false;
    for (std::size_t q = 0; q < quad.size(); ++q) {
        const double w = quad[q].weight * weight[q];
        if (w == 0.0) continue;
        const double v = e[q].value.value();
        if (std::isinf(v)) {
            (v > 0 ? plus_inf : minus_inf) = true;
            continue;
        }
        sum += w * v;
    }
    if (plus_inf) return std::numeric_limits<double>::infinity();
    if (minus_inf) return -std::numeric_limits<double>::infinity();
    return sum;
}

inline HypothesisCheck f0_check(const NonlinearitySpec &spec, const MeshPtr &mesh, const TheoremOptions &opts) {
    if (opts.f0) return *opts.f0;
    HypothesisCheck c{"f0", Verdict::holds, {}};
    for (double R : opts.f0_radii) {
        const auto r = check_f0(spec, R, mesh);
        c.evidence.push_back({"integral_R=" + num(R), num(r.value)});
        c.verdict = all_of({c.verdict, r.verdict});
    }
    return c;
}

// G^+- <= 0 (within slack) at every point.
inline HypothesisCheck nonpositive_check(const std::string &name, const PointwiseLimsups &L, double slack) {
    HypothesisCheck c{name, Verdict::holds, {}};
    double worst = -std::numeric_limits<double>::infinity();
    bool violated = false, unconverged = false;
    for (const auto *side : {&L.plus, &L.minus}) {
        for (const auto &e : *side) {
            worst = std::max(worst, e.value.value());
            if (!e.converged) unconverged = true;
            else if (e.value.value() > slack) violated = true;
        }
    }
    c.verdict = violated ? Verdict::fails : (unconverged ? Verdict::inconclusive : Verdict::holds);
    c.evidence.push_back({"max_estimate", num(worst)});
    return c;
}

// Both {G^+ < 0} and {G^- < 0} have positive measure.
inline HypothesisCheck strict_sets_check(const std::string &name, const Mesh &mesh, const PointwiseLimsups &L,
                                         const TheoremOptions &opts) {
    HypothesisCheck c{name, Verdict::holds, {}};
    for (const auto &[label, side] : {std::pair{"plus", &L.plus}, std::pair{"minus", &L.minus}}) {
        const double strict = weight_fraction(mesh, *side, [&](const LimsupEstimate &e) {
            return e.converged && e.value.value() < -opts.strict_margin;
        });
        const double open = weight_fraction(mesh, *side, [](const LimsupEstimate &e) { return !e.converged; });
        c.evidence.push_back({std::string("strict_fraction_") + label, num(strict)});
        Verdict v = strict > opts.measure_fraction
                        ? Verdict::holds
                        : (strict + open > opts.measure_fraction ? Verdict::inconclusive : Verdict::fails);
        c.verdict = all_of({c.verdict, v});
    }
    return c;
}

// G^+- <= eta uniformly for some eta in the class: either the declared eta
// of the spec (with its declared exponent), or the sampled estimates
// themselves when they are bounded above (an L^inf envelope).
inline HypothesisCheck bound_check(const std::string &name, const NonlinearitySpec &spec, const Mesh &mesh,
                                   const PointwiseLimsups &L, double alpha, double p, WeightClass kind,
                                   const TheoremOptions &opts) {
    HypothesisCheck c{name, Verdict::fails, {}};
    const auto quad = mesh.quadrature();
    bool unconverged = false, has_plus_inf = false;
    double sup = -std::numeric_limits<double>::infinity();
    for (const auto *side : {&L.plus, &L.minus}) {
        for (const auto &e : *side) {
            if (!e.converged) unconverged = true;
            if (e.value.is_plus_infinity()) has_plus_inf = true;
            sup = std::max(sup, e.value.value());
        }
    }
    c.evidence.push_back({"sup_estimate", num(sup)});

    Verdict declared = Verdict::fails;
    if (spec.eta) {
        const auto cls = check_class_membership(spec.eta->exponent, alpha, p, mesh.dimension(), kind);
        bool below = true;
        for (std::size_t q = 0; q < quad.size() && below; ++q) {
            const double eta = (*spec.eta)(quad[q].x);
            below = L.plus[q].value.value() <= eta + opts.bound_slack &&
                    L.minus[q].value.value() <= eta + opts.bound_slack;
        }
        declared = below ? cls.verdict : Verdict::fails;
        c.evidence.push_back({"declared_eta", std::string(to_string(declared))});
        c.evidence.push_back({"class_threshold", num(cls.threshold)});
    }
    const Verdict envelope = has_plus_inf ? Verdict::fails : Verdict::holds;
    c.evidence.push_back({"bounded_envelope", std::string(to_string(envelope))});

    if (declared == Verdict::holds || envelope == Verdict::holds)
        c.verdict = unconverged ? Verdict::inconclusive : Verdict::holds;
    else
        c.verdict = unconverged && !has_plus_inf ? Verdict::inconclusive : Verdict::fails;
    return c;
}

inline std::vector<double> phi1_at_quadrature(const EigenResult &eig, double power) {
    auto v = quadrature_values(eig.phi1);
    for (double &x : v) x = std::pow(std::max(x, 0.0), power);
    return v;
}

}  // namespace detail

/// (f0), (G1): G^+-_p <= 0 a.e., (G1'): {G^+_p < 0} and {G^-_p < 0} of
/// positive measure.
inline HypothesisReport check_theorem_G1(const NonlinearitySpec &spec, const EigenResult &eig, const MeshPtr &mesh,
                                         double p, const TheoremOptions &opts = {}) {
    HypothesisReport rep;
    rep.theorem = "G1";
    rep.checks.push_back(detail::f0_check(spec, mesh, opts));
    const auto L = detail::pointwise_limsups(
        spec, *mesh, eig.lambda1, p, [p](double s) { return std::pow(std::abs(s), p); }, opts.grid);
    rep.checks.push_back(detail::nonpositive_check("G1", L, opts.bound_slack));
    rep.checks.push_back(detail::strict_sets_check("G1'", *mesh, L, opts));
    rep.finish();
    return rep;
}

/// (f0), phi a comparison function, (G2): G^+-_phi <= eta uniformly with
/// eta in X_alpha, (G2'): integral of G^+-_phi phi1^alpha < 0.
inline HypothesisReport check_theorem_G2(const NonlinearitySpec &spec, const EigenResult &eig, const MeshPtr &mesh,
                                         double p, const ComparisonFunction &phi, const TheoremOptions &opts = {}) {
    HypothesisReport rep;
    rep.theorem = "G2";
    rep.checks.push_back(detail::f0_check(spec, mesh, opts));
    const auto cmp = verify_comparison_function(phi, p);
    rep.checks.push_back({"comparison_function", cmp.overall, cmp.evidence});
    const auto L = detail::pointwise_limsups(spec, *mesh, eig.lambda1, p, [&phi](double s) { return phi(s); },
                                             opts.grid);
    rep.checks.push_back(detail::bound_check("G2", spec, *mesh, L, phi.order, p, WeightClass::X, opts));

    HypothesisCheck strict{"G2'", Verdict::holds, {}};
    const auto w = detail::phi1_at_quadrature(eig, phi.order);
    for (const auto &[label, side] : {std::pair{"plus", &L.plus}, std::pair{"minus", &L.minus}}) {
        const double I = detail::weighted_integral(*mesh, *side, w);
        strict.evidence.push_back({std::string("integral_") + label, num(I)});
        Verdict v = I < -opts.strict_margin ? Verdict::holds : Verdict::fails;
        if (v == Verdict::fails && detail::any_unconverged(*side)) v = Verdict::inconclusive;
        strict.verdict = all_of({strict.verdict, v});
    }
    rep.checks.push_back(strict);
    rep.finish();
    return rep;
}

/// (f0), (G3): G^+-_1 <= eta uniformly with eta in Y_1, (G3'): the
/// Landesman-Lazer bracket
/// integral G^-_1 phi1 < <h, phi1> < -integral G^+_1 phi1.
inline HypothesisReport check_theorem_G3(const NonlinearitySpec &spec, const EigenResult &eig, const DualVector &h,
                                         const MeshPtr &mesh, double p, const TheoremOptions &opts = {}) {
    HypothesisReport rep;
    rep.theorem = "G3";
    rep.checks.push_back(detail::f0_check(spec, mesh, opts));
    const auto L = detail::pointwise_limsups(
        spec, *mesh, eig.lambda1, p, [](double s) { return std::abs(s); }, opts.grid);
    rep.checks.push_back(detail::bound_check("G3", spec, *mesh, L, 1.0, p, WeightClass::Y, opts));

    const auto w = detail::phi1_at_quadrature(eig, 1.0);
    const double Im = detail::weighted_integral(*mesh, L.minus, w);
    const double Ip = detail::weighted_integral(*mesh, L.plus, w);
    const double hp = pairing(h, eig.phi1);
    HypothesisCheck ll{"G3'", Verdict::holds, {}};
    ll.evidence = {{"integral_minus", num(Im)}, {"h_phi1", num(hp)}, {"minus_integral_plus", num(-Ip)}};
    const bool ok = Im < hp - opts.strict_margin && hp < -Ip - opts.strict_margin;
    ll.verdict = ok ? Verdict::holds
                    : (detail::any_unconverged(L.plus) || detail::any_unconverged(L.minus) ? Verdict::inconclusive
                                                                                          : Verdict::fails);
    rep.checks.push_back(ll);
    rep.finish();
    return rep;
}

struct ScalarCheck {
    Verdict verdict = Verdict::inconclusive;
    LimsupEstimate plus, minus;
};

namespace detail {

inline void require_autonomous(const NonlinearitySpec &spec, const char *op) {
    if (!spec.autonomous) throw Error("conditions", op, spec.name + " depends on x; the check needs f = f(s)");
}

}  // namespace detail

/// G(s)/|s| -> -inf in both directions (autonomous specs).
inline ScalarCheck check_G0(const NonlinearitySpec &spec, double lambda1, double p,
                            LimsupGrid grid = {1.0, 200}) {
    detail::require_autonomous(spec, "check_G0");
    grid.K = detail::safe_k(p, grid.K);
    const Point x{0.0, 0.0};
    auto g = [&](double s) { return eval_G(spec, x, s, lambda1, p).value() / std::abs(s); };
    ScalarCheck out{Verdict::holds, estimate_limsup(g, Direction::plus, grid),
                    estimate_limsup(g, Direction::minus, grid)};
    for (const auto *e : {&out.plus, &out.minus}) {
        Verdict v = e->value.is_minus_infinity() ? Verdict::holds
                                                 : (e->converged ? Verdict::fails : Verdict::inconclusive);
        out.verdict = all_of({out.verdict, v});
    }
    return out;
}

/// limsup of p F(s)/|s|^p in one direction.
inline LimsupEstimate coercivity_limsup(const NonlinearitySpec &spec, double p, Direction dir,
                                        LimsupGrid grid = {1.0, 200}) {
    grid.K = detail::safe_k(p, grid.K);
    const Point x{0.0, 0.0};
    return estimate_limsup([&](double s) { return p * eval_F(spec, x, s).value() / std::pow(std::abs(s), p); },
                           dir, grid);
}

/// Strict coercivity (F): limsup p F(s)/|s|^p < lambda1 in both directions.
inline ScalarCheck check_F_coercivity(const NonlinearitySpec &spec, double lambda1, double p,
                                      LimsupGrid grid = {1.0, 200}) {
    detail::require_autonomous(spec, "check_F_coercivity");
    ScalarCheck out{Verdict::holds, coercivity_limsup(spec, p, Direction::plus, grid),
                    coercivity_limsup(spec, p, Direction::minus, grid)};
    for (const auto *e : {&out.plus, &out.minus}) {
        Verdict v = !e->converged ? Verdict::inconclusive
                                  : (e->value.value() < lambda1 - 1e-9 ? Verdict::holds : Verdict::fails);
        out.verdict = all_of({out.verdict, v});
    }
    return out;
}

// ---------------------------------------------------------------- incomparability

struct IncomparabilityRow {
    std::string example;
    HypothesisReport g1, g2, g3;
};

struct IncomparabilityTable {
    std::vector<IncomparabilityRow> rows;
    double lambda1 = 0.0;
    double alpha = 0.0;

    /// True when every example satisfies exactly its own theorem's
    /// hypotheses (example2: G2, example3: G3, example4: G1) and every other
    /// verdict is a conclusive failure.
    bool diagonal() const {
        if (rows.size() != 3) return false;
        const std::size_t own[3] = {1, 2, 0};
        for (std::size_t i = 0; i < 3; ++i) {
            const Verdict v[3] = {rows[i].g1.overall, rows[i].g2.overall, rows[i].g3.overall};
            for (std::size_t j = 0; j < 3; ++j)
                if (v[j] != (own[i] == j ? Verdict::holds : Verdict::fails)) return false;
        }
        return true;
    }
};

/// The three specs behind the incomparability claim, on the domain of mesh.
/// phi = |s|^alpha with alpha halfway between 1 and p; eta = +1 on the first
/// quarter of the x-range and -1 elsewhere; a = a smooth nonpositive bump of
/// radius a quarter of the width centred in the domain, zero outside it.
struct IncomparabilitySpecs {
    ComparisonFunction phi;
    Weight eta, a;
    NonlinearitySpec example2, example3, example4;
};

inline IncomparabilitySpecs incomparability_specs(const Mesh &mesh, double lambda1, double p) {
    const auto b = mesh.grid().bounds;
    const bool two_d = mesh.dimension() == 2;
    IncomparabilitySpecs s;
    s.phi = ComparisonFunction::power(1.0 + (p - 1.0) / 2.0);
    const double cut = b[0] + 0.25 * (b[1] - b[0]);
    s.eta = Weight{[cut](const Point &x) { return x[0] < cut ? 1.0 : -1.0; },
                   std::numeric_limits<double>::infinity(), "step", false};
    const Point c{0.5 * (b[0] + b[1]), 0.5 * (b[2] + b[3])};
    const double rx = 0.25 * (b[1] - b[0]), ry = 0.25 * (b[3] - b[2]);
    s.a = Weight{[=](const Point &x) {
                     double r2 = std::pow((x[0] - c[0]) / rx, 2);
                     if (two_d) r2 += std::pow((x[1] - c[1]) / ry, 2);
                     return r2 < 1.0 ? -std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0;
                 },
                 std::numeric_limits<double>::infinity(), "bump", false};
    s.example2 = catalog::eta_phi(s.eta, s.phi, lambda1, p);
    s.example3 = catalog::eta_linear(s.eta, lambda1, p);
    s.example4 = catalog::example4(s.a, s.phi, lambda1, p);
    return s;
}

/// Runs every example through all three theorem checks with h = 0.
inline IncomparabilityTable incomparability_suite(double p, const MeshPtr &mesh, const EigenResult &eig,
                                                  const TheoremOptions &opts = {}) {
    const auto specs = incomparability_specs(*mesh, eig.lambda1, p);
    const DualVector h(mesh);
    IncomparabilityTable t;
    t.lambda1 = eig.lambda1;
    t.alpha = specs.phi.order;
    for (const auto &[name, spec] : {std::pair{"example2", &specs.example2}, std::pair{"example3", &specs.example3},
                                     std::pair{"example4", &specs.example4}}) {
        IncomparabilityRow row;
        row.example = name;
        TheoremOptions o = opts;
        if (!o.f0) o.f0 = detail::f0_check(*spec, mesh, o);
        row.g1 = check_theorem_G1(*spec, eig, mesh, p, o);
        row.g2 = check_theorem_G2(*spec, eig, mesh, p, specs.phi, o);
        row.g3 = check_theorem_G3(*spec, eig, h, mesh, p, o);
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace plapvar
