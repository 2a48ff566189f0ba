#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "plapvar/error.hpp"
#include "plapvar/extended_real.hpp"
#include "plapvar/fem.hpp"
#include "plapvar/field.hpp"
#include "plapvar/mesh.hpp"
#include "plapvar/nonlinearity.hpp"
#include "plapvar/parallel.hpp"

namespace plapvar {

namespace detail {

inline std::vector<double> f_at_quadrature(const MeshPtr &mesh, const NonlinearitySpec &spec, const DiscreteField &u) {
    const auto vals = quadrature_values(u);
    const auto quad = mesh->quadrature();
    std::vector<double> out(vals.size());
    for (std::size_t q = 0; q < vals.size(); ++q) out[q] = eval_f(spec, quad[q].x, vals[q]);
    return out;
}

}  // namespace detail

/// Integral of F(x, u(x)) by mesh quadrature. Diverging pieces give
/// sentinels; when both signs diverge the result is -inf, so that
/// Phi = E - int F is +inf.
inline ExtendedReal potential_integral(const MeshPtr &mesh, const NonlinearitySpec &spec, const DiscreteField &u) {
    detail::require_mesh("potential_integral", mesh, u);
    const auto vals = quadrature_values(u);
    const auto quad = mesh->quadrature();
    double sum = 0.0;
    bool plus = false, minus = false;
    for (std::size_t q = 0; q < vals.size(); ++q) {
        const ExtendedReal F = eval_F(spec, quad[q].x, vals[q]);
        if (F.is_plus_infinity()) plus = true;
        else if (F.is_minus_infinity()) minus = true;
        else sum += quad[q].weight * F.value();
    }
    if (minus) return ExtendedReal::minus_infinity();
    if (plus) return ExtendedReal::plus_infinity();
    return sum;
}

/// Phi(u) = (1/p) int |grad u|^p - int F(x,u) - <h,u>.
inline ExtendedReal assemble_phi(const MeshPtr &mesh, const NonlinearitySpec &spec, const DualVector &h,
                                 const DiscreteField &u, double p) {
    const ExtendedReal iF = potential_integral(mesh, spec, u);
    if (iF.is_sentinel()) return iF.is_plus_infinity() ? ExtendedReal::minus_infinity() : ExtendedReal::plus_infinity();
    return dirichlet_energy(mesh, u, p) - iF.value() - pairing(h, u);
}

/// Gradient of Phi: entry j is the integral of |grad u|^{p-2} grad u .
/// grad psi_j minus the integral of f(x,u) psi_j minus <h, psi_j>.
inline DualVector phi_gradient(const MeshPtr &mesh, const NonlinearitySpec &spec, const DualVector &h,
                               const DiscreteField &u, double p) {
    DualVector g = plap_residual(mesh, u, p);
    g -= load_from_quadrature(mesh, detail::f_at_quadrature(mesh, spec, u));
    g -= h;
    return g;
}

struct SolveOptions {
    int max_iterations = 2000;
    /// Converged once max_j |<grad Phi, psi_j>| / int psi_j falls below this.
    double stationarity_tol = 1e-8;
    /// Stop (without claiming convergence) after `stall_window` steps running
    /// in which Phi decreased by less than this fraction of |Phi| and the
    /// stationarity measure did not drop by a tenth.
    double decrease_tol = 1e-14;
    int stall_window = 3;
    double armijo = 1e-4;
    int max_halvings = 60;
    /// Phi below this is taken as evidence that Phi is unbounded below.
    double divergence_threshold = -1e12;
    bool multistart = false;
    int starts = 5;
    /// Random starts draw nodal values uniformly from [-start_scale, start_scale].
    double start_scale = 1.0;
    std::uint64_t seed = 0;
};

struct SolveResult {
    DiscreteField u;
    ExtendedReal phi_value;
    double stationarity = 0.0;
    int iterations = 0;
    bool converged = false;
    /// "stationarity", "decrease", "line-search" or "max-iterations".
    std::string stop_reason;
    int function_evaluations = 0;
    int halvings = 0;
    double last_step = 0.0;
    /// Number of starting points tried; above 1 the minimizer is the best
    /// found among them, not a certified global one.
    int starts = 1;
};

/// Max over free vertices of |g_j| / int psi_j.
inline double stationarity(const MeshPtr &mesh, const DualVector &g) {
    const DualVector m = lumped_mass(mesh);
    double s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) s = std::max(s, std::abs(g[j]) / m[j]);
    return s;
}

namespace detail {

inline SolveResult descend(const MeshPtr &mesh, const NonlinearitySpec &spec, const DualVector &h, double p,
                           DiscreteField u, const SolveOptions &opts) {
    WeightedStiffness precond(mesh);
    SolveResult out;
    ExtendedReal phi = assemble_phi(mesh, spec, h, u, p);
    out.function_evaluations = 1;
    if (!phi.finite()) throw Error("solver", "minimize_phi", "Phi is not finite at the starting point");
    const double scale = 1.0 / std::max(p - 1.0, 1.0);
    out.stop_reason = "max-iterations";
    int stalled = 0;
    bool small_decrease = false;
    double prev_stationarity = std::numeric_limits<double>::infinity();
    for (int it = 0; it < opts.max_iterations; ++it) {
        DualVector g = phi_gradient(mesh, spec, h, u, p);
        out.stationarity = stationarity(mesh, g);
        if (out.stationarity < opts.stationarity_tol) {
            out.stop_reason = "stationarity";
            break;
        }
        // A step counts as stalled when Phi barely moved and stationarity
        // did not drop by a tenth either.
        stalled = small_decrease && out.stationarity > 0.9 * prev_stationarity ? stalled + 1 : 0;
        if (stalled >= opts.stall_window) {
            out.stop_reason = "decrease";
            break;
        }
        prev_stationarity = out.stationarity;
        precond.factorize(kacanov_weights(u, p));
        DiscreteField dir = precond.solve(g);
        dir *= -scale;
        const double slope = pairing(g, dir);
        // Rounding level of Phi: near a minimizer its decrease falls below
        // it, and a step is then judged by the stationarity it reaches.
        const double noise = 1e-12 * (dirichlet_energy(mesh, u, p) + std::abs(pairing(h, u)) +
                                      std::abs(potential_integral(mesh, spec, u).value()));

        double t = 1.0;
        bool accepted = false;
        DiscreteField trial = u;
        ExtendedReal phi_trial = phi;
        for (int k = 0; k <= opts.max_halvings; ++k, t *= 0.5) {
            trial = u;
            trial.axpy(t, dir);
            phi_trial = assemble_phi(mesh, spec, h, trial, p);
            ++out.function_evaluations;
            if (phi_trial.is_minus_infinity() || phi_trial.value() < opts.divergence_threshold)
                throw Error("solver", "minimize_phi", "functional appears unbounded below (coercivity violated)");
            if (!phi_trial.finite()) continue;
            bool ok = phi_trial.value() <= phi.value() + opts.armijo * t * slope;
            if (!ok && std::abs(phi_trial.value() - phi.value()) <= noise)
                ok = stationarity(mesh, phi_gradient(mesh, spec, h, trial, p)) < out.stationarity;
            if (ok) {
                accepted = true;
                out.halvings += k;
                break;
            }
        }
        out.iterations = it + 1;
        if (!accepted) {
            out.stop_reason = "line-search";
            break;
        }
        out.last_step = t;
        const double decrease = phi.value() - phi_trial.value();
        u = std::move(trial);
        phi = phi_trial;
        small_decrease = decrease <= opts.decrease_tol * std::max(std::abs(phi.value()), noise);
    }
    if (out.stop_reason == "max-iterations")
        out.stationarity = stationarity(mesh, phi_gradient(mesh, spec, h, u, p));
    out.converged = out.stationarity < opts.stationarity_tol;
    out.phi_value = phi;
    out.u = std::move(u);
    return out;
}

}  // namespace detail

/// Minimizes Phi from u = 0 by descent along the gradient preconditioned
/// with max(p-1, 1) times the |grad u|^{p-2}-weighted stiffness, with Armijo
/// backtracking (halving from a unit step). With multistart, further seeded
/// random starts are run and the lowest Phi is kept.
inline SolveResult minimize_phi(const MeshPtr &mesh, const NonlinearitySpec &spec, const DualVector &h, double p,
                                const SolveOptions &opts = {}) {
    detail::require_exponent("minimize_phi", p);
    if (h.mesh() != mesh) throw Error("solver", "minimize_phi", "h does not live on the mesh");
    SolveResult best = detail::descend(mesh, spec, h, p, DiscreteField(mesh), opts);
    if (!opts.multistart) return best;
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unif(-opts.start_scale, opts.start_scale);
    for (int s = 0; s < opts.starts; ++s) {
        DiscreteField u0(mesh);
        for (std::size_t j = 0; j < u0.size(); ++j) u0[j] = unif(rng);
        SolveResult r = detail::descend(mesh, spec, h, p, std::move(u0), opts);
        const bool better = (r.converged && !best.converged) ||
                            (r.converged == best.converged && r.phi_value.value() < best.phi_value.value());
        if (better) best = std::move(r);
    }
    best.starts = opts.starts + 1;
    return best;
}

/// Smooth cut-off: 1 on [-R, R], 0 outside [-2R, 2R], a cubic smoothstep in
/// between with |Theta'| <= 1.5/R.
struct Truncation {
    double R = 1.0;

    double operator()(double s) const {
        const double t = (std::abs(s) - R) / R;
        if (t <= 0.0) return 1.0;
        if (t >= 1.0) return 0.0;
        return 1.0 - t * t * (3.0 - 2.0 * t);
    }

    double derivative(double s) const {
        const double t = (std::abs(s) - R) / R;
        if (t <= 0.0 || t >= 1.0) return 0.0;
        const double d = -6.0 * t * (1.0 - t) / R;
        return s > 0 ? d : -d;
    }
};

inline Truncation make_truncation(double R) {
    if (!(R > 0.0) || !std::isfinite(R)) throw Error("solver", "make_truncation", "R must be positive");
    return Truncation{R};
}

/// Nodal factors Theta_R(u_j): the truncated test function v_j is the
/// factor times the hat psi_j.
inline std::vector<double> truncation_factors(const DiscreteField &u, double R) {
    const Truncation th = make_truncation(R);
    std::vector<double> c(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) c[j] = th(u[j]);
    return c;
}

/// v_j = interpolant of Theta_R(u) psi_j, one per free vertex.
inline std::vector<DiscreteField> truncated_test_basis(const MeshPtr &mesh, const DiscreteField &u, double R) {
    detail::require_mesh("truncated_test_basis", mesh, u);
    const auto c = truncation_factors(u, R);
    std::vector<DiscreteField> basis;
    basis.reserve(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) {
        DiscreteField v(mesh);
        v[j] = c[j];
        basis.push_back(std::move(v));
    }
    return basis;
}

namespace detail {

// Nodal values, on the mesh, of the P1 hats of the mesh coarsened by
// `stride` (cells divided by stride), one field per interior coarse vertex.
template <class Visit>
void for_each_coarse_hat(const MeshPtr &mesh, int stride, Visit &&visit) {
    const auto &g = mesh->grid();
    const bool two_d = mesh->dimension() == 2;
    const int nx = g.cells[0] / stride, ny = two_d ? g.cells[1] / stride : 1;
    for (int J = two_d ? 1 : 0; J < (two_d ? ny : 1); ++J) {
        for (int I = 1; I < nx; ++I) {
            DiscreteField v(mesh);
            for (std::size_t j = 0; j < v.size(); ++j) {
                const std::size_t vert = mesh->free_vertex(j);
                const int i = static_cast<int>(vert % (g.cells[0] + 1));
                const int jj = two_d ? static_cast<int>(vert / (g.cells[0] + 1)) : 0;
                const double xi = static_cast<double>(i - I * stride) / stride;
                double w;
                if (two_d) {
                    const double eta = static_cast<double>(jj - J * stride) / stride;
                    w = 1.0 - std::max({std::abs(xi), std::abs(eta), std::abs(xi - eta)});
                } else {
                    w = 1.0 - std::abs(xi);
                }
                v[j] = std::max(w, 0.0);
            }
            visit(v);
        }
    }
}

}  // namespace detail

/// Lower estimate of the norm of v -> int f(x,u) v on W^{1,p}_0: the sup of
/// |int f(x,u) v| / ||grad v||_p over truncated hats Theta_R(u) psi of the
/// mesh and of its nested coarsenings (cell counts n, n/2, n/4, ... down to
/// min_cells). Lowering min_cells enlarges the family, so the estimate
/// never decreases.
inline double estimate_lambda_u(const MeshPtr &mesh, const DiscreteField &u, const NonlinearitySpec &spec, double R,
                                double p, int min_cells = 2) {
    detail::require_mesh("estimate_lambda_u", mesh, u);
    detail::require_exponent("estimate_lambda_u", p);
    const DualVector b = load_from_quadrature(mesh, detail::f_at_quadrature(mesh, spec, u));
    const auto c = truncation_factors(u, R);
    const auto &g = mesh->grid();
    double best = 0.0;
    for (int stride = 1;; stride *= 2) {
        const bool fits = g.cells[0] % stride == 0 && g.cells[0] / stride >= std::max(min_cells, 2) &&
                          (mesh->dimension() == 1 || (g.cells[1] % stride == 0 && g.cells[1] / stride >= 2));
        if (!fits) break;
        detail::for_each_coarse_hat(mesh, stride, [&](DiscreteField &v) {
            for (std::size_t j = 0; j < v.size(); ++j) v[j] *= c[j];
            const double nv = sobolev_norm(mesh, v, p);
            if (nv > 0.0) best = std::max(best, std::abs(pairing(b, v)) / nv);
        });
    }
    return best;
}

/// Residuals of the weak formulation against the truncated hat basis.
struct ResidualReport {
    /// r_j = int |grad u|^{p-2} grad u . grad v_j - int f(x,u) v_j - <h, v_j>
    std::vector<double> residuals;
    double max_abs = 0.0;
    /// max_j |r_j| / int psi_j; equals the solver's stationarity when no
    /// truncation is active.
    double max_scaled = 0.0;
    /// max_j |r_j| over the largest single term magnitude (0 when all vanish).
    double max_relative = 0.0;
    double R = 0.0;
    std::size_t basis_size = 0;
    double lambda_u = 0.0;
};

/// Tests u against every truncated hat v_j = Theta_R(u_j) psi_j. R defaults
/// to 2 ||u||_inf (1 for u = 0), which leaves the truncation inactive.
inline ResidualReport verify_weak_solution(const MeshPtr &mesh, const DiscreteField &u, const NonlinearitySpec &spec,
                                           const DualVector &h, double p, std::optional<double> R = std::nullopt) {
    detail::require_mesh("verify_weak_solution", mesh, u);
    ResidualReport rep;
    rep.R = R ? *R : (u.max_abs() > 0.0 ? 2.0 * u.max_abs() : 1.0);
    const auto c = truncation_factors(u, rep.R);
    const DualVector a = plap_residual(mesh, u, p);
    const DualVector b = load_from_quadrature(mesh, detail::f_at_quadrature(mesh, spec, u));
    const DualVector m = lumped_mass(mesh);
    rep.basis_size = c.size();
    rep.residuals.resize(c.size());
    double denom = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
        rep.residuals[j] = c[j] * (a[j] - b[j] - h[j]);
        rep.max_abs = std::max(rep.max_abs, std::abs(rep.residuals[j]));
        rep.max_scaled = std::max(rep.max_scaled, std::abs(rep.residuals[j]) / m[j]);
        denom = std::max(denom, std::abs(c[j]) * (std::abs(a[j]) + std::abs(b[j]) + std::abs(h[j])));
    }
    rep.max_relative = denom > 0.0 ? rep.max_abs / denom : 0.0;
    rep.lambda_u = estimate_lambda_u(mesh, u, spec, rep.R, p);
    return rep;
}

}  // namespace plapvar
