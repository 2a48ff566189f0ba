#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include "plapvar/error.hpp"
#include "plapvar/fem.hpp"
#include "plapvar/field.hpp"
#include "plapvar/mesh.hpp"

namespace plapvar {

struct EigenOptions {
    int max_iterations = 5000;
    /// Stop once the quotient drops by less than this fraction per step,
    /// sustained over `stall_window` consecutive steps.
    double relative_decrease_tol = 1e-12;
    int stall_window = 3;
    /// Stop once max_j |<r(u) - lambda M(u), e_j>| falls below this.
    double residual_tol = 1e-9;
    double armijo = 1e-4;
    int max_halvings = 60;
    /// Relative multiplicative noise applied to the start bubble; 0 = none.
    double start_perturbation = 0.0;
    std::uint64_t seed = 0;
};

/// First eigenpair of -Delta_p with phi1 >= 0 and integral of phi1^p = 1.
struct EigenResult {
    double lambda1 = 0.0;
    DiscreteField phi1;
    int iterations = 0;
    /// max_j |<-Delta_p phi1 - lambda1 |phi1|^{p-2} phi1, psi_j>|
    double residual = 0.0;
    std::string stop_reason;
};

/// Raised when first_eigenpair exhausts its iteration budget; carries the
/// last iterate.
class EigenNonConvergence : public Error {
public:
    EigenNonConvergence(EigenResult last, const std::string &msg)
        : Error("eigen", "first_eigenpair", msg), last_(std::move(last)) {}
    const EigenResult &last() const { return last_; }

private:
    EigenResult last_;
};

/// Integral of |grad u|^p over integral of |u|^p.
inline double rayleigh_quotient(const MeshPtr &mesh, const DiscreteField &u, double p) {
    const double denom = lp_integral(mesh, u, p);
    if (!(denom > 0.0)) throw Error("eigen", "rayleigh_quotient", "u must be nonzero");
    return p * dirichlet_energy(mesh, u, p) / denom;
}

/// -Delta_p u - lambda |u|^{p-2} u tested against every hat.
inline DualVector eigen_residual(const MeshPtr &mesh, const DiscreteField &u, double lambda, double p) {
    DualVector r = plap_residual(mesh, u, p);
    r.axpy(-lambda, power_mass(mesh, u, p));
    return r;
}

namespace detail {

inline void normalize_lp(const MeshPtr &mesh, DiscreteField &u, double p) {
    u *= std::pow(lp_integral(mesh, u, p), -1.0 / p);
}

inline DiscreteField positive_bubble(const MeshPtr &mesh) {
    const auto &b = mesh->grid().bounds;
    return interpolate(mesh, [&](const Point &x) {
        double v = std::sin(std::numbers::pi * (x[0] - b[0]) / (b[1] - b[0]));
        if (mesh->dimension() == 2) v *= std::sin(std::numbers::pi * (x[1] - b[2]) / (b[3] - b[2]));
        return v;
    });
}

}  // namespace detail

/// Minimizes the Rayleigh quotient by projected descent: each step moves
/// along the gradient preconditioned by max(p-1, 1) times the
/// |grad u|^{p-2}-weighted stiffness (the exact energy Hessian in 1-D for
/// p >= 2), backtracks (Armijo, halving from 1) and renormalizes to unit L^p
/// norm. For p = 2 a unit step is one inverse-iteration sweep.
inline EigenResult first_eigenpair(const MeshPtr &mesh, double p, const EigenOptions &opts = {}) {
    detail::require_exponent("first_eigenpair", p);
    if (mesh->free_count() == 0) throw Error("eigen", "first_eigenpair", "mesh has no free vertex");

    DiscreteField u = detail::positive_bubble(mesh);
    if (opts.start_perturbation > 0.0) {
        std::mt19937_64 rng(opts.seed);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        for (std::size_t j = 0; j < u.size(); ++j) u[j] *= 1.0 + opts.start_perturbation * unif(rng);
    }
    detail::normalize_lp(mesh, u, p);

    WeightedStiffness precond(mesh);
    EigenResult out;
    double q = rayleigh_quotient(mesh, u, p);
    bool done = false;
    int stalled = 0;
    for (int it = 0; it < opts.max_iterations; ++it) {
        const DualVector res = eigen_residual(mesh, u, q, p);
        if (res.max_abs() < opts.residual_tol) {
            out.stop_reason = "residual";
            done = true;
            break;
        }
        precond.factorize(kacanov_weights(u, p));
        DiscreteField dir = precond.solve(res);
        dir *= -1.0 / std::max(p - 1.0, 1.0);
        const double slope = p * pairing(res, dir);

        double t = 1.0;
        bool accepted = false;
        DiscreteField trial = u;
        double q_trial = q;
        for (int k = 0; k <= opts.max_halvings; ++k, t *= 0.5) {
            trial = u;
            trial.axpy(t, dir);
            if (lp_integral(mesh, trial, p) > 0.0) {
                q_trial = rayleigh_quotient(mesh, trial, p);
                if (q_trial <= q + opts.armijo * t * slope) {
                    accepted = true;
                    break;
                }
            }
        }
        out.iterations = it + 1;
        if (!accepted) {
            out.stop_reason = "stagnation";
            done = true;
            break;
        }
        detail::normalize_lp(mesh, trial, p);
        u = std::move(trial);
        const double decrease = q - q_trial;
        q = q_trial;
        stalled = decrease < opts.relative_decrease_tol * q ? stalled + 1 : 0;
        if (stalled >= opts.stall_window) {
            out.stop_reason = "decrease";
            done = true;
            break;
        }
    }

    double mean = 0.0;
    for (double v : u.values()) mean += v;
    if (mean < 0.0) u *= -1.0;
    detail::normalize_lp(mesh, u, p);
    out.lambda1 = rayleigh_quotient(mesh, u, p);
    out.residual = eigen_residual(mesh, u, out.lambda1, p).max_abs();
    out.phi1 = std::move(u);
    if (!done) {
        out.stop_reason = "max-iterations";
        throw EigenNonConvergence(std::move(out), "no convergence within " + std::to_string(opts.max_iterations) +
                                                      " iterations");
    }
    return out;
}

}  // namespace plapvar
