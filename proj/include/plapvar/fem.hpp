#pragma once

#include <cmath>
#include <concepts>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "plapvar/error.hpp"
#include "plapvar/field.hpp"
#include "plapvar/mesh.hpp"
#include "plapvar/util.hpp"

namespace plapvar {

namespace detail {

inline void require_exponent(const char *op, double p) {
    if (!(p > 1.0) || !std::isfinite(p)) throw Error("fem-core", op, "p must exceed 1");
}

template <class V>
void require_mesh(const char *op, const MeshPtr &mesh, const V &u) {
    if (!mesh || u.mesh() != mesh || u.size() != mesh->free_count())
        throw Error("fem-core", op, "field does not conform to mesh");
}

inline Point element_gradient(const Mesh &mesh, const std::vector<double> &nodal, std::size_t e) {
    const auto &el = mesh.element(e);
    const auto &g = mesh.shape_gradients(e);
    Point grad{0.0, 0.0};
    for (int a = 0; a < mesh.local_count(); ++a) {
        grad[0] += nodal[el[a]] * g[a][0];
        grad[1] += nodal[el[a]] * g[a][1];
    }
    return grad;
}

inline double norm(const Point &g) { return std::hypot(g[0], g[1]); }

}  // namespace detail

/// Piecewise-constant gradient magnitudes, one per element.
inline std::vector<double> gradient_magnitudes(const DiscreteField &u) {
    const Mesh &mesh = *u.mesh();
    const auto nodal = u.nodal();
    std::vector<double> out(mesh.element_count());
    for (std::size_t e = 0; e < out.size(); ++e) out[e] = detail::norm(detail::element_gradient(mesh, nodal, e));
    return out;
}

/// (1/p) * integral of |grad u|^p. Exact on P1 fields.
inline double dirichlet_energy(const MeshPtr &mesh, const DiscreteField &u, double p) {
    detail::require_exponent("dirichlet_energy", p);
    detail::require_mesh("dirichlet_energy", mesh, u);
    const auto nodal = u.nodal();
    double sum = 0.0;
    for (std::size_t e = 0; e < mesh->element_count(); ++e) {
        const double g = detail::norm(detail::element_gradient(*mesh, nodal, e));
        sum += mesh->element_measure(e) * std::pow(g, p);
    }
    return sum / p;
}

/// Gradient of dirichlet_energy: entry j is the integral of
/// |grad u|^{p-2} grad u . grad psi_j.
inline DualVector plap_residual(const MeshPtr &mesh, const DiscreteField &u, double p) {
    detail::require_exponent("plap_residual", p);
    detail::require_mesh("plap_residual", mesh, u);
    const auto nodal = u.nodal();
    DualVector r(mesh);
    for (std::size_t e = 0; e < mesh->element_count(); ++e) {
        const Point g = detail::element_gradient(*mesh, nodal, e);
        const double mag = detail::norm(g);
        // |grad u|^{p-2} is singular at zero gradient for p < 2; the energy
        // density vanishes there, so the element contributes nothing.
        if (p < 2.0 && mag < 1e-14) continue;
        const double coef = (mag == 0.0 ? 0.0 : std::pow(mag, p - 2.0)) * mesh->element_measure(e);
        const auto &el = mesh->element(e);
        const auto &sg = mesh->shape_gradients(e);
        for (int a = 0; a < mesh->local_count(); ++a) {
            const int j = mesh->free_index(el[a]);
            if (j >= 0) r[j] += coef * (g[0] * sg[a][0] + g[1] * sg[a][1]);
        }
    }
    return r;
}

/// Values of the P1 interpolant of u at every quadrature point, in the
/// order of Mesh::quadrature().
inline std::vector<double> quadrature_values(const DiscreteField &u) {
    const Mesh &mesh = *u.mesh();
    const auto nodal = u.nodal();
    std::vector<double> out;
    out.reserve(mesh.quadrature().size());
    for (const auto &q : mesh.quadrature()) {
        const auto &el = mesh.element(q.element);
        double v = 0.0;
        for (int a = 0; a < mesh.local_count(); ++a) v += q.shape[a] * nodal[el[a]];
        out.push_back(v);
    }
    return out;
}

/// Integral of |u|^p by per-element quadrature.
inline double lp_integral(const MeshPtr &mesh, const DiscreteField &u, double p) {
    if (!(p >= 1.0)) throw Error("fem-core", "lp_integral", "p must be at least 1");
    detail::require_mesh("lp_integral", mesh, u);
    const auto vals = quadrature_values(u);
    double sum = 0.0;
    const auto quad = mesh->quadrature();
    for (std::size_t q = 0; q < quad.size(); ++q) sum += quad[q].weight * std::pow(std::abs(vals[q]), p);
    return sum;
}

/// Tests pointwise data against every hat: entry j is the quadrature sum of
/// values[q] * psi_j(x_q) * w_q.
inline DualVector load_from_quadrature(const MeshPtr &mesh, const std::vector<double> &values) {
    DualVector b(mesh);
    const auto quad = mesh->quadrature();
    for (std::size_t q = 0; q < quad.size(); ++q) {
        const auto &el = mesh->element(quad[q].element);
        for (int a = 0; a < mesh->local_count(); ++a) {
            const int j = mesh->free_index(el[a]);
            if (j >= 0) b[j] += quad[q].weight * values[q] * quad[q].shape[a];
        }
    }
    return b;
}

/// Functional of an L2 density g: entry j is the integral of g psi_j.
template <class Fn>
    requires std::invocable<Fn &, const Point &>
DualVector load_vector(const MeshPtr &mesh, Fn &&g) {
    std::vector<double> vals;
    vals.reserve(mesh->quadrature().size());
    for (const auto &q : mesh->quadrature()) {
        const double v = g(q.x);
        if (!std::isfinite(v))
            throw Error("fem-core", "load_vector",
                        "non-finite density at x = (" + std::to_string(q.x[0]) + ", " + std::to_string(q.x[1]) + ")");
        vals.push_back(v);
    }
    return load_from_quadrature(mesh, vals);
}

/// Load of a discrete field used as a density (the consistent mass product).
inline DualVector load_vector(const MeshPtr &mesh, const DiscreteField &g) {
    detail::require_mesh("load_vector", mesh, g);
    return load_from_quadrature(mesh, quadrature_values(g));
}

/// Entry j is the integral of |u|^{p-2} u psi_j: the gradient of
/// lp_integral(u, p) divided by p.
inline DualVector power_mass(const MeshPtr &mesh, const DiscreteField &u, double p) {
    auto vals = quadrature_values(u);
    for (double &v : vals) v = signed_pow(v, p - 1.0);
    return load_from_quadrature(mesh, vals);
}

/// Integral of each hat function.
inline DualVector lumped_mass(const MeshPtr &mesh) {
    return load_from_quadrature(mesh, std::vector<double>(mesh->quadrature().size(), 1.0));
}

/// (integral of |grad v|^p)^{1/p}, the norm of W^{1,p}_0.
inline double sobolev_norm(const MeshPtr &mesh, const DiscreteField &v, double p) {
    return std::pow(p * dirichlet_energy(mesh, v, p), 1.0 / p);
}

/// Stiffness matrix with one positive weight per element, factorized for
/// repeated solves. The sparsity pattern is analysed once per mesh.
class WeightedStiffness {
public:
    explicit WeightedStiffness(MeshPtr mesh) : mesh_(std::move(mesh)) {
        const auto n = static_cast<Eigen::Index>(mesh_->free_count());
        matrix_.resize(n, n);
        assemble(std::vector<double>(mesh_->element_count(), 1.0));
        solver_.analyzePattern(matrix_);
    }

    /// Refactorizes with the given element weights.
    void factorize(const std::vector<double> &weights) {
        assemble(weights);
        solver_.factorize(matrix_);
        if (solver_.info() != Eigen::Success)
            throw Error("fem-core", "WeightedStiffness", "factorization failed");
    }

    /// Solves K_w x = b and returns x as a field.
    DiscreteField solve(const DualVector &b) const {
        Eigen::Map<const Eigen::VectorXd> rhs(b.values().data(), static_cast<Eigen::Index>(b.size()));
        Eigen::VectorXd x = solver_.solve(rhs);
        return DiscreteField(mesh_, std::vector<double>(x.data(), x.data() + x.size()));
    }

    const Eigen::SparseMatrix<double> &matrix() const { return matrix_; }

private:
    void assemble(const std::vector<double> &weights) {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(mesh_->element_count() * 9);
        for (std::size_t e = 0; e < mesh_->element_count(); ++e) {
            const auto &el = mesh_->element(e);
            const auto &g = mesh_->shape_gradients(e);
            const double c = weights[e] * mesh_->element_measure(e);
            for (int a = 0; a < mesh_->local_count(); ++a) {
                const int i = mesh_->free_index(el[a]);
                if (i < 0) continue;
                for (int b = 0; b < mesh_->local_count(); ++b) {
                    const int j = mesh_->free_index(el[b]);
                    if (j < 0) continue;
                    trip.emplace_back(i, j, c * (g[a][0] * g[b][0] + g[a][1] * g[b][1]));
                }
            }
        }
        matrix_.setFromTriplets(trip.begin(), trip.end());
    }

    MeshPtr mesh_;
    Eigen::SparseMatrix<double> matrix_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

/// Element weights |grad u|^{p-2} with the gradient floored at a small
/// fraction of its maximum; all ones when u is constant zero.
inline std::vector<double> kacanov_weights(const DiscreteField &u, double p) {
    auto mags = gradient_magnitudes(u);
    double top = 0.0;
    for (double m : mags) top = std::max(top, m);
    if (top == 0.0 || p == 2.0) return std::vector<double>(mags.size(), 1.0);
    const double floor = 1e-3 * top;
    for (double &m : mags) m = std::pow(std::max(m, floor), p - 2.0);
    return mags;
}

}  // namespace plapvar
