#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "plapvar/error.hpp"
#include "plapvar/mesh.hpp"

namespace plapvar {

namespace detail {

// Shared storage for the two coefficient-vector types. Derived classes get
// value semantics and linear-space arithmetic; mixing the two is a type error.
template <class Derived>
class MeshVector {
public:
    MeshVector() = default;
    explicit MeshVector(MeshPtr mesh) : mesh_(std::move(mesh)), values_(mesh_->free_count(), 0.0) {}
    MeshVector(MeshPtr mesh, std::vector<double> values) : mesh_(std::move(mesh)), values_(std::move(values)) {
        if (values_.size() != mesh_->free_count())
            throw Error("fem-core", "DiscreteField", "coefficient count does not match free-vertex count");
    }

    const MeshPtr &mesh() const { return mesh_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t j) const { return values_[j]; }
    double &operator[](std::size_t j) { return values_[j]; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    double max_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }
    double norm() const {
        double s = 0.0;
        for (double v : values_) s += v * v;
        return std::sqrt(s);
    }

    Derived &operator+=(const Derived &o) {
        check_same(o);
        for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += o.values_[j];
        return self();
    }
    Derived &operator-=(const Derived &o) {
        check_same(o);
        for (std::size_t j = 0; j < values_.size(); ++j) values_[j] -= o.values_[j];
        return self();
    }
    Derived &operator*=(double c) {
        for (double &v : values_) v *= c;
        return self();
    }
    /// this += c * o
    Derived &axpy(double c, const Derived &o) {
        check_same(o);
        for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += c * o.values_[j];
        return self();
    }

    friend Derived operator+(Derived a, const Derived &b) { return a += b; }
    friend Derived operator-(Derived a, const Derived &b) { return a -= b; }
    friend Derived operator*(double c, Derived a) { return a *= c; }
    friend Derived operator*(Derived a, double c) { return a *= c; }

    void check_same(const Derived &o) const {
        if (mesh_ != o.mesh_ || values_.size() != o.values_.size())
            throw Error("fem-core", "arithmetic", "operands live on different meshes");
    }

private:
    Derived &self() { return static_cast<Derived &>(*this); }

    MeshPtr mesh_;
    std::vector<double> values_;
};

}  // namespace detail

/// Piecewise-linear function vanishing on the boundary, stored by its
/// values at the free vertices.
class DiscreteField : public detail::MeshVector<DiscreteField> {
public:
    using MeshVector::MeshVector;

    /// Values at every vertex, zeros on the boundary.
    std::vector<double> nodal() const {
        std::vector<double> out(mesh()->vertex_count(), 0.0);
        for (std::size_t j = 0; j < size(); ++j) out[mesh()->free_vertex(j)] = (*this)[j];
        return out;
    }

    /// Point evaluation of the P1 interpolant.
    double at(const Point &x) const {
        auto [e, bc] = mesh()->locate(x);
        const auto &el = mesh()->element(e);
        double v = 0.0;
        for (int a = 0; a < mesh()->local_count(); ++a) {
            const int j = mesh()->free_index(el[a]);
            if (j >= 0) v += bc[a] * (*this)[j];
        }
        return v;
    }
};

/// Linear functional on DiscreteField, one entry per free vertex, acting
/// through the Euclidean pairing of coefficient vectors.
class DualVector : public detail::MeshVector<DualVector> {
public:
    using MeshVector::MeshVector;
};

/// Duality pairing <h, v>.
inline double pairing(const DualVector &h, const DiscreteField &v) {
    if (h.mesh() != v.mesh() || h.size() != v.size()) throw Error("fem-core", "pairing", "length mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < h.size(); ++j) s += h[j] * v[j];
    return s;
}

/// Coordinate vector e_j.
inline DiscreteField unit_field(const MeshPtr &mesh, std::size_t j) {
    DiscreteField u(mesh);
    u[j] = 1.0;
    return u;
}

/// Nodal interpolant of g on the free vertices.
template <class Fn>
DiscreteField interpolate(const MeshPtr &mesh, Fn &&g) {
    DiscreteField u(mesh);
    for (std::size_t j = 0; j < u.size(); ++j) u[j] = g(mesh->vertex(mesh->free_vertex(j)));
    return u;
}

/// Re-expresses a field on a nested refinement of its mesh (exact for P1).
inline DiscreteField prolongate(const DiscreteField &coarse, const MeshPtr &fine) {
    return interpolate(fine, [&](const Point &x) { return coarse.at(x); });
}

}  // namespace plapvar
