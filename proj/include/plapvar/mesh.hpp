#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "plapvar/error.hpp"

namespace plapvar {

/// A point of the domain. Intervals use only the first coordinate.
using Point = std::array<double, 2>;

/// One physical quadrature node: its element, location, weight (already
/// multiplied by the element measure) and the values of the element's local
/// P1 shape functions at the node.
struct QuadraturePoint {
    std::size_t element;
    Point x;
    double weight;
    std::array<double, 3> shape;
};

/// Bounds and cell counts of the structured grid a mesh was built from.
/// Interval meshes use bounds[0..1] and cells[0]; cells[1] is 0.
struct StructuredGrid {
    std::array<double, 4> bounds{};
    std::array<int, 2> cells{};
};

namespace detail {

struct ReferenceRule {
    std::vector<std::array<double, 3>> barycentric;
    std::vector<double> weights;  // sum to one
    int order;
};

// 3-point Gauss-Legendre on the unit segment, exact through degree 5.
inline const ReferenceRule &segment_rule() {
    static const ReferenceRule rule = [] {
        const double d = 0.5 * std::sqrt(0.6);
        ReferenceRule r;
        for (double xi : {0.5 - d, 0.5, 0.5 + d}) r.barycentric.push_back({1.0 - xi, xi, 0.0});
        r.weights = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
        r.order = 5;
        return r;
    }();
    return rule;
}

// 6-point symmetric triangle rule, exact through degree 4.
inline const ReferenceRule &triangle_rule() {
    static const ReferenceRule rule = [] {
        ReferenceRule r;
        const double w1 = 0.223381589678011465944, a1 = 0.445948490915964886318;
        const double w2 = 0.109951743655321867389, a2 = 0.091576213509770743460;
        for (auto [w, a] : {std::pair{w1, a1}, std::pair{w2, a2}}) {
            const double b = 1.0 - 2.0 * a;
            r.barycentric.push_back({b, a, a});
            r.barycentric.push_back({a, b, a});
            r.barycentric.push_back({a, a, b});
            r.weights.insert(r.weights.end(), {w, w, w});
        }
        r.order = 4;
        return r;
    }();
    return rule;
}

}  // namespace detail

/// Simplicial mesh of an interval or rectangle with Dirichlet boundary
/// marking. Immutable after construction; share it through MeshPtr.
class Mesh {
public:
    Mesh(int dimension, std::vector<Point> vertices, std::vector<std::array<int, 3>> elements,
         std::vector<bool> boundary, StructuredGrid grid)
        : dim_(dimension),
          vertices_(std::move(vertices)),
          elements_(std::move(elements)),
          boundary_(std::move(boundary)),
          grid_(grid) {
        if (dim_ != 1 && dim_ != 2) throw Error("fem-core", "Mesh", "dimension must be 1 or 2");
        if (boundary_.size() != vertices_.size())
            throw Error("fem-core", "Mesh", "boundary flags do not match vertex count");
        free_index_.assign(vertices_.size(), -1);
        for (std::size_t v = 0; v < vertices_.size(); ++v) {
            if (!boundary_[v]) {
                free_index_[v] = static_cast<int>(free_vertices_.size());
                free_vertices_.push_back(v);
            }
        }
        measures_.reserve(elements_.size());
        gradients_.reserve(elements_.size());
        for (std::size_t e = 0; e < elements_.size(); ++e) compute_geometry(e);
        build_quadrature();
    }

    int dimension() const { return dim_; }
    std::size_t vertex_count() const { return vertices_.size(); }
    std::size_t element_count() const { return elements_.size(); }
    std::size_t free_count() const { return free_vertices_.size(); }
    /// Vertices per element: 2 for segments, 3 for triangles.
    int local_count() const { return dim_ + 1; }

    const Point &vertex(std::size_t v) const { return vertices_[v]; }
    std::span<const Point> vertices() const { return vertices_; }
    const std::array<int, 3> &element(std::size_t e) const { return elements_[e]; }
    bool is_boundary(std::size_t v) const { return boundary_[v]; }
    /// Free-vertex index of vertex v, or -1 on the boundary.
    int free_index(std::size_t v) const { return free_index_[v]; }
    std::size_t free_vertex(std::size_t j) const { return free_vertices_[j]; }

    double element_measure(std::size_t e) const { return measures_[e]; }
    /// Gradients of the local barycentric functions (constant on the element).
    const std::array<Point, 3> &shape_gradients(std::size_t e) const { return gradients_[e]; }

    double domain_measure() const {
        double sum = 0.0;
        for (double m : measures_) sum += m;
        return sum;
    }

    int quadrature_order() const { return dim_ == 1 ? detail::segment_rule().order : detail::triangle_rule().order; }
    std::span<const QuadraturePoint> quadrature() const { return quadrature_; }
    std::size_t points_per_element() const {
        return dim_ == 1 ? detail::segment_rule().weights.size() : detail::triangle_rule().weights.size();
    }

    const StructuredGrid &grid() const { return grid_; }

    /// Element containing x and the barycentric weights of its local vertices.
    /// Points outside the domain are clamped to the nearest cell.
    std::pair<std::size_t, std::array<double, 3>> locate(const Point &x) const {
        const auto &b = grid_.bounds;
        auto cell = [](double t, double lo, double hi, int n, double &local) {
            const double h = (hi - lo) / n;
            int i = static_cast<int>(std::floor((t - lo) / h));
            i = std::clamp(i, 0, n - 1);
            local = std::clamp((t - lo) / h - i, 0.0, 1.0);
            return i;
        };
        double xi = 0.0, eta = 0.0;
        const int i = cell(x[0], b[0], b[1], grid_.cells[0], xi);
        if (dim_ == 1) return {static_cast<std::size_t>(i), {1.0 - xi, xi, 0.0}};
        const int j = cell(x[1], b[2], b[3], grid_.cells[1], eta);
        const std::size_t base = 2 * (static_cast<std::size_t>(j) * grid_.cells[0] + i);
        if (xi >= eta) return {base, {1.0 - xi, xi - eta, eta}};
        return {base + 1, {1.0 - eta, xi, eta - xi}};
    }

private:
    void compute_geometry(std::size_t e) {
        const auto &el = elements_[e];
        std::array<Point, 3> g{};
        double m = 0.0;
        if (dim_ == 1) {
            const double h = vertices_[el[1]][0] - vertices_[el[0]][0];
            m = std::abs(h);
            g[0] = {-1.0 / h, 0.0};
            g[1] = {1.0 / h, 0.0};
        } else {
            const Point &a = vertices_[el[0]], &b = vertices_[el[1]], &c = vertices_[el[2]];
            const double det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
            m = 0.5 * std::abs(det);
            g[1] = {(c[1] - a[1]) / det, -(c[0] - a[0]) / det};
            g[2] = {-(b[1] - a[1]) / det, (b[0] - a[0]) / det};
            g[0] = {-g[1][0] - g[2][0], -g[1][1] - g[2][1]};
        }
        if (!(m > 0.0)) throw Error("fem-core", "Mesh", "element with non-positive measure");
        measures_.push_back(m);
        gradients_.push_back(g);
    }

    void build_quadrature() {
        const auto &rule = dim_ == 1 ? detail::segment_rule() : detail::triangle_rule();
        quadrature_.reserve(elements_.size() * rule.weights.size());
        for (std::size_t e = 0; e < elements_.size(); ++e) {
            const auto &el = elements_[e];
            for (std::size_t q = 0; q < rule.weights.size(); ++q) {
                const auto &bc = rule.barycentric[q];
                Point x{0.0, 0.0};
                for (int a = 0; a < local_count(); ++a)
                    for (int d = 0; d < 2; ++d) x[d] += bc[a] * vertices_[el[a]][d];
                quadrature_.push_back({e, x, rule.weights[q] * measures_[e], bc});
            }
        }
    }

    int dim_;
    std::vector<Point> vertices_;
    std::vector<std::array<int, 3>> elements_;
    std::vector<bool> boundary_;
    StructuredGrid grid_;
    std::vector<int> free_index_;
    std::vector<std::size_t> free_vertices_;
    std::vector<double> measures_;
    std::vector<std::array<Point, 3>> gradients_;
    std::vector<QuadraturePoint> quadrature_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Uniform mesh of [a, b] with n segments; the two endpoints are boundary.
inline MeshPtr build_interval_mesh(double a, double b, int n) {
    if (!(a < b)) throw Error("fem-core", "build_interval_mesh", "require a < b");
    if (n < 2) throw Error("fem-core", "build_interval_mesh", "require n >= 2");
    std::vector<Point> verts(n + 1);
    std::vector<bool> boundary(n + 1, false);
    const double h = (b - a) / n;
    for (int i = 0; i <= n; ++i) verts[i] = {i == n ? b : a + i * h, 0.0};
    boundary[0] = boundary[n] = true;
    std::vector<std::array<int, 3>> elems(n);
    for (int i = 0; i < n; ++i) elems[i] = {i, i + 1, -1};
    return std::make_shared<const Mesh>(1, std::move(verts), std::move(elems), std::move(boundary),
                                        StructuredGrid{{a, b, 0.0, 0.0}, {n, 0}});
}

/// Structured triangulation of [ax,bx] x [ay,by]: each grid cell is split
/// along its lower-left to upper-right diagonal.
inline MeshPtr build_rectangle_mesh(double ax, double bx, double ay, double by, int nx, int ny) {
    if (!(ax < bx) || !(ay < by)) throw Error("fem-core", "build_rectangle_mesh", "degenerate rectangle");
    if (nx < 2 || ny < 2) throw Error("fem-core", "build_rectangle_mesh", "require nx, ny >= 2");
    const double hx = (bx - ax) / nx, hy = (by - ay) / ny;
    std::vector<Point> verts;
    std::vector<bool> boundary;
    verts.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            verts.push_back({i == nx ? bx : ax + i * hx, j == ny ? by : ay + j * hy});
            boundary.push_back(i == 0 || j == 0 || i == nx || j == ny);
        }
    }
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    std::vector<std::array<int, 3>> elems;
    elems.reserve(2 * static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            elems.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            elems.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return std::make_shared<const Mesh>(2, std::move(verts), std::move(elems), std::move(boundary),
                                        StructuredGrid{{ax, bx, ay, by}, {nx, ny}});
}

/// Nested bisection: the same domain with every cell count doubled.
inline MeshPtr refine(const Mesh &mesh) {
    const auto &g = mesh.grid();
    if (mesh.dimension() == 1) return build_interval_mesh(g.bounds[0], g.bounds[1], 2 * g.cells[0]);
    return build_rectangle_mesh(g.bounds[0], g.bounds[1], g.bounds[2], g.bounds[3], 2 * g.cells[0],
                                2 * g.cells[1]);
}

/// Lebesgue measure of {x : in_set(x)}, each element counted by the fraction
/// of its vertices that lie in the set.
template <class Predicate>
double measure_where(const Mesh &mesh, Predicate &&in_set) {
    double sum = 0.0;
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        int hits = 0;
        for (int a = 0; a < mesh.local_count(); ++a) hits += in_set(mesh.vertex(mesh.element(e)[a])) ? 1 : 0;
        sum += mesh.element_measure(e) * hits / mesh.local_count();
    }
    return sum;
}

}  // namespace plapvar
