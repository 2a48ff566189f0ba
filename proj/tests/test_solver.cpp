#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "plapvar/eigen.hpp"
#include "plapvar/solver.hpp"
#include "support.hpp"

using namespace plapvar;
using plapvar::testing::central_difference;
using plapvar::testing::random_field;
using plapvar::testing::rel_err;

namespace {

constexpr double pi = std::numbers::pi;

Weight shifted_eta() {
    return Weight{[](const Point &x) { return 1.0 + x[0] - 2.0 * x[1]; }, std::numeric_limits<double>::infinity(),
                  "1+x-2y", false};
}

DualVector poisson_load(const MeshPtr &m) {
    return load_vector(m, [](const Point &) { return 1.0; });
}

// Nodal max error of the p = 2 solve for -Laplace u = 2 pi^2 sin(pi x) sin(pi y)
// on the unit square, whose solution is sin(pi x) sin(pi y).
double square_poisson_error(int n) {
    auto m = build_rectangle_mesh(0, 1, 0, 1, n, n);
    const auto h = load_vector(m, [](const Point &x) { return 2 * pi * pi * std::sin(pi * x[0]) * std::sin(pi * x[1]); });
    const auto r = minimize_phi(m, catalog::zero(), h, 2.0);
    EXPECT_TRUE(r.converged);
    double err = 0.0;
    for (std::size_t j = 0; j < r.u.size(); ++j) {
        const auto &x = m->vertex(m->free_vertex(j));
        err = std::max(err, std::abs(r.u[j] - std::sin(pi * x[0]) * std::sin(pi * x[1])));
    }
    return err;
}

}  // namespace

TEST(AssemblePhi, ZeroFieldGivesZero) {
    auto m = build_rectangle_mesh(0, 1, 0, 1, 4, 4);
    std::mt19937_64 rng(1);
    const auto h = load_vector(m, random_field(m, rng));
    for (const auto &spec : {catalog::zero(), catalog::power_law(3.0, 2.5),
                             catalog::eta_phi(shifted_eta(), ComparisonFunction::power(1.5), 5.0, 2.5)})
        EXPECT_EQ(assemble_phi(m, spec, h, DiscreteField(m), 2.5).value(), 0.0) << spec.name;
}

TEST(AssemblePhi, ZeroNonlinearityIsEnergyMinusPairing) {
    auto m = build_interval_mesh(0, 1, 20);
    std::mt19937_64 rng(2);
    const auto h = load_vector(m, random_field(m, rng));
    for (double p : {1.5, 2.0, 3.0}) {
        const auto u = random_field(m, rng);
        const double want = dirichlet_energy(m, u, p) - pairing(h, u);
        EXPECT_NEAR(assemble_phi(m, catalog::zero(), h, u, p).value(), want, 1e-12 * std::max(1.0, std::abs(want)));
    }
}

TEST(AssemblePhi, PowerPerturbationIsNonnegative) {
    for (double p : {2.0, 3.0}) {
        auto m = build_interval_mesh(0, 1, 32);
        const double L = first_eigenpair(m, p).lambda1;
        const double beta = 0.5 * (1.0 + p);
        const auto spec = catalog::power_perturbation(L, beta, p);
        const DualVector h0(m);
        std::mt19937_64 rng(3);
        for (int t = 0; t < 50; ++t) {
            const auto u = random_field(m, rng, std::pow(10.0, t % 5 - 2));
            const double phi = assemble_phi(m, spec, h0, u, p).value();
            const double want = dirichlet_energy(m, u, p) - L / p * lp_integral(m, u, p) + lp_integral(m, u, beta);
            EXPECT_NEAR(phi, want, 1e-10 * std::max(1.0, std::abs(want)));
            EXPECT_GE(phi, -1e-12 * std::max(1.0, dirichlet_energy(m, u, p)));
        }
    }
}

TEST(PhiGradient, MatchesCentralDifferences) {
    struct Case {
        MeshPtr mesh;
        double p, tol;
    };
    const std::vector<Case> cases{{build_interval_mesh(0, 1, 12), 2.0, 1e-5},
                                  {build_rectangle_mesh(0, 1, 0, 1, 5, 5), 2.0, 1e-5},
                                  {build_interval_mesh(0, 1, 12), 1.5, 1e-4},
                                  {build_rectangle_mesh(0, 1, 0, 1, 5, 5), 1.5, 1e-4},
                                  {build_interval_mesh(0, 1, 12), 3.0, 1e-4},
                                  {build_rectangle_mesh(0, 1, 0, 1, 5, 5), 3.0, 1e-4}};
    std::mt19937_64 rng(4);
    for (const auto &c : cases) {
        const auto spec = catalog::eta_phi(shifted_eta(), ComparisonFunction::power(0.5 * (1.0 + c.p)), 7.0, c.p);
        for (int t = 0; t < 20; ++t) {
            const auto u = random_field(c.mesh, rng);
            const auto h = load_vector(c.mesh, random_field(c.mesh, rng));
            const auto g = phi_gradient(c.mesh, spec, h, u, c.p);
            auto J = [&](const DiscreteField &v) { return assemble_phi(c.mesh, spec, h, v, c.p).value(); };
            double err = 0.0, scale = 0.0;
            for (std::size_t j = 0; j < u.size(); ++j) {
                err = std::max(err, std::abs(g[j] - central_difference(J, u, j, 1e-6)));
                scale = std::max(scale, std::abs(g[j]));
            }
            EXPECT_LT(err / scale, c.tol) << "p = " << c.p << " dim " << c.mesh->dimension();
        }
    }
}

TEST(MinimizePhi, PowerPerturbationRecoversZero) {
    for (double p : {2.0, 3.0}) {
        auto m = build_interval_mesh(0, 1, 64);
        const double L = first_eigenpair(m, p).lambda1;
        const auto spec = catalog::power_perturbation(L, 0.5 * (1.0 + p), p);
        const DualVector h0(m);
        const auto r = minimize_phi(m, spec, h0, p);
        EXPECT_TRUE(r.converged);
        EXPECT_LT(r.u.norm(), 1e-6);
        EXPECT_NEAR(r.phi_value.value(), 0.0, 1e-10);
        const auto res = verify_weak_solution(m, r.u, spec, h0, p);
        EXPECT_LT(res.max_abs, 1e-10);
    }
}

TEST(MinimizePhi, PoissonOnInterval) {
    auto m = build_interval_mesh(0, 1, 256);
    const auto h = poisson_load(m);
    const auto r = minimize_phi(m, catalog::zero(), h, 2.0);
    ASSERT_TRUE(r.converged);
    double err = 0.0;
    for (std::size_t j = 0; j < r.u.size(); ++j) {
        const double x = m->vertex(m->free_vertex(j))[0];
        err = std::max(err, std::abs(r.u[j] - x * (1.0 - x) / 2.0));
    }
    EXPECT_LT(err, 1e-4);
    const auto res = verify_weak_solution(m, r.u, catalog::zero(), h, 2.0);
    EXPECT_LT(res.max_relative, 1e-8);
}

TEST(MinimizePhi, SecondOrderNodalConvergenceOnSquare) {
    const double e8 = square_poisson_error(8), e16 = square_poisson_error(16);
    EXPECT_GE(e8 / e16, 3.5);
    EXPECT_LE(e8 / e16, 4.5);
}

TEST(MinimizePhi, LinearCoerciveCaseMatchesScaledEigenfunction) {
    // With f = -lambda1 u and h = eps M phi1, the discrete equation
    // K u + lambda1 M u = eps M phi1 is solved by u = eps / (2 lambda1) phi1.
    auto m = build_interval_mesh(0, 1, 128);
    const auto eig = first_eigenpair(m, 2.0);
    const double eps = 0.01;
    DualVector h = load_vector(m, eig.phi1);
    h *= eps;
    const auto r = minimize_phi(m, catalog::power_law(-eig.lambda1, 2.0), h, 2.0);
    ASSERT_TRUE(r.converged);
    EXPECT_LT(r.stationarity, 1e-8);
    const auto want = eps / (2.0 * eig.lambda1) * eig.phi1;
    EXPECT_LT((r.u - want).max_abs(), 1e-8 * want.max_abs() + 1e-12);
}

TEST(MinimizePhi, StronglyCoerciveNonlinearCase) {
    for (double p : {1.5, 3.0}) {
        auto m = build_rectangle_mesh(0, 1, 0, 1, 12, 12);
        const auto eig = first_eigenpair(m, p);
        DualVector h = load_vector(m, eig.phi1);
        h *= 0.01;
        const auto spec = catalog::power_law(-eig.lambda1, p);
        const auto r = minimize_phi(m, spec, h, p);
        EXPECT_TRUE(r.converged) << p << " " << r.stop_reason;
        EXPECT_LT(r.stationarity, 1e-8);

        // Local-minimum probe along every hat.
        const double phi = r.phi_value.value();
        const double scale = std::max(1.0, r.u.max_abs());
        for (std::size_t j = 0; j < r.u.size(); ++j) {
            for (double t : {-1e-2, -1e-3, 1e-3, 1e-2}) {
                auto v = r.u;
                v[j] += t * scale;
                EXPECT_GE(assemble_phi(m, spec, h, v, p).value(), phi - 1e-14 * std::max(1.0, std::abs(phi)));
            }
        }
    }
}

TEST(MinimizePhi, ResidualMatchesStationarityWithoutTruncation) {
    auto m = build_rectangle_mesh(0, 1, 0, 1, 10, 10);
    const double p = 3.0;
    const auto spec = catalog::eta_phi(shifted_eta(), ComparisonFunction::power(2.0), -5.0, p);
    const auto h = poisson_load(m);
    SolveOptions o;
    o.max_iterations = 6;
    o.stationarity_tol = 0.0;
    const auto r = minimize_phi(m, spec, h, p, o);
    const auto res = verify_weak_solution(m, r.u, spec, h, p);
    EXPECT_GE(res.R, r.u.max_abs());
    EXPECT_NEAR(res.max_scaled, r.stationarity, 1e-10);
}

TEST(MinimizePhi, UnboundedBelowIsReported) {
    auto m = build_interval_mesh(0, 1, 32);
    const auto eig = first_eigenpair(m, 2.0);
    const auto h = load_vector(m, eig.phi1);
    try {
        minimize_phi(m, catalog::power_law(2.0 * eig.lambda1, 2.0), h, 2.0);
        FAIL() << "no throw";
    } catch (const Error &e) {
        EXPECT_EQ(e.module(), "solver");
        EXPECT_NE(std::string(e.what()).find("unbounded below"), std::string::npos) << e.what();
    }
}

TEST(MinimizePhi, MultistartIsSeeded) {
    auto m = build_interval_mesh(0, 1, 32);
    SolveOptions o;
    o.multistart = true;
    o.starts = 3;
    o.seed = 9;
    const auto spec = catalog::power_law(-3.0, 3.0);
    const auto h = poisson_load(m);
    const auto a = minimize_phi(m, spec, h, 3.0, o), b = minimize_phi(m, spec, h, 3.0, o);
    EXPECT_EQ(a.starts, 4);
    for (std::size_t j = 0; j < a.u.size(); ++j) EXPECT_EQ(a.u[j], b.u[j]);
}

TEST(MinimizePhi, RejectsForeignLoad) {
    auto m = build_interval_mesh(0, 1, 8), other = build_interval_mesh(0, 1, 8);
    EXPECT_THROW(minimize_phi(m, catalog::zero(), DualVector(other), 2.0), Error);
    EXPECT_THROW(minimize_phi(m, catalog::zero(), DualVector(m), 1.0), Error);
}

TEST(Truncation, Bounds) {
    for (double R : {0.1, 1.0, 7.5}) {
        const auto th = make_truncation(R);
        EXPECT_EQ(th(0.0), 1.0);
        EXPECT_EQ(th(2 * R), 0.0);
        EXPECT_EQ(th(3 * R), 0.0);
        EXPECT_EQ(th(-3 * R), 0.0);
        double max_slope = 0.0;
        for (int i = 0; i <= 10000; ++i) {
            const double s = -4 * R + 8 * R * i / 10000.0;
            const double v = th(s);
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
            if (std::abs(s) <= R) {
                EXPECT_EQ(v, 1.0);
            }
            if (std::abs(s) >= 2 * R) {
                EXPECT_EQ(v, 0.0);
            }
            max_slope = std::max(max_slope, std::abs(th.derivative(s)));
            const double d = 1e-7 * R;
            EXPECT_NEAR(th.derivative(s), (th(s + d) - th(s - d)) / (2 * d), 1e-5 / R);
        }
        EXPECT_LE(max_slope, 2.0 / R);
    }
    EXPECT_THROW(make_truncation(0.0), Error);
    EXPECT_THROW(make_truncation(-1.0), Error);
}

TEST(TruncatedBasis, InactiveTruncationGivesHats) {
    auto m = build_rectangle_mesh(0, 1, 0, 1, 5, 5);
    std::mt19937_64 rng(6);
    const auto u = random_field(m, rng, 2.0);
    const auto basis = truncated_test_basis(m, u, 2.0);
    ASSERT_EQ(basis.size(), m->free_count());
    for (std::size_t j = 0; j < basis.size(); ++j) {
        const auto hat = unit_field(m, j);
        for (std::size_t k = 0; k < hat.size(); ++k) EXPECT_EQ(basis[j][k], hat[k]);
    }
}

TEST(TruncatedBasis, LargeValuesAreCutOff) {
    auto m = build_interval_mesh(0, 1, 10);
    const double R = 0.5;
    std::mt19937_64 rng(7);
    auto u = random_field(m, rng, 2.0 * R);
    u[3] = 3 * R;
    const auto basis = truncated_test_basis(m, u, R);
    EXPECT_EQ(basis[3][3], 0.0);
    for (std::size_t j = 0; j < basis.size(); ++j)
        for (std::size_t k = 0; k < u.size(); ++k) EXPECT_LE(std::abs(basis[j][k]), std::abs(unit_field(m, j)[k]));
}

TEST(EstimateLambdaU, ZeroAndConstantSources) {
    auto m = build_interval_mesh(0, 1, 32);
    std::mt19937_64 rng(8);
    const auto u = random_field(m, rng);
    EXPECT_EQ(estimate_lambda_u(m, u, catalog::zero(), 2.0, 2.0), 0.0);
    const auto one = catalog::from_functions("one", [](const Point &, double) { return 1.0; });
    const double v = estimate_lambda_u(m, u, one, 2.0, 2.0);
    EXPECT_GT(v, 0.0);
    EXPECT_TRUE(std::isfinite(v));
    // A single hat of width 2h: integral h, gradient norm sqrt(2/h).
    const double hh = 1.0 / 32;
    EXPECT_GE(v, hh / std::sqrt(2.0 / hh) * (1 - 1e-12));
}

TEST(EstimateLambdaU, MonotoneUnderBasisRefinement) {
    for (auto m : {build_interval_mesh(0, 1, 64), build_rectangle_mesh(0, 1, 0, 1, 16, 16)}) {
        std::mt19937_64 rng(9);
        const auto u = random_field(m, rng, 3.0);
        const auto spec = catalog::eta_phi(shifted_eta(), ComparisonFunction::power(1.5), 4.0, 2.0);
        double prev = 0.0;
        for (int min_cells : {64, 32, 16, 8, 4, 2}) {
            const double v = estimate_lambda_u(m, u, spec, 2.0, 2.0, min_cells);
            EXPECT_GE(v, prev - 1e-12);
            prev = v;
        }
    }
}

TEST(VerifyWeakSolution, EigenpairSelfTest) {
    for (double p : {2.0, 3.0}) {
        for (auto m : {build_interval_mesh(0, 1, 256), build_rectangle_mesh(0, 1, 0, 1, 16, 16)}) {
            const auto eig = first_eigenpair(m, p);
            const auto res = verify_weak_solution(m, eig.phi1, catalog::power_law(eig.lambda1, p), DualVector(m), p);
            EXPECT_LT(res.max_relative, 1e-6) << p;
            EXPECT_EQ(res.basis_size, m->free_count());
        }
    }
}
