#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "plapvar/nonlinearity.hpp"
#include "support.hpp"

using namespace plapvar;
using plapvar::testing::rel_err;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double lambda1 = 9.8696044010893586;

// Branch formulas of the oscillating example with d = 1, written out
// independently of the catalog.
double inner_f(double s) { return s / 2.0 * (10.0 * s * s - 9.0); }
double outer_f(double s) {
    const double sg = s > 0 ? 1.0 : -1.0;
    return (std::sin(pi * s / 2.0) - sg / 2.0) * std::exp(2.0 / pi * std::cos(pi * s / 2.0) + (std::abs(s) - 1.0) / 2.0);
}
double inner_F(double s) { return -s * s / 4.0 * (9.0 - 5.0 * s * s); }
double outer_F(double s) {
    return -std::exp(2.0 / pi * std::cos(pi * s / 2.0)) * std::exp((std::abs(s) - 1.0) / 2.0);
}

Weight step_eta() {
    return Weight{[](const Point &x) { return x[0] < 0.25 ? 1.0 : -1.0; }, std::numeric_limits<double>::infinity(),
                  "step", false};
}
Weight smooth_weight() {
    return Weight{[](const Point &x) { return -std::exp(-10.0 * (x[0] - 0.5) * (x[0] - 0.5)); }, 2.0, "gauss", false};
}

std::vector<NonlinearitySpec> catalog_specs(double p) {
    const double alpha = 1.0 + (p - 1.0) / 2.0;
    return {catalog::zero(),
            catalog::power_law(-3.0, p),
            catalog::paper_example(Weight::constant_value(1.0)),
            catalog::paper_example(Weight{[](const Point &x) { return x[0] * x[0]; }, 1.0, "x^2", false}),
            catalog::power_perturbation(lambda1, (1.0 + p) / 2.0, p),
            catalog::eta_phi(step_eta(), ComparisonFunction::power(alpha), lambda1, p),
            catalog::eta_phi(smooth_weight(), ComparisonFunction::power_log(alpha), lambda1, p),
            catalog::eta_linear(step_eta(), lambda1, p),
            catalog::example4(smooth_weight(), ComparisonFunction::power(alpha), lambda1, p)};
}

bool near_kink(const NonlinearitySpec &s, double t) {
    for (double k : s.kinks)
        if (std::abs(t - k) < 1e-3) return true;
    return false;
}

}  // namespace

TEST(PaperExample, HandValues) {
    const auto spec = catalog::paper_example(Weight::constant_value(1.0));
    const Point x{0.3, 0.0};
    EXPECT_EQ(eval_f(spec, x, 0.0), 0.0);
    EXPECT_NEAR(inner_f(1.0), 0.5, 1e-15);
    EXPECT_NEAR(outer_f(1.0), 0.5, 1e-15);
    EXPECT_NEAR(eval_f(spec, x, 1.0), 0.5, 1e-15);
    EXPECT_NEAR(inner_F(1.0), -1.0, 1e-15);
    EXPECT_NEAR(outer_F(1.0), -1.0, 1e-15);
    EXPECT_NEAR(eval_F(spec, x, 1.0).value(), -1.0, 1e-15);
    EXPECT_EQ(eval_F(spec, x, 0.0).value(), 0.0);
    for (double s : {0.1, 0.5, 0.99}) EXPECT_EQ(eval_f(spec, x, -s), -eval_f(spec, x, s));
    for (double s : {-7.3, -2.0, -0.4, 0.6, 3.1, 12.0}) {
        const bool in = std::abs(s) < 1.0;
        EXPECT_NEAR(eval_f(spec, x, s), in ? inner_f(s) : outer_f(s), 1e-12 * std::max(1.0, std::abs(outer_f(s))));
        EXPECT_NEAR(eval_F(spec, x, s).value(), in ? inner_F(s) : outer_F(s), 1e-12 * std::max(1.0, std::abs(outer_F(s))));
    }
}

TEST(PaperExample, BranchContinuity) {
    const auto spec = catalog::paper_example(Weight::constant_value(1.0));
    const Point x{0.5, 0.0};
    for (double k : {-1.0, 1.0}) {
        const double below = std::nextafter(k, 0.0), above = std::nextafter(k, 2.0 * k);
        EXPECT_NEAR(eval_f(spec, x, below), eval_f(spec, x, above), 1e-12);
        EXPECT_NEAR(eval_F(spec, x, below).value(), eval_F(spec, x, above).value(), 1e-12);
    }
}

TEST(PaperExample, PotentialNonpositive) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> us(-50.0, 50.0), ux(0.0, 1.0);
    const auto flat = catalog::paper_example(Weight::constant_value(1.0));
    const auto weighted =
        catalog::paper_example(Weight{[](const Point &x) { return std::abs(std::sin(5 * x[0])); }, 1.0, "", false});
    for (int i = 0; i < 10000; ++i) {
        const Point x{ux(rng), ux(rng)};
        const double s = us(rng);
        EXPECT_LE(eval_F(flat, x, s).value(), 0.0);
        EXPECT_LE(eval_F(weighted, x, s).value(), 0.0);
    }
}

TEST(Catalog, PotentialDifferentiatesToF) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> us(-20.0, 20.0), ux(0.0, 1.0);
    for (double p : {1.5, 2.0, 3.0}) {
        for (const auto &spec : catalog_specs(p)) {
            int checked = 0;
            while (checked < 100) {
                const Point x{ux(rng), 0.0};
                const double s = us(rng);
                if (near_kink(spec, s) || std::abs(s) < 1e-3) continue;
                const double eps = 1e-6;
                const double fd = (eval_F(spec, x, s + eps).value() - eval_F(spec, x, s - eps).value()) / (2.0 * eps);
                const double f = eval_f(spec, x, s);
                EXPECT_LT(std::abs(fd - f) / std::max(std::abs(f), 1.0), 1e-5) << spec.name << " p=" << p << " s=" << s;
                ++checked;
            }
        }
    }
}

TEST(Catalog, PotentialVanishesAtZero) {
    for (const auto &spec : catalog_specs(2.5))
        for (double x : {0.1, 0.7}) EXPECT_EQ(eval_F(spec, Point{x, 0.0}, 0.0).value(), 0.0) << spec.name;
}

TEST(Catalog, QuadratureMatchesClosedForm) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> us(-15.0, 15.0), ux(0.0, 1.0);
    for (double p : {1.5, 3.0}) {
        for (const auto &spec : catalog_specs(p)) {
            for (int i = 0; i < 20; ++i) {
                const Point x{ux(rng), 0.0};
                const double s = us(rng);
                const double a = eval_F(spec, x, s).value(), b = eval_F_quadrature(spec, x, s).value();
                EXPECT_LE(std::abs(a - b), 1e-8 * std::max(1.0, std::abs(a))) << spec.name << " s=" << s;
            }
        }
    }
}

TEST(Catalog, ClosedFormsAsStated) {
    const double p = 3.0, beta = 2.0, alpha = 2.0;
    const Point x{0.1, 0.0}, y{0.6, 0.0};
    const auto pp = catalog::power_perturbation(lambda1, beta, p);
    const auto ep = catalog::eta_phi(step_eta(), ComparisonFunction::power(alpha), lambda1, p);
    const auto el = catalog::eta_linear(step_eta(), lambda1, p);
    for (double s : {-4.0, -0.5, 0.25, 3.0}) {
        const double a = std::abs(s);
        EXPECT_LT(rel_err(eval_f(pp, x, s), lambda1 * a * s - beta * s), 1e-13);
        EXPECT_LT(rel_err(eval_F(pp, x, s).value(), lambda1 * a * a * a / p - a * a), 1e-13);
        EXPECT_LT(rel_err(eval_F(ep, x, s).value(), lambda1 * a * a * a / p + a * a), 1e-13);
        EXPECT_LT(rel_err(eval_F(ep, y, s).value(), lambda1 * a * a * a / p - a * a), 1e-13);
        EXPECT_LT(rel_err(eval_F(el, y, s).value(), lambda1 * a * a * a / p - a), 1e-13);
    }
}

TEST(EvalG, CancelsTheEigenvalueTerm) {
    const double p = 2.5;
    const auto phi = ComparisonFunction::power(1.5);
    const auto ep = catalog::eta_phi(step_eta(), phi, lambda1, p);
    const auto pp = catalog::power_perturbation(lambda1, 1.7, p);
    for (double s : {-1e6, -3.0, 0.5, 40.0, 1e9}) {
        for (double xv : {0.1, 0.9}) {
            const Point x{xv, 0.0};
            const double want = (xv < 0.25 ? 1.0 : -1.0) * phi(s);
            EXPECT_LE(std::abs(eval_G(ep, x, s, lambda1, p).value() - want), 1e-12 * std::max(1.0, std::abs(want)));
        }
        EXPECT_LE(std::abs(eval_G(pp, Point{}, s, lambda1, p).value() + std::pow(std::abs(s), 1.7)),
                  1e-12 * std::pow(std::abs(s), 1.7));
    }
    EXPECT_EQ(eval_G(ep, Point{}, 0.0, lambda1, p).value(), 0.0);
}

TEST(EvalG, GenericPathSubtractsPower) {
    const auto spec = catalog::from_functions(
        "cubic", [](const Point &, double s) { return s * s * s; },
        [](const Point &, double s) { return s * s * s * s / 4.0; });
    EXPECT_NEAR(eval_G(spec, Point{}, 2.0, 3.0, 2.0).value(), 4.0 - 6.0, 1e-14);
}

TEST(EvalF, QuadratureWithoutClosedForm) {
    const auto spec = catalog::from_functions("cos", [](const Point &, double s) { return std::cos(s); });
    for (double s : {-3.0, 0.7, 10.0}) EXPECT_NEAR(eval_F(spec, Point{}, s).value(), std::sin(s), 1e-10);
}

TEST(EvalF, OverflowBecomesSentinel) {
    const auto spec = catalog::from_functions("grow", nullptr, [](const Point &, double s) { return std::exp(s); });
    EXPECT_TRUE(eval_F(spec, Point{}, 1000.0).is_plus_infinity());
    const auto neg = catalog::from_functions("sink", nullptr, [](const Point &, double s) { return -std::exp(s); });
    EXPECT_TRUE(eval_G(neg, Point{}, 1000.0, 1.0, 2.0).is_minus_infinity());
}

TEST(EvalF, RejectsUndefinedPotential) {
    const auto spec = catalog::from_functions("nan", nullptr, [](const Point &, double) { return std::nan(""); });
    EXPECT_THROW(eval_F(spec, Point{}, 1.0), Error);
}

TEST(EvalFunction, NonFiniteNamesThePoint) {
    const auto spec = catalog::from_functions("bad", [](const Point &, double s) { return 1.0 / s; });
    try {
        eval_f(spec, Point{0.25, 0.0}, 0.0);
        FAIL() << "expected an error";
    } catch (const Error &e) {
        EXPECT_EQ(e.module(), "nonlinearity");
        EXPECT_NE(std::string(e.what()).find("0.25"), std::string::npos) << e.what();
    }
}

TEST(Catalog, RejectsOutOfRangeParameters) {
    EXPECT_THROW(catalog::power_perturbation(lambda1, 1.0, 2.0), Error);
    EXPECT_THROW(catalog::power_perturbation(lambda1, 2.0, 2.0), Error);
    EXPECT_THROW(catalog::power_perturbation(lambda1, 1.5, 1.0), Error);
    EXPECT_THROW(catalog::power_perturbation(-1.0, 1.5, 2.0), Error);
    EXPECT_THROW(catalog::eta_phi(step_eta(), ComparisonFunction::power(3.0), lambda1, 2.0), Error);
    Weight bad = step_eta();
    bad.exponent = 0.5;
    EXPECT_THROW(catalog::eta_linear(bad, lambda1, 2.0), Error);
    EXPECT_THROW(catalog::paper_example(bad), Error);
    EXPECT_THROW(ComparisonFunction::power(0.5), Error);
    EXPECT_THROW(ComparisonFunction::power_log(1.0), Error);
}

TEST(Catalog, Metadata) {
    EXPECT_EQ(catalog::eta_phi(step_eta(), ComparisonFunction::power_log(1.5), lambda1, 2.0).kinks,
              (std::vector<double>{-1.0, 1.0}));
    EXPECT_TRUE(catalog::paper_example(Weight::constant_value(1.0)).autonomous);
    EXPECT_FALSE(catalog::eta_linear(step_eta(), lambda1, 2.0).autonomous);
    EXPECT_EQ(catalog::paper_example(Weight::constant_value(2.0)).kinks, (std::vector<double>{-1.0, 1.0}));
    EXPECT_FALSE(catalog::paper_example(Weight::constant_value(1.0)).growth_exponent.has_value());
    EXPECT_EQ(catalog::power_perturbation(lambda1, 1.5, 2.0).parameters.at("beta"), 1.5);
}

TEST(Example4, ProductReading) {
    // F = (lambda1/p + a) |s|^p + (phi |s|^p)^{1/2}: where a = 0 the
    // remainder over |s|^p tends to 0, where a < 0 to a.
    const double p = 2.0;
    const auto phi = ComparisonFunction::power(1.5);
    const auto spec = catalog::example4(smooth_weight(), phi, lambda1, p);
    const Point x{0.5, 0.0};
    for (double s : {3.0, -7.0}) {
        const double want = (lambda1 / p - 1.0) * s * s + std::sqrt(phi(s)) * std::abs(s);
        EXPECT_LT(rel_err(eval_F(spec, x, s).value(), want), 1e-13);
    }
    const double s = 1e16;
    EXPECT_NEAR(eval_G(spec, x, s, lambda1, p).value() / (s * s), -1.0, 1e-3);
}
