#include <canon/order.hpp>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace canon;

namespace {

std::vector<CurvePoint> synthetic(double (*f)(double))
{
    std::vector<CurvePoint> c;
    for (double t : geometric_grid(1e1, 1e6, 20)) c.push_back({t, f(t)});
    return c;
}

} // namespace

TEST(Fit, LinearExact)
{
    const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
    const LinearFit f = linear_fit(x, y);
    EXPECT_NEAR(f.slope, 2.0, 1e-14);
    EXPECT_NEAR(f.intercept, 1.0, 1e-14);
    EXPECT_NEAR(f.rms, 0.0, 1e-14);
}

TEST(Fit, MultiAgreesWithEigenNormalEquations)
{
    std::vector<double> a, b, one, y;
    for (int k = 1; k <= 50; ++k) {
        a.push_back(k * std::log(k));
        b.push_back(k);
        one.push_back(1);
        y.push_back(0.5 * a.back() - 2 * k + 3 + 1e-3 * std::sin(k));
    }
    const MultiFit f = multi_fit({a, b, one}, y);
    Eigen::MatrixXd X(50, 3);
    Eigen::VectorXd Y(50);
    for (int k = 0; k < 50; ++k) {
        X(k, 0) = a[k];
        X(k, 1) = b[k];
        X(k, 2) = 1;
        Y(k) = y[k];
    }
    const Eigen::VectorXd c = (X.transpose() * X).ldlt().solve(X.transpose() * Y);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(f.coef[k], c(k), 1e-8);
}

TEST(Fit, GeometricGrid)
{
    const auto g = geometric_grid(1e2, 1e6, 40);
    EXPECT_EQ(g.size(), 160u);
    EXPECT_DOUBLE_EQ(g.front(), 1e2);
    EXPECT_LT(g.back(), 1e6);
    const auto p = geometric_points(1e2, 1e4, 3);
    EXPECT_DOUBLE_EQ(p[2], 1e4);
    EXPECT_NEAR(p[1], 1e3, 1e-9);
}

TEST(OrderFit, ExactPowerLaw)
{
    const auto e = order_fit(synthetic([](double t) { return std::sqrt(t); }));
    EXPECT_NEAR(e.value, 0.5, 1e-6);
    EXPECT_EQ(e.method, OrderMethod::GrowthFit);
    EXPECT_LE(e.lo, e.value);
    EXPECT_GE(e.hi, e.value);
}

TEST(OrderFit, ExponentialTypeHasOrderOne)
{
    EXPECT_NEAR(order_fit(synthetic([](double t) { return 3 * t; })).value, 1.0, 1e-9);
}

TEST(OrderFit, RespectsCapAndWindow)
{
    const auto e = order_fit(synthetic([](double t) { return std::pow(t, 0.3); }), 1e4);
    EXPECT_LE(e.window_hi, 1e4 * (1 + 1e-12));
    EXPECT_NEAR(e.window_lo, e.window_hi / 100, e.window_hi / 100 * 0.13);
    EXPECT_THROW(order_fit(synthetic([](double) { return 0.5; })), std::invalid_argument);
}

TEST(OrderFit, ConstantMatrixTypeFit)
{
    const FiniteRankHamiltonian H({Segment::constant(2, {0.5, 0, 0.5})});
    const auto curve = growth_curve(H, geometric_grid(1e4, 1.0001e6, 20), 1);
    const LinearFit f = type_fit(curve);
    EXPECT_NEAR(f.slope, 1.0, 1e-6);
    EXPECT_NEAR(curve.back().log_norm / curve.back().tau, 1.0, 1e-5);
}

TEST(GrowthCurve, ThreadCountDoesNotChangeBits)
{
    const auto H = string_to_hamiltonian(power_law_string(0.5, 500));
    const auto g = geometric_grid(1e1, 1e5, 10);
    const auto a = growth_curve(H, g, 1), b = growth_curve(H, g, 3);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(a[i].log_norm, b[i].log_norm);
    EXPECT_THROW(growth_curve(H, {2.0, 1.0}), std::invalid_argument);
}

TEST(Coefficients, FactorialGivesOrderOne)
{
    std::vector<Coefficient> c;
    for (int k = 0; k <= 1000; ++k) c.push_back({double(k), -std::lgamma(k + 1.0)});
    EXPECT_NEAR(order_from_coefficients(c).value, 1.0, 0.02);
}

TEST(Coefficients, GaussianGivesOrderZero)
{
    std::vector<Coefficient> c;
    for (int k = 0; k <= 1000; ++k) c.push_back({double(k), -double(k) * k});
    const auto e = order_from_coefficients(c);
    EXPECT_GE(e.value, 0.0);
    EXPECT_LE(e.value, 0.01);
}

TEST(Coefficients, GrowingCoefficientsRejected)
{
    std::vector<Coefficient> c;
    for (int k = 0; k <= 100; ++k) c.push_back({double(k), double(k)});
    EXPECT_THROW(order_from_coefficients(c), std::invalid_argument);
}

TEST(Coefficients, AlternatingStringClosedForm)
{
    const StringSpec s = power_law_string(0.5, 10);
    const auto c = alternating_string_coefficients(s, 3);
    ASSERT_EQ(c.size(), 3u);
    EXPECT_EQ(c[0].k, 0.0);
    EXPECT_EQ(c[0].log_abs, 0.0);
    EXPECT_EQ(c[1].k, 2.0);
    EXPECT_NEAR(c[1].log_abs, std::log(1.0 / 12), 1e-14);
}

// Leading coefficient of entry (1,1) of the product over the first 2j-1
// pieces equals the product of the first 2j-2 lengths.
TEST(Coefficients, AlternatingStringMatchesPolynomial)
{
    const StringSpec s = power_law_string(0.5, 80);
    const auto H = string_to_hamiltonian(s);
    const auto c = alternating_string_coefficients(s, 30);
    for (std::size_t j = 2; j <= 30; ++j) {
        const MatrixPolynomial P = monodromy_poly(H.prefix(2 * j - 1));
        EXPECT_EQ(P.entry_degree(0, 0), 2 * j - 2);
        EXPECT_NEAR(P.leading(0, 0).logmag, c[j - 1].log_abs, 1e-10) << j;
    }
}

TEST(Coefficients, PowerLawOrder)
{
    const StringSpec s = power_law_string(0.5, 10000);
    const auto e = order_from_coefficients(alternating_string_coefficients(s, s.size() / 2 + 1));
    EXPECT_NEAR(e.value, 0.5, 0.02);
}

TEST(ResolutionScale, FinalPair)
{
    const FiniteRankHamiltonian H({Segment::rank_one(1, 0), Segment::rank_one(0.04, 1), Segment::rank_one(0.01, 0)});
    EXPECT_NEAR(resolution_scale(H), 50.0, 1e-12);
}
