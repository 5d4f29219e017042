#include <canon/jacobi.hpp>

#include <gtest/gtest.h>

#include "oracles.hpp"

#include <numbers>
#include <thread>

using namespace canon;

namespace {

struct RandomJacobi {
    std::vector<double> q, rho;
};

// Rapidly growing rho keeps the truncation limit-circle-like.
RandomJacobi random_jacobi(std::size_t n)
{
    RandomJacobi r;
    for (std::size_t j = 1; j <= n; ++j) {
        r.q.push_back(oracle::uniform(-1, 1));
        r.rho.push_back(std::pow(static_cast<double>(j), 2.5) * oracle::uniform(0.5, 2));
    }
    return r;
}

cplx to_c(const std::complex<long double>& v) { return {static_cast<double>(v.real()), static_cast<double>(v.imag())}; }

} // namespace

TEST(Polys, FirstValues)
{
    const JacobiMatrix Jm({0.5, -1.0, 2.0}, {2.0, 3.0, 4.0});
    const cplx z(1.5, 0.25);
    const PolyValues v = polys_at(Jm, z, 3);
    EXPECT_LE(std::abs(v.P[0].to_complex() - 1.0), 1e-15);
    EXPECT_LE(std::abs(v.P[1].to_complex() - (z - 0.5) / 2.0), 1e-15);
    EXPECT_TRUE(v.Q[0].re.is_zero() && v.Q[0].im.is_zero());
    EXPECT_LE(std::abs(v.Q[1].to_complex() - 0.5), 1e-15);
}

TEST(Polys, MatchLongDoubleRecurrence)
{
    const auto r = random_jacobi(30);
    const JacobiMatrix Jm(r.q, r.rho);
    const cplx z(0.7, -2.0);
    const PolyValues v = polys_at(Jm, z, 30);
    const auto o = oracle::jacobi_polys(r.q, r.rho, z, 30);
    for (std::size_t k = 0; k < 30; ++k) {
        EXPECT_LE(std::abs(v.P[k].to_complex() - to_c(o.P[k])), 1e-12 * std::abs(to_c(o.P[k])) + 1e-300);
        EXPECT_LE(std::abs(v.Q[k].to_complex() - to_c(o.Q[k])), 1e-12 * std::abs(to_c(o.Q[k])) + 1e-300);
    }
}

// rho_n (P_{n+1} Q_n - P_n Q_{n+1}) = -1 for every n and z.
TEST(Polys, WronskianConstant)
{
    for (int rep = 0; rep < 20; ++rep) {
        const auto r = random_jacobi(30);
        const JacobiMatrix Jm(r.q, r.rho);
        for (cplx z : {cplx(0), cplx(0.3, 1.0), cplx(-4, 0.1)}) {
            const auto o = oracle::jacobi_polys(r.q, r.rho, z, 30);
            const PolyValues v = polys_at(Jm, z, 30);
            for (std::size_t n = 1; n < 30; ++n) {
                const std::complex<long double> w =
                    static_cast<long double>(r.rho[n - 1]) * (o.P[n] * o.Q[n - 1] - o.P[n - 1] * o.Q[n]);
                EXPECT_LE(std::abs(to_c(w) + 1.0), 1e-12);
                // library values, combined in extended precision
                auto L = [](const LogComplex& c) {
                    const cplx x = c.to_complex();
                    return std::complex<long double>(x.real(), x.imag());
                };
                const std::complex<long double> wl =
                    static_cast<long double>(r.rho[n - 1]) *
                    (L(v.P[n]) * L(v.Q[n - 1]) - L(v.P[n - 1]) * L(v.Q[n]));
                EXPECT_LE(std::abs(to_c(wl) + 1.0), 1e-12) << n;
            }
        }
    }
}

TEST(JacobiToHamiltonian, FreeCase)
{
    const JacobiMatrix Jm(std::vector<double>(20, 0.0), std::vector<double>(20, 1.0));
    const auto H = jacobi_to_hamiltonian(Jm, 20);
    EXPECT_EQ(H[0].delta(), 1.0);
    EXPECT_EQ(H[0].phi(), 0.0);
    for (std::size_t j = 1; j < H.size(); ++j)
        EXPECT_NEAR(projection_distance(H[j - 1].phi(), H[j].phi()), 1.0, 1e-15);
    EXPECT_LE(theorem4_residual(Jm, H), 1e-14);
}

TEST(JacobiToHamiltonian, ZeroDiagonalGivesOrthogonalAngles)
{
    std::vector<double> rho;
    for (int j = 1; j <= 40; ++j) rho.push_back(j * j * oracle::uniform(0.5, 2));
    const JacobiMatrix Jm(std::vector<double>(40, 0.0), rho);
    const auto H = jacobi_to_hamiltonian(Jm, 40);
    for (std::size_t j = 1; j < H.size(); ++j)
        EXPECT_NEAR(projection_distance(H[j - 1].phi(), H[j].phi()), 1.0, 1e-12);
}

TEST(JacobiToHamiltonian, RandomRoundTrip)
{
    for (int rep = 0; rep < 50; ++rep) {
        const auto r = random_jacobi(30);
        const JacobiMatrix Jm(r.q, r.rho);
        EXPECT_LE(theorem4_residual(Jm, jacobi_to_hamiltonian(Jm, 30)), 1e-10);
    }
}

TEST(JacobiToHamiltonian, PerturbedAngleShowsUp)
{
    const auto r = random_jacobi(30);
    const JacobiMatrix Jm(r.q, r.rho);
    const auto H = jacobi_to_hamiltonian(Jm, 30);
    std::vector<Segment> seg = H.segments();
    seg[10] = Segment::rank_one(seg[10].delta(), seg[10].phi() + 1e-3);
    const double res = theorem4_residual(Jm, FiniteRankHamiltonian(seg));
    EXPECT_GT(res, 1e-5);
    EXPECT_LT(res, 1e-1);
}

TEST(JacobiToHamiltonian, DeltasMatchLongDoubleOracle)
{
    const auto r = random_jacobi(30);
    const JacobiMatrix Jm(r.q, r.rho);
    const auto H = jacobi_to_hamiltonian(Jm, 30);
    const auto o = oracle::jacobi_polys(r.q, r.rho, 0.0, 30);
    for (std::size_t k = 0; k < 30; ++k) {
        const long double want = std::norm(o.P[k]) + std::norm(o.Q[k]);
        EXPECT_NEAR(H[k].delta() / static_cast<double>(want), 1.0, 1e-12);
    }
}

TEST(BirthDeath, Rates)
{
    const JacobiMatrix Jm = birth_death({2.0}, {1.0}, 5);
    EXPECT_EQ(Jm.q(1), 1.0);
    EXPECT_NEAR(Jm.rho(1), std::sqrt(3.0), 1e-15);
    // q_2 = lambda_1 + mu_1 = 2 + 3, rho_2 = sqrt(lambda_1 mu_2) = sqrt(2 * 4)
    EXPECT_EQ(Jm.q(2), 5.0);
    EXPECT_NEAR(Jm.rho(2), std::sqrt(8.0), 1e-15);
}

TEST(BirthDeath, DeathRateAtZeroIgnoresA)
{
    const JacobiMatrix Jm = birth_death({-0.5, 3.0}, {1.0, 1.0}, 3);
    EXPECT_EQ(Jm.q(1), 1.0); // lambda_0 = 1, mu_0 = 0
}

TEST(BirthDeath, NonpositiveRateRejected)
{
    EXPECT_THROW(birth_death({0, 0, 0, 0}, {1, 1, 0, 0}, 10), std::invalid_argument);
    EXPECT_THROW(birth_death({1.0}, {1.0, 2.0}, 10), std::invalid_argument);
}

TEST(BirthDeath, LazyGenerationIsThreadSafe)
{
    const JacobiMatrix Jm = birth_death({0.0, 0.0, 0.0}, {1.0 / 3, 1.0 / 3, 2.0 / 3}, 10);
    std::vector<double> a(4);
    {
        std::vector<std::jthread> pool;
        for (int t = 0; t < 4; ++t) pool.emplace_back([&, t] { a[t] = Jm.rho(5000 + t); });
    }
    const JacobiMatrix ref = birth_death({0.0, 0.0, 0.0}, {1.0 / 3, 1.0 / 3, 2.0 / 3}, 5004);
    for (int t = 0; t < 4; ++t) EXPECT_EQ(a[t], ref.rho(5000 + t));
}

TEST(BirthDeath, ThreeParameterRoundTrip)
{
    const JacobiMatrix Jm = birth_death({0.0, 0.0, 0.0}, {1.0 / 3, 1.0 / 3, 2.0 / 3}, 60);
    EXPECT_LE(theorem4_residual(Jm, jacobi_to_hamiltonian(Jm, 50)), 1e-10);
}

TEST(Berezanskii, GeometricByHand)
{
    std::vector<double> rho;
    for (int j = 1; j <= 10; ++j) rho.push_back(std::pow(2.0, j));
    const auto d = berezanskii_deltas(rho, 4);
    EXPECT_DOUBLE_EQ(d[0], 1.0);
    EXPECT_DOUBLE_EQ(d[1], 0.25);
    EXPECT_DOUBLE_EQ(d[2], 0.25);
    EXPECT_DOUBLE_EQ(d[3], 1.0 / 16);
}

TEST(Berezanskii, UnitRho)
{
    for (double d : berezanskii_deltas(std::vector<double>(30, 1.0), 30)) EXPECT_DOUBLE_EQ(d, 1.0);
}

TEST(Berezanskii, AgreesWithPolynomialDeltas)
{
    for (auto rule : {0, 1}) {
        std::vector<double> rho;
        for (int j = 1; j <= 200; ++j) rho.push_back(rule ? std::pow(2.0, j) : double(j) * j);
        const JacobiMatrix Jm(std::vector<double>(200, 0.0), rho);
        const auto H = jacobi_to_hamiltonian(Jm, 200);
        const auto d = berezanskii_deltas(rho, 200);
        for (std::size_t j = 0; j < 200; ++j) EXPECT_NEAR(d[j] / H[j].delta(), 1.0, 1e-10) << j;
        for (std::size_t j = 0; j + 1 < 200; ++j) EXPECT_NEAR(std::sqrt(d[j] * d[j + 1]) * rho[j], 1.0, 1e-10);
    }
}

TEST(ConvergenceExponent, PowerAndGeometric)
{
    std::vector<double> p4, g, pl;
    for (int j = 1; j <= 100000; ++j) {
        p4.push_back(std::pow(double(j), 4));
        pl.push_back(double(j) * j * std::log(j + 1.0));
    }
    for (int j = 1; j <= 600; ++j) g.push_back(std::pow(2.0, j));
    EXPECT_NEAR(convergence_exponent(p4, 100000).value, 0.25, 0.01);
    EXPECT_LE(convergence_exponent(g, 600).value, 0.01);
    EXPECT_NEAR(convergence_exponent(pl, 100000).value, 0.5, 0.03);
    EXPECT_THROW(convergence_exponent({5, 4, 3, 2, 1, 1, 1, 1, 1, 1, 1}, 11), std::invalid_argument);
}

TEST(OrderLowerBound, PowerRho)
{
    for (int ell : {2, 3, 4}) {
        const JacobiMatrix Jm([ell](std::size_t j) { return std::pair{0.0, std::pow(double(j), ell)}; });
        EXPECT_NEAR(jacobi_order_lower_bound(Jm, 100000).value, 1.0 / ell, 0.02) << ell;
    }
    std::vector<double> rho;
    for (int j = 1; j <= 1000; ++j) rho.push_back(std::pow(2.0, j));
    const auto e = jacobi_order_lower_bound(JacobiMatrix(std::vector<double>(1000, 0.0), rho), 1000);
    EXPECT_LE(e.value, 0.01);
}

TEST(DeltaExponent, BergValent)
{
    const JacobiMatrix Jm = birth_death({-0.25, 0, 0, 0.25}, {0.25, 0.5, 0.5, 0.75}, 100000);
    const auto H = jacobi_to_hamiltonian(Jm, 100000);
    EXPECT_NEAR(4 + delta_exponent(H).slope, 2.0, 0.02);
    EXPECT_FALSE(limit_circle_warning(H).has_value());
}
