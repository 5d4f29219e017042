#include <canon/hamiltonian.hpp>

#include <gtest/gtest.h>

#include "oracles.hpp"

#include <numbers>

using namespace canon;
constexpr double pi = std::numbers::pi;

TEST(Segment, ValidatesInputs)
{
    EXPECT_THROW(Segment::rank_one(0.0, 0.0), std::invalid_argument);
    EXPECT_THROW(Segment::rank_one(-1.0, 0.0), std::invalid_argument);
    EXPECT_THROW(Segment::constant(1.0, {0.7, 0.0, 0.7}), std::invalid_argument);  // trace
    EXPECT_THROW(Segment::constant(1.0, {0.5, 0.9, 0.5}), std::invalid_argument);  // not PSD
    EXPECT_NO_THROW(Segment::constant(1.0, {0.5, 0.0, 0.5}));
}

TEST(Segment, AngleReducedModPi)
{
    const Segment s = Segment::rank_one(1.0, pi + 0.25);
    EXPECT_NEAR(s.phi(), 0.25, 1e-15);
}

TEST(Hamiltonian, LengthIsSumOfDeltas)
{
    const FiniteRankHamiltonian H({Segment::rank_one(0.5, 0.0), Segment::rank_one(0.25, 1.0),
                                   Segment::constant(1.25, {0.5, 0.0, 0.5})});
    EXPECT_DOUBLE_EQ(H.length(), 2.0);
    EXPECT_DOUBLE_EQ(H.breakpoint(2), 0.75);
    EXPECT_FALSE(H.all_rank_one());
    // adjacent equal angles are allowed
    EXPECT_NO_THROW(FiniteRankHamiltonian({Segment::rank_one(1, 0.3), Segment::rank_one(1, 0.3)}));
}

TEST(StringToHamiltonian, SingleInterval)
{
    const auto H = string_to_hamiltonian(StringSpec({{1.0, Label::One}}));
    ASSERT_EQ(H.size(), 1u);
    EXPECT_EQ(H[0].delta(), 1.0);
    EXPECT_EQ(H[0].phi(), 0.0);
}

TEST(StringToHamiltonian, TwoLabels)
{
    const auto H = string_to_hamiltonian(StringSpec({{0.5, Label::One}, {0.5, Label::Two}}));
    ASSERT_EQ(H.size(), 2u);
    EXPECT_EQ(H[1].delta(), 0.5);
    EXPECT_NEAR(H[1].phi(), pi / 2, 1e-15);
}

TEST(PowerLawString, HalfGivesReciprocalProducts)
{
    const StringSpec s = power_law_string(0.5, 4);
    ASSERT_EQ(s.size(), 4u);
    EXPECT_NEAR(s[0].length, 1.0 / 2, 1e-15);
    EXPECT_NEAR(s[1].length, 1.0 / 6, 1e-15);
    EXPECT_NEAR(s[2].length, 1.0 / 12, 1e-15);
    EXPECT_NEAR(s[3].length, 1.0 / 4, 1e-15);
    EXPECT_EQ(s[0].label, Label::One);
    EXPECT_EQ(s[1].label, Label::Two);
    EXPECT_EQ(s[2].label, Label::One);
    EXPECT_EQ(s[3].label, Label::Two);
    EXPECT_NEAR(s.length(), 1.0, 1e-15);
}

TEST(PowerLawString, LengthsDecayLikePowerMinusOneOverP)
{
    const StringSpec s = power_law_string(0.5, 2000);
    // l_j ~ j^{-2} => l_{2j}/l_j -> 1/4
    EXPECT_NEAR(s[1998].length / s[998].length, 0.25, 1e-3);
}

TEST(CantorString, DepthOne)
{
    const StringSpec s = cantor_string(1);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_NEAR(s[0].length, 1.0 / 3 + 0.5, 1e-15);
    EXPECT_EQ(s[1].label, Label::One);
    EXPECT_NEAR(s[1].length, 1.0 / 3, 1e-15);
    EXPECT_NEAR(s.breakpoint(1), 5.0 / 6, 1e-15);
    EXPECT_NEAR(s.breakpoint(2), 7.0 / 6, 1e-15);
}

TEST(CantorString, Measures)
{
    for (int D : {1, 4, 9, 14}) {
        const StringSpec s = cantor_string(D);
        EXPECT_NEAR(s.measure1(), 1.0 - std::pow(2.0 / 3, D), 1e-13) << D;
        EXPECT_NEAR(s.length(), 2.0, 1e-13) << D;
    }
}

TEST(L1Distance, Identical)
{
    const FiniteRankHamiltonian H({Segment::rank_one(1, 0.2), Segment::rank_one(2, 1.1)});
    EXPECT_EQ(l1_distance(H, H), 0.0);
}

TEST(L1Distance, AgainstEigenNorm)
{
    const FiniteRankHamiltonian H0({Segment::rank_one(1, 0.0)});
    const FiniteRankHamiltonian H1({Segment::rank_one(1, pi / 2)});
    const double oracle1 = oracle::sym_spectral_norm(oracle::projection(0) - oracle::projection(pi / 2));
    EXPECT_NEAR(l1_distance(H0, H1), oracle1, 1e-15);
    EXPECT_NEAR(l1_distance(H0, H1), 1.0, 1e-15);

    const FiniteRankHamiltonian G0({Segment::rank_one(2, 0.0)});
    const FiniteRankHamiltonian G1({Segment::rank_one(2, pi / 4)});
    const double oracle2 = 2 * oracle::sym_spectral_norm(oracle::projection(0) - oracle::projection(pi / 4));
    EXPECT_NEAR(l1_distance(G0, G1), oracle2, 1e-14);
    EXPECT_NEAR(l1_distance(G0, G1), 2 * std::sin(pi / 4), 1e-14);
}

TEST(L1Distance, MisalignedBreakpointsAndWindow)
{
    const FiniteRankHamiltonian H({Segment::rank_one(1, 0.0), Segment::rank_one(1, 1.0)});
    const FiniteRankHamiltonian G({Segment::rank_one(0.5, 0.0), Segment::rank_one(1.5, 0.4)});
    double want = 0;
    // brute force on a fine midpoint grid
    const int n = 20000;
    for (int k = 0; k < n; ++k) {
        const double x = (k + 0.5) * 2.0 / n;
        const double a = x < 1 ? 0.0 : 1.0, b = x < 0.5 ? 0.0 : 0.4;
        want += oracle::sym_spectral_norm(oracle::projection(a) - oracle::projection(b)) * 2.0 / n;
    }
    EXPECT_NEAR(l1_distance(H, G), want, 1e-9);
    EXPECT_NEAR(l1_distance(H, G, 0.5, 1.0), 0.5 * std::sin(0.4), 1e-15);
}

TEST(Sym2, ProjectionIsIdempotentWithUnitTrace)
{
    for (double phi : {0.0, 0.3, 1.2, 2.9}) {
        const Sym2 P = projection(phi);
        EXPECT_NEAR(P.a + P.c, 1.0, 1e-15);
        EXPECT_NEAR(P.a * P.a + P.b * P.b, P.a, 1e-15);
        EXPECT_NEAR(P.det(), 0.0, 1e-15);
    }
}
