#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "ultrabrown/localtime.hpp"

namespace {

using namespace ultrabrown;
using brownian::BrownianConfig;
using brownian::BrownianMotion;
using localtime::SurvivalParams;

// g_k = P{a candidate ball holds a candidate k levels below}: g_0 = 1, g_k = 1 - (1 - x g_{k-1})^B.
double hold_probability(std::uint32_t p, std::uint32_t N, std::uint32_t d, std::uint32_t k) {
    const double x = std::pow(double(p), -double(d)), B = std::pow(double(p), double(N));
    double g = 1.0;
    for (std::uint32_t i = 0; i < k; ++i) g = 1.0 - std::pow(1.0 - x * g, B);
    return g;
}

// Binomial(B, s) conditioned on being positive.
std::vector<double> positive_binomial(std::uint64_t B, double s) {
    std::vector<double> q(B);
    const double z = 1.0 - std::pow(1.0 - s, double(B));
    for (std::uint64_t i = 1; i <= B; ++i) {
        double c = 1;
        for (std::uint64_t j = 0; j < i; ++j) c = c * double(B - j) / double(j + 1);
        q[i - 1] = c * std::pow(s, double(i)) * std::pow(1 - s, double(B - i)) / z;
    }
    return q;
}

TEST(Survival, SolvesTheFixedPointEquation) {
    const auto sp = localtime::solve_h(2, 2, 1);
    EXPECT_NEAR(sp.h, 0.456311, 1e-6);
    EXPECT_NEAR(sp.h, oracle::survival_h(2, 2, 1), 1e-10);
    EXPECT_LT(sp.residual, 1e-12);
    // y = 1 - h is the root in (0, 1) of y^3 + y^2 + y = 1.
    const double y = 1 - sp.h;
    EXPECT_NEAR(y * y * y + y * y + y, 1.0, 1e-12);
    for (auto [p, N, d] : {std::tuple{3u, 2u, 1u}, {2u, 3u, 2u}, {5u, 2u, 1u}, {2u, 3u, 1u}}) {
        const auto s = localtime::solve_h(p, N, d);
        EXPECT_NEAR(s.h, oracle::survival_h(p, N, d), 1e-9) << p << N << d;
        EXPECT_LT(s.residual, 1e-12);
    }
}

TEST(Survival, PolarCasesHaveZeroH) {
    for (auto [p, N, d] : {std::tuple{2u, 1u, 1u}, {3u, 1u, 2u}, {2u, 2u, 2u}}) {
        const auto sp = localtime::solve_h(p, N, d);
        EXPECT_EQ(sp.h, 0.0);
        EXPECT_TRUE(sp.q.empty());
    }
}

TEST(Survival, OffspringLawIsConditionedBinomialWithMeanPToNMinusD) {
    const auto sp = localtime::solve_h(2, 2, 1);
    ASSERT_EQ(sp.q.size(), 4u);
    const auto oracle_q = positive_binomial(4, sp.h);
    double total = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(sp.q[i], oracle_q[i], 1e-12);
        total += sp.q[i];
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_NEAR(sp.mean(), 2.0, 1e-9);
    EXPECT_EQ(localtime::offspring_mean_closed_form(2, 2, 1), 2);
    EXPECT_EQ(localtime::offspring_mean_closed_form(3, 3, 1), 9);

    const auto exact = localtime::offspring_law_exact(2, 2, sp.h);
    oracle::Rational sum = 0;
    for (const auto& q : exact) sum += q;
    EXPECT_EQ(sum, 1);
}

TEST(GaltonWatson, DegenerateLawStaysAtOne) {
    SurvivalParams sp{.p = 2, .N = 2, .d = 1, .h = 0.5, .q = {1.0, 0.0, 0.0, 0.0}};
    const auto v = localtime::gw_simulate(sp, 10, {4, 0});
    ASSERT_EQ(v.size(), 10u);
    for (auto x : v) EXPECT_EQ(x, 1u);
}

TEST(GaltonWatson, NormalizedGenerationHasMeanOne) {
    const auto sp = localtime::solve_h(2, 2, 1);
    harness::RunningMoments v3;
    std::vector<harness::RunningMoments> gens(6);
    for (std::uint64_t i = 0; i < 10000; ++i) {
        const auto v = localtime::gw_simulate(sp, 6, {5, i});
        v3.push(double(v[2]) / 8.0);
        for (std::size_t n = 0; n < 6; ++n) gens[n].push(double(v[n]) / std::pow(2.0, double(n + 1)));
    }
    EXPECT_TRUE(v3.estimate().agrees_with(1.0)) << v3.mean();
    for (auto& g : gens) EXPECT_TRUE(g.estimate().agrees_with(1.0));
    // Variance of the martingale W_n = V_n / 2^n increases to a finite plateau.
    for (std::size_t n = 1; n < 6; ++n) EXPECT_GT(gens[n].variance(), gens[n - 1].variance() * 0.9);
    EXPECT_LT(gens[5].variance() - gens[4].variance(), gens[1].variance() - gens[0].variance());
}

TEST(GaltonWatson, IsAPureFunctionOfTheKey) {
    const auto sp = localtime::solve_h(3, 2, 1);
    EXPECT_EQ(localtime::gw_simulate(sp, 5, {1, 2}), localtime::gw_simulate(sp, 5, {1, 2}));
}

TEST(Candidates, MeanCountIsPToTheNNMinusDNPlusOne) {
    BrownianConfig cfg{.p = 2, .index_dim = 2, .state_dim = 1, .depth = 6, .seed = 9};
    const std::uint64_t reps = 4000;
    std::vector<harness::RunningMoments> counts(5);
    for (std::uint64_t i = 0; i < reps; ++i) {
        const BrownianMotion bm(cfg.replica(i));
        const auto descent = localtime::candidate_descent(bm, 4);
        for (std::uint32_t n = 0; n <= 4; ++n) counts[n].push(double(descent[n].balls.size()));
    }
    for (std::uint32_t n = 0; n <= 4; ++n) {
        const double target = std::pow(2.0, double(n) - 1.0);
        EXPECT_TRUE(counts[n].estimate().agrees_with(target)) << n << " " << counts[n].mean();
    }
}

TEST(Candidates, DescentMatchesScanAndNests) {
    for (auto [p, N, d] : {std::tuple{2u, 2u, 1u}, {3u, 2u, 1u}, {2u, 3u, 2u}}) {
        BrownianConfig cfg{.p = p, .index_dim = N, .state_dim = d, .depth = 4, .seed = 10};
        const std::uint64_t fan = cfg.branching();
        for (std::uint64_t i = 0; i < 40; ++i) {
            const BrownianMotion bm(cfg.replica(i));
            const auto descent = localtime::candidate_descent(bm, 3);
            ASSERT_EQ(descent.size(), 4u);
            for (std::uint32_t n = 0; n <= 3; ++n) {
                EXPECT_EQ(descent[n].balls, localtime::candidates(bm, n).balls);
                if (n == 0) continue;
                for (auto b : descent[n].balls)
                    EXPECT_TRUE(std::binary_search(descent[n - 1].balls.begin(), descent[n - 1].balls.end(), b / fan));
                if (descent[n - 1].balls.empty()) EXPECT_TRUE(descent[n].balls.empty());
            }
        }
    }
}

// The scan rule on its own: |A_C| <= p^{-(n+1)} read off the grid.
TEST(Candidates, ScanAgreesWithGridValues) {
    BrownianConfig cfg{.p = 3, .index_dim = 2, .state_dim = 1, .depth = 4, .seed = 11};
    const BrownianMotion bm(cfg);
    for (std::uint32_t n = 0; n <= 2; ++n) {
        const auto g = bm.grid(n);
        std::vector<std::uint64_t> expected;
        for (std::uint64_t b = 0; b < g.size(); ++b)
            if (g.ring().within(g.value(b)[0], n + 1)) expected.push_back(b);
        EXPECT_EQ(localtime::candidates(bm, n).balls, expected);
    }
}

TEST(Dilation, MonotoneInMAndMatchesDescent) {
    BrownianConfig cfg{.p = 2, .index_dim = 2, .state_dim = 1, .depth = 7, .seed = 12};
    for (std::uint64_t i = 0; i < 200; ++i) {
        const BrownianMotion bm(cfg.replica(i));
        const auto descent = localtime::candidate_descent(bm, 6);
        for (std::uint32_t n = 0; n <= 3; ++n) {
            double previous = std::numeric_limits<double>::infinity();
            for (std::uint32_t m = n; m <= 6; ++m) {
                const auto dm = localtime::dilation_from_descent(cfg, descent, n, m);
                EXPECT_LE(dm.total(), previous);
                previous = dm.total();
                if (m == n) EXPECT_DOUBLE_EQ(dm.total(), std::pow(2.0, -double(n)) * double(descent[n].balls.size()));
            }
        }
        const auto direct = localtime::dilation_estimate(bm, 2, 4);
        const auto reused = localtime::dilation_from_descent(cfg, descent, 2, 4);
        EXPECT_EQ(direct.balls, reused.balls);
        EXPECT_EQ(direct.mass_per_ball, reused.mass_per_ball);
    }
}

// E[total mass at (n, m)] = p^{-d} g_{m-n}, which falls from p^{-d} towards h.
TEST(Dilation, MeanTotalMassFollowsTheHoldRecursion) {
    BrownianConfig cfg{.p = 2, .index_dim = 2, .state_dim = 1, .depth = 7, .seed = 13};
    const std::uint32_t n = 2;
    std::vector<harness::RunningMoments> mass(5);
    for (std::uint64_t i = 0; i < 6000; ++i) {
        const BrownianMotion bm(cfg.replica(i));
        const auto descent = localtime::candidate_descent(bm, n + 4);
        for (std::uint32_t k = 0; k <= 4; ++k) mass[k].push(localtime::dilation_from_descent(cfg, descent, n, n + k).total());
    }
    const double h = localtime::solve_h(2, 2, 1).h;
    for (std::uint32_t k = 0; k <= 4; ++k) {
        const double target = 0.5 * hold_probability(2, 2, 1, k);
        EXPECT_TRUE(mass[k].estimate().agrees_with(target)) << k << " " << mass[k].mean() << " vs " << target;
        EXPECT_GE(target, h - 1e-12);
    }
}

TEST(LocalTimeField, SumsToOneAndIsNonnegative) {
    for (auto [p, N, d] : {std::tuple{2u, 1u, 1u}, {2u, 2u, 1u}, {3u, 2u, 2u}}) {
        BrownianConfig cfg{.p = p, .index_dim = N, .state_dim = d, .depth = 5, .seed = 14};
        for (std::uint64_t i = 0; i < 100; ++i) {
            const BrownianMotion bm(cfg.replica(i));
            for (std::uint32_t r : {0u, 1u, 3u}) {
                const auto f = localtime::local_time_field(bm, 3, r);
                EXPECT_EQ(f.field.size(), std::size_t(oracle::ipow(oracle::ipow(p, r), d)));
                EXPECT_NEAR(f.total(), 1.0, 1e-12);
                EXPECT_TRUE(std::all_of(f.field.begin(), f.field.end(), [](double x) { return x >= 0; }));
                EXPECT_TRUE(std::any_of(f.field.begin(), f.field.end(), [](double x) { return x > 0; }));
            }
        }
    }
}

TEST(LocalTimeField, FirstDigitResolutionHasOneOccupiedCell) {
    BrownianConfig cfg{.p = 2, .index_dim = 2, .state_dim = 1, .depth = 3, .seed = 15};
    const auto f = localtime::local_time_field(BrownianMotion(cfg), 3, 1);
    // Every A_C agrees with the root weight mod p.
    EXPECT_EQ(std::count_if(f.field.begin(), f.field.end(), [](double x) { return x > 0; }), 1);
    EXPECT_THROW(localtime::local_time_field(BrownianMotion(cfg), 2, 3), std::invalid_argument);
}

TEST(Offspring, SurvivingChildrenFollowTheFiniteLevelLaw) {
    BrownianConfig cfg{.p = 2, .index_dim = 2, .state_dim = 1, .depth = 7, .seed = 16};
    for (std::uint32_t m : {3u, 5u}) {
        const std::uint32_t n = 2;
        const auto hist = localtime::surviving_offspring_histogram(cfg, n, m, 4000);
        const double s = 0.5 * hold_probability(2, 2, 1, m - n - 1);
        const auto law = positive_binomial(4, s);
        const auto rep = harness::chi_square_goodness(hist, law);
        EXPECT_TRUE(rep.pass) << m << " " << rep.p_value;
    }
}

TEST(FMeasure, CoverSumIsFiniteAndNonnegative) {
    BrownianConfig cfg{.p = 2, .index_dim = 2, .state_dim = 1, .depth = 7, .seed = 17};
    const double s = localtime::fmeasure_cover_sum(BrownianMotion(cfg), 6);
    EXPECT_GE(s, 0.0);
    EXPECT_TRUE(std::isfinite(s));
}

}  // namespace
