#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "ultrabrown/experiments.hpp"
#include "ultrabrown/gaussian.hpp"
#include "ultrabrown/stats.hpp"

namespace {

using namespace ultrabrown;
namespace fs = std::filesystem;

TEST(ChiSquare, SurvivalFunctionValues) {
    EXPECT_NEAR(harness::chi_square_sf(3.841458820694124, 1), 0.05, 1e-9);
    for (double x : {0.5, 2.0, 7.0}) EXPECT_NEAR(harness::chi_square_sf(x, 2), std::exp(-x / 2), 1e-12);
    EXPECT_NEAR(harness::chi_square_sf(0.0, 5), 1.0, 1e-15);
    EXPECT_LT(harness::chi_square_sf(500.0, 10), 1e-90);
}

TEST(ChiSquare, UniformExamples) {
    const std::vector<std::uint64_t> flat(16, 100);
    const auto rep = harness::chi_square_uniform(flat);
    EXPECT_EQ(rep.statistic, 0.0);
    EXPECT_EQ(rep.p_value, 1.0);
    EXPECT_TRUE(rep.pass);
    std::vector<std::uint64_t> spike(16, 0);
    spike[3] = 1600;
    EXPECT_FALSE(harness::chi_square_uniform(spike).pass);
    const std::vector<std::uint64_t> thin(16, 1);
    EXPECT_THROW(harness::chi_square_uniform(thin), harness::UndersampledError);
}

// Under the null the test rejects with probability alpha, so over 40 seeds at
// alpha = 0.001 nearly every run should pass.
TEST(ChiSquare, GaussianSamplesPassAcrossSeeds) {
    gaussian::GaussianSpec spec{.p = 2, .level = 0, .dim = 1, .abs_prec = 8};
    int passes = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        std::vector<std::uint64_t> counts(256, 0);
        rng::RngKey key{seed, 0};
        for (std::uint64_t i = 0; i < 20000; ++i) ++counts[gaussian::quotient_cell(gaussian::sample(spec, key.child(i)), 8)];
        passes += harness::chi_square_uniform(counts).pass;
    }
    EXPECT_GE(passes, 39);
}

TEST(ChiSquare, GoodnessWithImpossibleCell) {
    const std::vector<std::uint64_t> counts{50, 50, 1};
    const std::vector<double> probs{0.5, 0.5, 0.0};
    EXPECT_FALSE(harness::chi_square_goodness(counts, probs).pass);
    const std::vector<std::uint64_t> ok{52, 48, 0};
    EXPECT_TRUE(harness::chi_square_goodness(ok, probs).pass);
}

TEST(ChiSquare, IndependenceAndHomogeneity) {
    const std::vector<std::uint64_t> product{100, 200, 300, 600};
    const auto ind = harness::chi_square_independence(product, 2, 2);
    EXPECT_NEAR(ind.statistic, 0.0, 1e-12);
    EXPECT_EQ(ind.dof, 1.0);
    const std::vector<std::uint64_t> diagonal{500, 0, 0, 500};
    EXPECT_FALSE(harness::chi_square_independence(diagonal, 2, 2).pass);
    const std::vector<std::uint64_t> a{100, 100, 100}, b{200, 200, 200}, c{300, 0, 0};
    EXPECT_TRUE(harness::chi_square_homogeneity(a, b).pass);
    EXPECT_FALSE(harness::chi_square_homogeneity(a, c).pass);
}

TEST(TotalVariation, Examples) {
    const std::vector<double> p{0.25, 0.25, 0.5}, q{0.0, 0.0, 1.0}, r{1.0, 0.0, 0.0};
    EXPECT_EQ(harness::tv_distance(p, p), 0.0);
    EXPECT_EQ(harness::tv_distance(q, r), 1.0);
    // pZ_2-uniform against Z_2-uniform, one digit: (1, 0) against (1/2, 1/2).
    const std::vector<std::uint64_t> even{1000, 0}, all{500, 500};
    EXPECT_DOUBLE_EQ(harness::tv_distance(even, all), 0.5);
}

TEST(Moments, MatchTwoPassFormulasAndMerge) {
    std::mt19937_64 gen(1);
    std::normal_distribution<double> nd(3.0, 2.0);
    std::vector<double> xs(1001);
    for (auto& x : xs) x = nd(gen);
    double mean = 0;
    for (double x : xs) mean += x;
    mean /= double(xs.size());
    double ss = 0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double var = ss / double(xs.size() - 1);

    harness::RunningMoments all, left, right;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        all.push(xs[i]);
        (i < 300 ? left : right).push(xs[i]);
    }
    left.merge(right);
    for (const auto& m : {all, left}) {
        EXPECT_EQ(m.count(), xs.size());
        EXPECT_NEAR(m.mean(), mean, 1e-12);
        EXPECT_NEAR(m.variance(), var, 1e-10);
        EXPECT_NEAR(m.estimate().std_error, std::sqrt(var / double(xs.size())), 1e-12);
    }
    const auto e = harness::estimate_mean(xs);
    EXPECT_NEAR(e.mean, mean, 1e-12);
    harness::RunningMoments empty;
    empty.merge(all);
    EXPECT_NEAR(empty.mean(), mean, 1e-12);
}

TEST(McEstimate, AgreementBand) {
    const harness::McEstimate e{1.0, 0.1, 100};
    EXPECT_TRUE(e.agrees_with(1.29));
    EXPECT_FALSE(e.agrees_with(1.31));
    const harness::McEstimate exact{0.5, 0.0, 10};
    EXPECT_TRUE(exact.agrees_with(0.5));
    EXPECT_FALSE(exact.agrees_with(0.6));
}

TEST(Run, KnownExperimentsAndUnknownId) {
    EXPECT_EQ(harness::experiment_ids().size(), 7u);
    harness::RunConfig cfg{.experiment = "no-such-experiment"};
    EXPECT_THROW(harness::run(cfg), std::invalid_argument);
}

TEST(Run, BmHittingReport) {
    harness::RunConfig cfg{.experiment = "bm-hitting", .reps = 20000};
    const auto res = harness::run(cfg);
    EXPECT_TRUE(res.pass);
    bool found = false;
    for (const auto& row : res.report["levels"]) {
        if (row["m"] == 1) {
            found = true;
            EXPECT_DOUBLE_EQ(row["exact"].get<double>(), 0.125);
            EXPECT_EQ(row["exact_rational"], "1/8");
        }
    }
    EXPECT_TRUE(found);
    EXPECT_EQ(res.report["pass"], true);
}

TEST(Run, GwLocaltimeReportsH) {
    harness::RunConfig cfg{.experiment = "gw-localtime", .reps = 2000};
    const auto res = harness::run(cfg);
    EXPECT_NEAR(res.report["h"].get<double>(), 0.456311, 1e-6);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

TEST(Run, SameSeedGivesByteIdenticalArtifacts) {
    const fs::path root = fs::temp_directory_path() / "ultrabrown_determinism";
    fs::remove_all(root);
    for (const char* id : {"bm-hitting", "series-stationarity"}) {
        for (const char* run : {"a", "b"}) {
            harness::RunConfig cfg{.experiment = id, .reps = 3000, .seed = 77, .out_dir = root / run / id};
            harness::run(cfg);
        }
        std::size_t files = 0;
        for (const auto& entry : fs::directory_iterator(root / "a" / id)) {
            const auto other = root / "b" / id / entry.path().filename();
            ASSERT_TRUE(fs::exists(other)) << other;
            EXPECT_EQ(slurp(entry.path()), slurp(other)) << entry.path();
            ++files;
        }
        EXPECT_GE(files, 2u) << id;
    }
    fs::remove_all(root);
}

TEST(Run, DifferentSeedsDiffer) {
    harness::RunConfig a{.experiment = "bm-hitting", .reps = 2000, .seed = 1};
    harness::RunConfig b{.experiment = "bm-hitting", .reps = 2000, .seed = 2};
    EXPECT_NE(harness::run(a).report.dump(), harness::run(b).report.dump());
}

TEST(Report, JsonShape) {
    harness::TestReport rep{.name = "x", .statistic = 1.5, .dof = 2, .p_value = 0.4, .n_samples = 10};
    rep.decide();
    const nlohmann::json j = rep;
    EXPECT_EQ(j["name"], "x");
    EXPECT_EQ(j["pass"], true);
    EXPECT_EQ(j["dof"], 2.0);
}

}  // namespace
