#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ultrabrown::harness {

inline constexpr double kDefaultAlpha = 1e-3;
inline constexpr double kDefaultSigmas = 3.0;

/// Some cell of a chi-square test has expected count below 5.
class UndersampledError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Outcome of one statistical check. pass <=> p_value >= alpha.
struct TestReport {
    std::string name;
    double statistic = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
    std::uint64_t n_samples = 0;
    double alpha = kDefaultAlpha;
    bool pass = true;
    std::uint64_t seed = 0;

    void decide() { pass = p_value >= alpha; }
};

void to_json(nlohmann::json& j, const TestReport& r);

/// Upper tail P{chi2_dof >= statistic}.
double chi_square_sf(double statistic, double dof);

/// Pearson test of counts against the uniform law on their cells.
TestReport chi_square_uniform(std::span<const std::uint64_t> counts, double alpha = kDefaultAlpha,
                              std::string name = "chi_square_uniform");

/// Pearson test of counts against given cell probabilities (cells with zero
/// probability must have zero counts, otherwise the test rejects outright).
TestReport chi_square_goodness(std::span<const std::uint64_t> counts, std::span<const double> probabilities,
                               double alpha = kDefaultAlpha, std::string name = "chi_square_goodness");

/// Pearson independence test on a rows x cols contingency table (row-major).
/// Empty rows and columns are dropped before counting degrees of freedom.
TestReport chi_square_independence(std::span<const std::uint64_t> table, std::size_t rows, std::size_t cols,
                                   double alpha = kDefaultAlpha, std::string name = "chi_square_independence");

/// Two-sample homogeneity test: do both histograms come from one law?
TestReport chi_square_homogeneity(std::span<const std::uint64_t> first, std::span<const std::uint64_t> second,
                                  double alpha = kDefaultAlpha, std::string name = "chi_square_homogeneity");

/// Half the L1 distance between the normalized histograms.
double tv_distance(std::span<const double> first, std::span<const double> second);
double tv_distance(std::span<const std::uint64_t> first, std::span<const std::uint64_t> second);

/// Sample mean with its CLT standard error.
struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t n = 0;

    /// |mean - target| <= sigmas * std_error (exact agreement when the error bar is zero).
    bool agrees_with(double target, double sigmas = kDefaultSigmas) const;
};

void to_json(nlohmann::json& j, const McEstimate& e);

/// Welford accumulator with a pairwise merge (Chan et al.).
class RunningMoments {
public:
    void push(double x);
    void merge(const RunningMoments& other);
    std::uint64_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    McEstimate estimate() const;

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

McEstimate estimate_mean(std::span<const double> values);

}  // namespace ultrabrown::harness
