#include "ultrabrown/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

namespace ultrabrown::harness {

void to_json(nlohmann::json& j, const TestReport& r) {
    j = nlohmann::json{{"name", r.name},         {"statistic", r.statistic}, {"dof", r.dof},
                       {"p_value", r.p_value},   {"n", r.n_samples},        {"alpha", r.alpha},
                       {"pass", r.pass},         {"seed", r.seed}};
}

void to_json(nlohmann::json& j, const McEstimate& e) {
    j = nlohmann::json{{"mean", e.mean}, {"std_error", e.std_error}, {"n", e.n}};
}

double chi_square_sf(double statistic, double dof) {
    if (dof <= 0) return 1.0;
    if (statistic <= 0) return 1.0;
    boost::math::chi_squared dist(dof);
    return boost::math::cdf(boost::math::complement(dist, statistic));
}

TestReport chi_square_uniform(std::span<const std::uint64_t> counts, double alpha, std::string name) {
    std::vector<double> probs(counts.size(), counts.empty() ? 0.0 : 1.0 / static_cast<double>(counts.size()));
    return chi_square_goodness(counts, probs, alpha, std::move(name));
}

TestReport chi_square_goodness(std::span<const std::uint64_t> counts, std::span<const double> probabilities,
                               double alpha, std::string name) {
    if (counts.size() != probabilities.size() || counts.empty())
        throw std::invalid_argument("counts and probabilities must be nonempty and of equal size");
    const std::uint64_t n = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    TestReport r;
    r.name = std::move(name);
    r.alpha = alpha;
    r.n_samples = n;
    double stat = 0.0;
    std::size_t support = 0;
    bool impossible = false;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double expected = probabilities[i] * static_cast<double>(n);
        if (probabilities[i] <= 0.0) {
            if (counts[i] > 0) impossible = true;
            continue;
        }
        if (expected < 5.0)
            throw UndersampledError("expected count " + std::to_string(expected) + " below 5 in cell " +
                                    std::to_string(i));
        ++support;
        const double diff = static_cast<double>(counts[i]) - expected;
        stat += diff * diff / expected;
    }
    r.dof = support > 0 ? static_cast<double>(support - 1) : 0.0;
    r.statistic = impossible ? std::numeric_limits<double>::infinity() : stat;
    r.p_value = impossible ? 0.0 : chi_square_sf(stat, r.dof);
    r.decide();
    return r;
}

TestReport chi_square_independence(std::span<const std::uint64_t> table, std::size_t rows, std::size_t cols,
                                   double alpha, std::string name) {
    if (table.size() != rows * cols || rows == 0 || cols == 0)
        throw std::invalid_argument("contingency table shape mismatch");
    std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
    double n = 0.0;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            const auto c = static_cast<double>(table[i * cols + j]);
            row_sum[i] += c;
            col_sum[j] += c;
            n += c;
        }
    TestReport r;
    r.name = std::move(name);
    r.alpha = alpha;
    r.n_samples = static_cast<std::uint64_t>(n);
    if (n == 0) throw UndersampledError("empty contingency table");
    const auto live_rows = std::count_if(row_sum.begin(), row_sum.end(), [](double s) { return s > 0; });
    const auto live_cols = std::count_if(col_sum.begin(), col_sum.end(), [](double s) { return s > 0; });
    double stat = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        if (row_sum[i] == 0) continue;
        for (std::size_t j = 0; j < cols; ++j) {
            if (col_sum[j] == 0) continue;
            const double expected = row_sum[i] * col_sum[j] / n;
            if (expected < 5.0)
                throw UndersampledError("expected contingency count " + std::to_string(expected) + " below 5");
            const double diff = static_cast<double>(table[i * cols + j]) - expected;
            stat += diff * diff / expected;
        }
    }
    r.statistic = stat;
    r.dof = static_cast<double>((live_rows - 1) * (live_cols - 1));
    r.p_value = chi_square_sf(stat, r.dof);
    r.decide();
    return r;
}

TestReport chi_square_homogeneity(std::span<const std::uint64_t> first, std::span<const std::uint64_t> second,
                                  double alpha, std::string name) {
    if (first.size() != second.size()) throw std::invalid_argument("histograms differ in support");
    std::vector<std::uint64_t> table;
    table.reserve(2 * first.size());
    table.insert(table.end(), first.begin(), first.end());
    table.insert(table.end(), second.begin(), second.end());
    return chi_square_independence(table, 2, first.size(), alpha, std::move(name));
}

double tv_distance(std::span<const double> first, std::span<const double> second) {
    if (first.size() != second.size()) throw std::invalid_argument("histograms differ in support");
    const double s1 = std::accumulate(first.begin(), first.end(), 0.0);
    const double s2 = std::accumulate(second.begin(), second.end(), 0.0);
    if (s1 <= 0.0 || s2 <= 0.0) throw std::invalid_argument("empty histogram");
    double l1 = 0.0;
    for (std::size_t i = 0; i < first.size(); ++i) l1 += std::abs(first[i] / s1 - second[i] / s2);
    return 0.5 * l1;
}

double tv_distance(std::span<const std::uint64_t> first, std::span<const std::uint64_t> second) {
    std::vector<double> a(first.begin(), first.end()), b(second.begin(), second.end());
    return tv_distance(a, b);
}

bool McEstimate::agrees_with(double target, double sigmas) const {
    return std::abs(mean - target) <= sigmas * std_error;
}

void RunningMoments::push(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
}

void RunningMoments::merge(const RunningMoments& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
        *this = other;
        return;
    }
    const double total = static_cast<double>(n_ + other.n_);
    const double delta = other.mean_ - mean_;
    mean_ += delta * static_cast<double>(other.n_) / total;
    m2_ += other.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(other.n_) / total;
    n_ += other.n_;
}

McEstimate RunningMoments::estimate() const {
    McEstimate e;
    e.mean = mean_;
    e.n = n_;
    e.std_error = n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
    return e;
}

McEstimate estimate_mean(std::span<const double> values) {
    RunningMoments m;
    for (double v : values) m.push(v);
    return m.estimate();
}

}  // namespace ultrabrown::harness
