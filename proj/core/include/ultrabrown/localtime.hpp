#pragma once

#include <cstdint>
#include <vector>

#include "ultrabrown/brownian.hpp"
#include "ultrabrown/padic.hpp"
#include "ultrabrown/rng.hpp"
#include "ultrabrown/stats.hpp"

namespace ultrabrown::localtime {

using brownian::BrownianConfig;
using brownian::BrownianMotion;
using padic::Rational;

/// h = P{the path started in a ball of the tree hits 0} and the offspring
/// law Q of the branching process of surviving sub-balls.
struct SurvivalParams {
    std::uint32_t p = 2;
    std::uint32_t N = 2;
    std::uint32_t d = 1;
    double h = 0.0;
    /// |y - (1 - p^{-d}) - p^{-d} y^{p^N}| at y = 1 - h.
    double residual = 0.0;
    std::uint32_t iterations = 0;
    /// q[i-1] = Q(i) for i = 1..p^N; empty when h = 0.
    std::vector<double> q;

    double mean() const;
};

SurvivalParams solve_h(std::uint32_t p, std::uint32_t N, std::uint32_t d);

/// Binomial(p^N, h) conditioned on being positive, computed in exact rationals from h.
std::vector<Rational> offspring_law_exact(std::uint32_t p, std::uint32_t N, double h);

/// Mean of Q at the true fixed point: p^{N-d}.
Rational offspring_mean_closed_form(std::uint32_t p, std::uint32_t N, std::uint32_t d);

/// Generation sizes V_1..V_n from V_0 = 1. Pure function of (sp.q, key).
std::vector<std::uint64_t> gw_simulate(const SurvivalParams& sp, std::uint32_t generations, const rng::RngKey& key);

/// Level-n balls with |A_C| <= p^{-(n+1)}, in index order.
struct CandidateSet {
    std::uint32_t level = 0;
    std::vector<std::uint64_t> balls;
};

/// Scan of the full level-n grid. Requires n + 1 <= depth.
CandidateSet candidates(const BrownianMotion& bm, std::uint32_t n);

/// Candidate sets of levels 0..max_level by descending only into candidates.
std::vector<CandidateSet> candidate_descent(const BrownianMotion& bm, std::uint32_t max_level);

/// p^{dn} p^{-Nn} on every level-n ball holding a level-m candidate.
struct DilationMeasure {
    std::uint32_t n = 0;
    std::uint32_t m = 0;
    std::vector<std::uint64_t> balls;
    double mass_per_ball = 0.0;

    double total() const { return mass_per_ball * static_cast<double>(balls.size()); }
};

DilationMeasure dilation_estimate(const BrownianMotion& bm, std::uint32_t n, std::uint32_t m);
/// Same, reusing a precomputed descent that reaches level m.
DilationMeasure dilation_from_descent(const BrownianConfig& cfg, const std::vector<CandidateSet>& descent,
                                      std::uint32_t n, std::uint32_t m);

/// Occupation field at value resolution r: field[x] = p^{dr} lambda{t : X_t = x mod p^r},
/// computed on the level-n grid. Cells index (D / p^r D)^d with coordinate 0 least significant.
struct LocalTimeField {
    std::uint32_t p = 2;
    std::uint32_t d = 1;
    std::uint32_t n = 0;
    std::uint32_t r = 0;
    std::vector<double> field;

    double cell_volume() const;
    /// Sum over cells of volume times field.
    double total() const;
};

LocalTimeField local_time_field(const BrownianMotion& bm, std::uint32_t n, std::uint32_t r);

/// Counts, over surviving level-n candidates, of children that still hold a
/// level-m candidate; index i - 1 holds the count of lines with i children.
std::vector<std::uint64_t> surviving_offspring_histogram(const BrownianConfig& cfg, std::uint32_t n, std::uint32_t m,
                                                         std::uint64_t reps);

/// Exploratory: sum of f(p^{-m}) over level-m candidates, f(r) = r^{N-d} (log|log r|)^{d/N}.
double fmeasure_cover_sum(const BrownianMotion& bm, std::uint32_t m);

}  // namespace ultrabrown::localtime
