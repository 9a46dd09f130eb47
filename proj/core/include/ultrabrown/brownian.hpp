#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ultrabrown/padic.hpp"
#include "ultrabrown/residue.hpp"
#include "ultrabrown/rng.hpp"
#include "ultrabrown/stats.hpp"
#include "ultrabrown/tree.hpp"

namespace ultrabrown::brownian {

using padic::AddMode;
using padic::BallAddress;
using padic::PadicVector;
using padic::Rational;
using padic::ResidueRing;

/// Parameters of an (N,d) K-Brownian motion truncated at weight level `depth`.
///
/// Values are tracked modulo p^{depth+1}: X^depth agrees with X there, since
/// every omitted weight has norm at most p^{-(depth+1)}.
struct BrownianConfig {
    std::uint32_t p = 2;
    std::uint32_t index_dim = 1;  // N
    std::uint32_t state_dim = 1;  // d
    std::uint32_t depth = 6;
    std::uint64_t seed = 0;
    AddMode mode = AddMode::carry;

    std::uint32_t precision() const { return depth + 1; }
    /// p^N, the branching factor of the ball tree.
    std::uint64_t branching() const;
    /// Number of level-n balls, p^{Nn}.
    std::uint64_t ball_count(std::uint32_t level) const;
    /// Independent path: same parameters, seed derived from (seed, index).
    BrownianConfig replica(std::uint64_t index) const;
    void validate() const;
};

/// Partial sums A_C (weights of levels 0..n along the path to C) for every
/// level-n ball, in the total order. X mod p^{n+1} equals A_C on C.
class GridRestriction {
public:
    GridRestriction(const BrownianConfig& cfg, std::uint32_t level, std::vector<std::uint64_t> values);

    std::uint32_t level() const { return level_; }
    std::uint64_t size() const { return count_; }
    std::uint32_t state_dim() const { return dim_; }
    /// Coordinates of A_C for the ball with the given index, residues mod p^{depth+1}.
    std::span<const std::uint64_t> value(std::uint64_t index) const {
        return {values_.data() + index * dim_, dim_};
    }
    BallAddress address(std::uint64_t index) const;
    PadicVector value_vector(std::uint64_t index) const;
    const ResidueRing& ring() const { return ring_; }

private:
    std::uint32_t p_;
    std::uint32_t index_dim_;
    std::uint32_t dim_;
    std::uint32_t level_;
    std::uint64_t count_;
    ResidueRing ring_;
    std::vector<std::uint64_t> values_;
};

/// The weight-tree construction. Weights are produced on demand by a keyed
/// generator, so evaluation at a point costs O(depth) and no tree is stored.
class BrownianMotion {
public:
    explicit BrownianMotion(BrownianConfig cfg);

    const BrownianConfig& config() const { return cfg_; }
    const ResidueRing& ring() const { return ring_; }

    /// Hash of the address of a ball, extended one level at a time.
    std::uint64_t root_hash() const { return root_hash_; }
    static std::uint64_t child_hash(std::uint64_t parent, std::uint64_t child_code) {
        return rng::combine(parent, child_code);
    }
    /// Weight Z_C of the ball with the given address hash at the given level,
    /// written as d residues (uniform on p^level D^d).
    void weight(std::uint64_t address_hash, std::uint32_t level, std::span<std::uint64_t> out) const;
    PadicVector weight(const BallAddress& ball) const;
    std::uint64_t address_hash(const BallAddress& ball) const;

    /// X(t) for t in D^N (known to at least depth+1 digits); |X(t)| <= 1.
    PadicVector eval(const PadicVector& t) const;
    /// Residue form: t given as N residues mod p^{depth+1}; out has d entries.
    void eval_residues(std::span<const std::uint64_t> t, std::span<std::uint64_t> out) const;
    /// W(t): the same sum without the weights of balls containing 0.
    void eval_w_residues(std::span<const std::uint64_t> t, std::span<std::uint64_t> out) const;

    /// All level-n partial sums by tree traversal. Requires n <= depth.
    GridRestriction grid(std::uint32_t level) const;
    /// X at the centers (digits beyond the ball path zero) of every level-n ball.
    GridRestriction grid_point_values(std::uint32_t level) const;

    /// Interleaved digit code of position k of t (child index within its parent ball).
    std::uint64_t child_code(std::span<const std::uint64_t> t, std::uint32_t position) const;

private:
    BrownianConfig cfg_;
    ResidueRing ring_;
    std::uint64_t root_hash_;
};

/// The path t -> X(s + t): weights are read at translated addresses.
class ShiftedBrownian {
public:
    ShiftedBrownian(const BrownianMotion& base, const PadicVector& shift);

    const PadicVector& shift() const { return shift_; }
    PadicVector eval(const PadicVector& t) const;
    ShiftedBrownian shifted(const PadicVector& more) const;

private:
    const BrownianMotion* base_;
    PadicVector shift_;
};

ShiftedBrownian shift(const BrownianMotion& bm, const PadicVector& s);

/// Residues of the point t in D^N, mod p^prec.
std::vector<std::uint64_t> point_residues(const ResidueRing& ring, const PadicVector& t);
PadicVector residues_to_vector(const ResidueRing& ring, std::span<const std::uint64_t> r);

/// Exact P{ sup_t |X_t - f(t)| <= p^{-(m+1)} }.
struct HittingProbability {
    Rational value;
    /// f breaks |f| <= 1 or |f(s)-f(t)| <= p^{-1}|s-t| on the grid, so the event is impossible.
    bool constraint_violated = false;
    /// log_p of the value when nonzero.
    std::int64_t exponent = 0;
};

/// f holds one value per level-m ball, in the total order.
HittingProbability hitting_prob_exact(const BrownianConfig& cfg, std::span<const PadicVector> f, std::uint32_t m);

/// Monte Carlo estimate of the same probability over independent paths.
harness::McEstimate hitting_prob_mc(const BrownianConfig& cfg, std::span<const PadicVector> f, std::uint32_t m,
                                    std::uint64_t reps);

/// The zero function on the level-m grid.
std::vector<PadicVector> zero_grid_function(const BrownianConfig& cfg, std::uint32_t m);

/// Checks that increments X_{t1}, X_{t2}-X_{t1}, ... are independent, each
/// increment against the tuple of earlier increments on (D/p^r D)^d.
/// Points must be strictly increasing in the total order; the reported
/// p-value is the Bonferroni-adjusted minimum.
harness::TestReport increments_test(const BrownianConfig& cfg, std::span<const PadicVector> points,
                                    std::uint32_t r, std::uint64_t reps, double alpha = harness::kDefaultAlpha);

/// Same statistic without the ordering precondition.
harness::TestReport increment_dependence(const BrownianConfig& cfg, std::span<const PadicVector> points,
                                         std::uint32_t r, std::uint64_t reps,
                                         double alpha = harness::kDefaultAlpha);

/// Lemma-style factorization check: for a ball C and s in C, X_s mod p^r
/// (a function of the weights meeting C) against X_t - X_s for t outside C.
harness::TestReport ball_independence_test(const BrownianConfig& cfg, const PadicVector& s, const PadicVector& t,
                                           std::uint32_t ball_level, std::uint32_t r, std::uint64_t reps,
                                           double alpha = harness::kDefaultAlpha);

/// X_0 against X_t - X_0 on the quotient level r.
harness::TestReport origin_independence_test(const BrownianConfig& cfg, const PadicVector& t, std::uint32_t r,
                                             std::uint64_t reps, double alpha = harness::kDefaultAlpha);

/// (X_0, X_t) against the uniform law on {|x| <= 1, |x-y| <= p^{-1}|t|}, at quotient level r.
harness::TestReport pair_law_test(const BrownianConfig& cfg, const PadicVector& t, std::uint32_t r,
                                  std::uint64_t reps, double alpha = harness::kDefaultAlpha);

/// Quotient histograms of X(t0) mod p^r for the path and its shift by s.
harness::TestReport shift_law_test(const BrownianConfig& cfg, const PadicVector& t0, const PadicVector& s,
                                   std::uint32_t r, std::uint64_t reps, double alpha = harness::kDefaultAlpha);

/// Module constraint audit on the level-n grid of one path.
struct PathAudit {
    std::uint64_t pairs = 0;
    std::uint64_t norm_violations = 0;
    std::uint64_t lipschitz_violations = 0;
    /// Grid traversal disagreeing with pointwise evaluation at a center.
    std::uint64_t eval_mismatches = 0;
    /// Pairs with |X_s - X_t| = p^{-1}|s-t| exactly, per distance exponent j (|s-t| = p^{-j}).
    std::vector<std::uint64_t> equal_by_distance;
    std::vector<std::uint64_t> pairs_by_distance;
};

PathAudit audit_path(const BrownianMotion& bm, std::uint32_t level);

}  // namespace ultrabrown::brownian
