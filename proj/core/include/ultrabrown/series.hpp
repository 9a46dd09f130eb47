#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ultrabrown/padic.hpp"
#include "ultrabrown/rng.hpp"
#include "ultrabrown/stats.hpp"

namespace ultrabrown::series {

using padic::Norm;
using padic::PadicScalar;

enum class Basis { mahler, van_der_put };

/// Random series sum_n a_n Z_n f_n on Z_p with Z_n i.i.d. uniform on Z_p.
/// Coefficients are a_n = p^{v_n}; terms n <= M are summed.
struct SeriesSpec {
    Basis basis = Basis::mahler;
    std::uint32_t p = 2;
    /// v_n for n = 0, 1, ...; padic::kInfiniteValuation marks a_n = 0. Entries past M only
    /// enter the truncation radius.
    std::vector<std::int64_t> valuations;
    std::uint64_t M = 0;
    std::int64_t abs_prec = 16;
    std::uint64_t seed = 0;

    /// max_{n > M} |a_n| over the listed valuations.
    Norm truncation_radius() const;
    /// Terms actually summed: min(M, listed - 1) + 1.
    std::size_t terms() const;
    void validate() const;
};

/// Binomial coefficient C(t, n) for t in Z_p; absolute precision drops by v_p(n!).
PadicScalar mahler_binom(const PadicScalar& t, std::uint64_t n);

/// e_n(t) = 1 iff t = n mod p^{len(n)}, len(n) the number of base-p digits of n; e_0 = 1.
bool vdp_basis(const PadicScalar& t, std::uint64_t n);
/// n with its most significant base-p digit removed.
std::uint64_t n_minus(std::uint32_t p, std::uint64_t n);
/// Number of base-p digits of n (0 for n = 0).
std::uint32_t digit_length(std::uint32_t p, std::uint64_t n);

/// a_0 = f(0), a_n = f(n) - f(n_-) for a function given at 0..size-1.
std::vector<PadicScalar> vdp_coefficients(std::span<const PadicScalar> f);

/// Coefficients b with sum_n b_n C(t, n) = sum_n c_n C(t + 1, n): b_n = c_n + c_{n+1}.
std::vector<PadicScalar> mahler_shift(std::span<const PadicScalar> c);

struct SeriesValue {
    PadicScalar value;
    Norm truncation_radius;
};

/// Z_n is drawn from (seed, n); all points share one draw.
PadicScalar coefficient_draw(const SeriesSpec& spec, std::uint64_t n);

SeriesValue series_eval(const SeriesSpec& spec, const PadicScalar& t);

/// Basis values f_n(t) mod p^abs_prec for n < spec.terms(), as residues.
std::vector<std::uint64_t> basis_residues(const SeriesSpec& spec, const PadicScalar& t);

bool stationary_mahler(const SeriesSpec& spec);
bool stationary_vdp(const SeriesSpec& spec);

/// Exact law of (X(t_i) mod p^r)_i over the joint cells, cell index with point 0 least significant.
std::vector<double> exact_quotient_law(const SeriesSpec& spec, std::span<const PadicScalar> points, std::uint32_t r);

struct StationarityReport {
    harness::TestReport test;
    double tv = 0.0;
    std::vector<std::uint64_t> original;
    std::vector<std::uint64_t> shifted;
};

/// Two-sample comparison of (X(t_i))_i and (X(t_i + s))_i on (Z_p / p^r)^k from independent draws.
StationarityReport stationarity_test(const SeriesSpec& spec, const PadicScalar& s, std::span<const PadicScalar> points,
                                     std::uint32_t r, std::uint64_t reps, double alpha = harness::kDefaultAlpha);

}  // namespace ultrabrown::series
