#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ultrabrown/padic.hpp"
#include "ultrabrown/residue.hpp"
#include "ultrabrown/rng.hpp"
#include "ultrabrown/stats.hpp"

namespace ultrabrown::gaussian {

using padic::PadicScalar;
using padic::PadicVector;

/// Law of a K-Gaussian vector in K^d: normalized Haar measure on p^level D^d,
/// so ||X||_inf = p^{-level}. Samples are known modulo p^abs_prec.
struct GaussianSpec {
    std::uint32_t p = 2;
    std::int64_t level = 0;
    std::size_t dim = 1;
    std::int64_t abs_prec = 32;
    /// The point mass at 0.
    bool degenerate = false;

    padic::Norm sup_norm() const { return degenerate ? padic::Norm::zero() : padic::Norm::of(p, level); }
};

/// One draw: every coordinate has i.i.d. uniform digits at positions
/// level..abs_prec-1 and zeros below. Pure function of (spec, key).
PadicVector sample(const GaussianSpec& spec, const rng::RngKey& key);

/// Residue fast path: uniform on p^level D / p^prec D.
inline std::uint64_t sample_residue(const padic::ResidueRing& ring, std::uint32_t level, rng::KeyedStream& stream) {
    if (level >= ring.precision()) return 0;
    return ring.power(level) * stream.uniform_below(ring.power(ring.precision() - level));
}

/// Fourier transform of the law at xi (d = 1): 1 if |xi| <= p^level, else 0.
double char_exact(const GaussianSpec& spec, const PadicScalar& xi);

/// The additive character chi(x) = exp(2 pi i {x}_p).
std::complex<double> character(const PadicScalar& x);

/// Empirical mean of chi(xi * X) over one-dimensional samples.
std::complex<double> char_empirical(std::span<const PadicVector> samples, const PadicScalar& xi);

/// Dense matrix over K, row-major.
struct PadicMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<PadicScalar> entries;

    const PadicScalar& at(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }
    static PadicMatrix identity(std::uint32_t p, std::size_t n, std::int64_t abs_prec);
};

/// Row vectors times A: y = x A for every sample x.
std::vector<PadicVector> transform(std::span<const PadicVector> samples, const PadicMatrix& a);

/// Index of x mod p^level in (D / p^level D)^d, coordinates little-endian.
std::uint64_t quotient_cell(const PadicVector& x, std::uint32_t level);
std::uint64_t quotient_cell_count(std::uint32_t p, std::size_t dim, std::uint32_t level);
std::vector<std::uint64_t> quotient_histogram(std::span<const PadicVector> samples, std::uint32_t level);

/// Chi-square contingency test of U and V on (D / p^level D)^d x (D / p^level D)^d.
harness::TestReport independence_test(std::span<const std::pair<PadicVector, PadicVector>> pairs,
                                      std::uint32_t level, double alpha = harness::kDefaultAlpha);

/// Residue form of the same test; u and v already reduced to cell indices.
harness::TestReport independence_test_cells(std::span<const std::uint64_t> u_cells,
                                            std::span<const std::uint64_t> v_cells, std::uint64_t u_count,
                                            std::uint64_t v_count, double alpha = harness::kDefaultAlpha,
                                            std::string name = "independence");

}  // namespace ultrabrown::gaussian
