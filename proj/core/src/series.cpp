#include "ultrabrown/series.hpp"

#include <algorithm>
#include <stdexcept>

#include "ultrabrown/parallel.hpp"
#include "ultrabrown/residue.hpp"

namespace ultrabrown::series {

namespace {

constexpr std::uint64_t kCoefficientTag = 0x73657269ULL;

bool is_zero_coefficient(std::int64_t v) { return v == padic::kInfiniteValuation; }

SeriesSpec replica(const SeriesSpec& spec, std::uint64_t index) {
    SeriesSpec s = spec;
    s.seed = rng::combine(spec.seed, index);
    return s;
}

std::uint64_t coefficient_residue(const SeriesSpec& spec, const padic::ResidueRing& ring, std::uint64_t n) {
    rng::KeyedStream stream(rng::RngKey{spec.seed, rng::combine(kCoefficientTag, n)});
    return stream.uniform_below(ring.modulus());
}

// X(t) mod p^m from precomputed basis residues.
std::uint64_t evaluate(const SeriesSpec& spec, const padic::ResidueRing& ring, std::span<const std::uint64_t> basis) {
    std::uint64_t x = 0;
    for (std::size_t n = 0; n < basis.size(); ++n) {
        const std::int64_t v = spec.valuations[n];
        if (is_zero_coefficient(v) || v >= spec.abs_prec || basis[n] == 0) continue;
        const std::uint64_t z = coefficient_residue(spec, ring, n);
        x = ring.add(x, ring.mul(ring.mul(ring.power(static_cast<std::uint32_t>(v)), z), basis[n]),
                     padic::AddMode::carry);
    }
    return x;
}

std::uint64_t ipow(std::uint64_t base, std::uint64_t exp) {
    std::uint64_t r = 1;
    for (std::uint64_t i = 0; i < exp; ++i) r *= base;
    return r;
}

}  // namespace

Norm SeriesSpec::truncation_radius() const {
    Norm r = Norm::zero();
    for (std::size_t n = M + 1; n < valuations.size(); ++n)
        if (!is_zero_coefficient(valuations[n])) r = padic::max(r, Norm::of(p, valuations[n]));
    return r;
}

std::size_t SeriesSpec::terms() const {
    return std::min<std::size_t>(valuations.size(), static_cast<std::size_t>(M) + 1);
}

void SeriesSpec::validate() const {
    if (!padic::is_prime(p)) throw padic::PadicError("p must be prime");
    if (abs_prec <= 0 || static_cast<std::uint64_t>(abs_prec) > padic::ResidueRing::max_precision(p))
        throw std::invalid_argument("series precision out of range for residues");
    for (auto v : valuations)
        if (!is_zero_coefficient(v) && v < 0) throw std::invalid_argument("coefficients must lie in Z_p");
}

PadicScalar mahler_binom(const PadicScalar& t, std::uint64_t n) {
    if (!t.in_unit_ball()) throw padic::PadicError("mahler_binom needs t in Z_p");
    const std::uint32_t p = t.prime();
    const std::int64_t loss = padic::factorial_valuation(p, n);
    if (t.abs_prec() <= loss) throw padic::PadicError("precision exhausted by v_p(n!)");
    const std::int64_t wide = t.abs_prec() + loss + 64;
    PadicScalar c = PadicScalar::one(p, t.abs_prec());
    for (std::uint64_t k = 1; k <= n; ++k) {
        c = c.mul(t.sub(PadicScalar::from_integer(p, static_cast<std::int64_t>(k - 1), wide)));
        c = c.div(PadicScalar::from_integer(p, static_cast<std::int64_t>(k), wide));
    }
    const std::int64_t prec = std::min(c.abs_prec(), t.abs_prec() - loss);
    if (prec <= 0) throw padic::PadicError("precision exhausted by v_p(n!)");
    return c.with_precision(prec);
}

std::uint32_t digit_length(std::uint32_t p, std::uint64_t n) {
    std::uint32_t len = 0;
    for (; n > 0; n /= p) ++len;
    return len;
}

bool vdp_basis(const PadicScalar& t, std::uint64_t n) {
    if (!t.in_unit_ball()) throw padic::PadicError("vdp_basis needs t in Z_p");
    const std::uint32_t p = t.prime();
    const std::uint32_t len = digit_length(p, n);
    if (t.abs_prec() < len) throw padic::PadicError("insufficient precision for e_n");
    for (std::uint32_t k = 0; k < len; ++k, n /= p)
        if (t.digit(k) != n % p) return false;
    return true;
}

std::uint64_t n_minus(std::uint32_t p, std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t top = ipow(p, digit_length(p, n) - 1);
    return n % top;
}

std::vector<PadicScalar> vdp_coefficients(std::span<const PadicScalar> f) {
    std::vector<PadicScalar> a;
    a.reserve(f.size());
    for (std::size_t n = 0; n < f.size(); ++n)
        a.push_back(n == 0 ? f[0] : f[n].sub(f[n_minus(f[n].prime(), n)]));
    return a;
}

std::vector<PadicScalar> mahler_shift(std::span<const PadicScalar> c) {
    std::vector<PadicScalar> b;
    b.reserve(c.size());
    for (std::size_t n = 0; n < c.size(); ++n) b.push_back(n + 1 < c.size() ? c[n].add(c[n + 1]) : c[n]);
    return b;
}

PadicScalar coefficient_draw(const SeriesSpec& spec, std::uint64_t n) {
    spec.validate();
    const padic::ResidueRing ring(spec.p, static_cast<std::uint32_t>(spec.abs_prec));
    return ring.to_scalar(coefficient_residue(spec, ring, n));
}

std::vector<std::uint64_t> basis_residues(const SeriesSpec& spec, const PadicScalar& t) {
    spec.validate();
    if (t.prime() != spec.p) throw padic::PadicError("point has another base");
    const auto m = static_cast<std::uint32_t>(spec.abs_prec);
    const padic::ResidueRing ring(spec.p, m);
    std::vector<std::uint64_t> out(spec.terms(), 0);
    for (std::size_t n = 0; n < out.size(); ++n) {
        const std::int64_t v = spec.valuations[n];
        if (is_zero_coefficient(v) || v >= spec.abs_prec) continue;
        if (spec.basis == Basis::van_der_put) {
            out[n] = vdp_basis(t, n) ? 1 : 0;
            continue;
        }
        const PadicScalar c = mahler_binom(t, n);
        // The term p^v Z c needs c mod p^{m - v}.
        if (c.abs_prec() < spec.abs_prec - v) throw padic::PadicError("point precision too low for the series");
        const auto known = static_cast<std::uint32_t>(std::min<std::int64_t>(c.abs_prec(), m));
        std::uint64_t r = 0;
        for (std::uint32_t k = known; k-- > 0;) r = r * spec.p + c.digit(k);
        out[n] = r;
    }
    return out;
}

SeriesValue series_eval(const SeriesSpec& spec, const PadicScalar& t) {
    const padic::ResidueRing ring(spec.p, static_cast<std::uint32_t>(spec.abs_prec));
    const auto basis = basis_residues(spec, t);
    return {ring.to_scalar(evaluate(spec, ring, basis)), spec.truncation_radius()};
}

bool stationary_mahler(const SeriesSpec& spec) {
    if (spec.basis != Basis::mahler) throw std::invalid_argument("stationary_mahler needs the Mahler basis");
    const std::size_t n = spec.terms();
    for (std::size_t i = 1; i < n; ++i)
        if (spec.valuations[i] < spec.valuations[i - 1]) return false;
    return true;
}

bool stationary_vdp(const SeriesSpec& spec) {
    if (spec.basis != Basis::van_der_put) throw std::invalid_argument("stationary_vdp needs the van der Put basis");
    const std::size_t n = spec.terms();
    if (n <= 1) return true;
    std::int64_t previous = spec.valuations[0];
    for (std::uint64_t start = 1; start < n; start *= spec.p) {
        const std::int64_t head = spec.valuations[start];
        if (head < previous) return false;
        const std::uint64_t stop = std::min<std::uint64_t>(start * spec.p, n);
        for (std::uint64_t i = start; i < stop; ++i)
            if (spec.valuations[i] != head) return false;
        previous = head;
    }
    return true;
}

std::vector<double> exact_quotient_law(const SeriesSpec& spec, std::span<const PadicScalar> points, std::uint32_t r) {
    if (r == 0 || r > spec.abs_prec) throw std::invalid_argument("quotient level must lie in [1, abs_prec]");
    const std::size_t k = points.size();
    const padic::ResidueRing q(spec.p, r);
    const std::uint64_t cells = ipow(q.modulus(), k);
    std::vector<std::vector<std::uint64_t>> basis;
    for (const auto& t : points) basis.push_back(basis_residues(spec, t));
    std::vector<double> law(cells, 0.0);
    law[0] = 1.0;
    std::vector<std::uint64_t> shift(k);
    for (std::size_t n = 0; n < spec.terms(); ++n) {
        const std::int64_t v = spec.valuations[n];
        if (is_zero_coefficient(v) || v >= static_cast<std::int64_t>(r)) continue;
        // Only Z mod p^{r - v} reaches the quotient.
        const std::uint64_t draws = q.power(r - static_cast<std::uint32_t>(v));
        std::vector<double> next(cells, 0.0);
        for (std::uint64_t z = 0; z < draws; ++z) {
            for (std::size_t i = 0; i < k; ++i)
                shift[i] = q.mul(q.mul(q.power(static_cast<std::uint32_t>(v)), z), q.truncate(basis[i][n], r));
            for (std::uint64_t c = 0; c < cells; ++c) {
                if (law[c] == 0.0) continue;
                std::uint64_t rest = c, target = 0, scale = 1;
                for (std::size_t i = 0; i < k; ++i) {
                    target += q.add(rest % q.modulus(), shift[i], padic::AddMode::carry) * scale;
                    rest /= q.modulus();
                    scale *= q.modulus();
                }
                next[target] += law[c] / static_cast<double>(draws);
            }
        }
        law = std::move(next);
    }
    return law;
}

StationarityReport stationarity_test(const SeriesSpec& spec, const PadicScalar& s, std::span<const PadicScalar> points,
                                     std::uint32_t r, std::uint64_t reps, double alpha) {
    spec.validate();
    if (r == 0 || r > spec.abs_prec) throw std::invalid_argument("quotient level must lie in [1, abs_prec]");
    if (points.empty()) throw std::invalid_argument("stationarity_test needs at least one point");
    const padic::ResidueRing ring(spec.p, static_cast<std::uint32_t>(spec.abs_prec));
    const std::size_t k = points.size();
    std::vector<std::vector<std::uint64_t>> base, moved;
    for (const auto& t : points) {
        base.push_back(basis_residues(spec, t));
        moved.push_back(basis_residues(spec, t.add(s)));
    }
    const std::uint64_t q = ring.power(r);
    const std::uint64_t cells = ipow(q, k);
    auto joint = [&](const SeriesSpec& draw, const std::vector<std::vector<std::uint64_t>>& b) {
        std::uint64_t cell = 0;
        for (std::size_t i = k; i-- > 0;) cell = cell * q + ring.truncate(evaluate(draw, ring, b[i]), r);
        return cell;
    };
    auto rows = parallel_map<std::pair<std::uint64_t, std::uint64_t>>(reps, [&](std::size_t rep) {
        return std::pair{joint(replica(spec, 2 * rep), base), joint(replica(spec, 2 * rep + 1), moved)};
    });
    StationarityReport out;
    out.original.assign(cells, 0);
    out.shifted.assign(cells, 0);
    for (const auto& [a, b] : rows) {
        ++out.original[a];
        ++out.shifted[b];
    }
    out.test = harness::chi_square_homogeneity(out.original, out.shifted, alpha, "stationarity");
    out.test.seed = spec.seed;
    out.tv = harness::tv_distance(out.original, out.shifted);
    return out;
}

}  // namespace ultrabrown::series
