#include "ultrabrown/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ultrabrown::gaussian {

PadicVector sample(const GaussianSpec& spec, const rng::RngKey& key) {
    if (spec.degenerate) return PadicVector::zero(spec.p, spec.dim, spec.abs_prec);
    if (spec.abs_prec <= spec.level) throw padic::PadicError("sample needs abs_prec > level");
    std::vector<PadicScalar> coords;
    coords.reserve(spec.dim);
    const auto count = static_cast<std::size_t>(spec.abs_prec - spec.level);
    for (std::size_t i = 0; i < spec.dim; ++i) {
        rng::KeyedStream stream(key.child(i));
        coords.push_back(PadicScalar::from_digits(spec.p, spec.level, stream.digits(spec.p, count), spec.abs_prec));
    }
    return PadicVector(std::move(coords));
}

double char_exact(const GaussianSpec& spec, const PadicScalar& xi) {
    if (spec.dim != 1) throw std::invalid_argument("char_exact is defined for d = 1");
    if (spec.degenerate || xi.is_zero()) return 1.0;
    // Phi(||X|| |xi|) = 1 iff |xi| <= p^level iff val(xi) >= -level.
    return xi.valuation() >= -spec.level ? 1.0 : 0.0;
}

std::complex<double> character(const PadicScalar& x) {
    const double angle = 2.0 * std::numbers::pi * x.fractional_part();
    return {std::cos(angle), std::sin(angle)};
}

std::complex<double> char_empirical(std::span<const PadicVector> samples, const PadicScalar& xi) {
    if (samples.empty()) throw std::invalid_argument("char_empirical needs at least one sample");
    std::complex<double> sum{0.0, 0.0};
    for (const auto& x : samples) {
        if (x.dim() != 1) throw std::invalid_argument("char_empirical is defined for d = 1");
        const PadicScalar prod = xi.mul(x[0]);
        if (prod.abs_prec() < 0) throw padic::PadicError("sample precision too low to resolve the character");
        sum += character(prod);
    }
    return sum / static_cast<double>(samples.size());
}

PadicMatrix PadicMatrix::identity(std::uint32_t p, std::size_t n, std::int64_t abs_prec) {
    PadicMatrix m{n, n, std::vector<PadicScalar>(n * n, PadicScalar::zero(p, abs_prec))};
    for (std::size_t i = 0; i < n; ++i) m.entries[i * n + i] = PadicScalar::one(p, abs_prec);
    return m;
}

std::vector<PadicVector> transform(std::span<const PadicVector> samples, const PadicMatrix& a) {
    std::vector<PadicVector> out;
    out.reserve(samples.size());
    for (const auto& x : samples) {
        if (x.dim() != a.rows) throw std::invalid_argument("transform dimension mismatch");
        std::vector<PadicScalar> y;
        y.reserve(a.cols);
        for (std::size_t j = 0; j < a.cols; ++j) {
            PadicScalar acc = x[0].mul(a.at(0, j));
            for (std::size_t i = 1; i < a.rows; ++i) acc = acc.add(x[i].mul(a.at(i, j)));
            y.push_back(std::move(acc));
        }
        out.emplace_back(std::move(y));
    }
    return out;
}

std::uint64_t quotient_cell_count(std::uint32_t p, std::size_t dim, std::uint32_t level) {
    std::uint64_t n = 1;
    for (std::size_t i = 0; i < dim * level; ++i) n *= p;
    return n;
}

std::uint64_t quotient_cell(const PadicVector& x, std::uint32_t level) {
    if (!x.in_unit_ball()) throw padic::PadicError("quotient cells are defined on D^d");
    if (x.abs_prec() < level) throw padic::PadicError("insufficient precision for quotient level");
    std::uint64_t cell = 0;
    for (std::size_t i = x.dim(); i-- > 0;)
        for (std::uint32_t j = level; j-- > 0;) cell = cell * x.prime() + x[i].digit(j);
    return cell;
}

std::vector<std::uint64_t> quotient_histogram(std::span<const PadicVector> samples, std::uint32_t level) {
    if (samples.empty()) throw std::invalid_argument("empty sample set");
    std::vector<std::uint64_t> counts(quotient_cell_count(samples[0].prime(), samples[0].dim(), level), 0);
    for (const auto& x : samples) ++counts[quotient_cell(x, level)];
    return counts;
}

harness::TestReport independence_test_cells(std::span<const std::uint64_t> u_cells,
                                            std::span<const std::uint64_t> v_cells, std::uint64_t u_count,
                                            std::uint64_t v_count, double alpha, std::string name) {
    if (u_cells.size() != v_cells.size()) throw std::invalid_argument("paired samples differ in length");
    std::vector<std::uint64_t> table(u_count * v_count, 0);
    for (std::size_t k = 0; k < u_cells.size(); ++k) ++table[u_cells[k] * v_count + v_cells[k]];
    return harness::chi_square_independence(table, u_count, v_count, alpha, std::move(name));
}

harness::TestReport independence_test(std::span<const std::pair<PadicVector, PadicVector>> pairs,
                                      std::uint32_t level, double alpha) {
    if (pairs.empty()) throw harness::UndersampledError("no samples");
    std::vector<std::uint64_t> u, v;
    u.reserve(pairs.size());
    v.reserve(pairs.size());
    for (const auto& [a, b] : pairs) {
        u.push_back(quotient_cell(a, level));
        v.push_back(quotient_cell(b, level));
    }
    const auto& [a0, b0] = pairs.front();
    return independence_test_cells(u, v, quotient_cell_count(a0.prime(), a0.dim(), level),
                                   quotient_cell_count(b0.prime(), b0.dim(), level), alpha);
}

}  // namespace ultrabrown::gaussian
