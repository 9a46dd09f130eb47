#include "ultrabrown/residue.hpp"

#include <string>

namespace ultrabrown::padic {

ResidueRing::ResidueRing(std::uint32_t p, std::uint32_t prec) : p_(p), prec_(prec) {
    if (!is_prime(p)) throw PadicError("base must be prime: " + std::to_string(p));
    if (prec > max_precision(p))
        throw PadicError("precision " + std::to_string(prec) + " exceeds word-sized residues for p=" +
                         std::to_string(p));
    pow_.resize(prec + 1);
    pow_[0] = 1;
    for (std::uint32_t k = 1; k <= prec; ++k) pow_[k] = pow_[k - 1] * p;
}

std::uint32_t ResidueRing::max_precision(std::uint32_t p) {
    constexpr std::uint64_t kLimit = std::uint64_t{1} << 62;
    std::uint32_t k = 0;
    for (std::uint64_t v = 1; v <= kLimit / p; v *= p) ++k;
    return k;
}

std::uint64_t ResidueRing::negate(std::uint64_t a, AddMode mode) const {
    if (mode == AddMode::carry) return a == 0 ? 0 : modulus() - a;
    if (p_ == 2) return a;
    std::uint64_t out = 0;
    for (std::uint32_t k = 0; k < prec_; ++k) {
        const std::uint64_t d = digit(a, k);
        out += ((p_ - d) % p_) * pow_[k];
    }
    return out;
}

std::uint64_t ResidueRing::add_digitwise(std::uint64_t a, std::uint64_t b) const {
    if (p_ == 2) return a ^ b;
    std::uint64_t out = 0;
    for (std::uint32_t k = 0; k < prec_; ++k) {
        const std::uint64_t d = (a % p_ + b % p_) % p_;
        out += d * pow_[k];
        a /= p_;
        b /= p_;
    }
    return out;
}

std::uint32_t ResidueRing::valuation(std::uint64_t a) const {
    if (a == 0) return prec_;
    std::uint32_t v = 0;
    while (a % p_ == 0) {
        a /= p_;
        ++v;
    }
    return v;
}

std::uint64_t ResidueRing::from_scalar(const PadicScalar& x) const {
    if (x.prime() != p_) throw PadicError("base mismatch");
    if (!x.in_unit_ball()) throw PadicError("residues represent elements of D only");
    if (x.abs_prec() < static_cast<std::int64_t>(prec_)) throw PadicError("insufficient precision for residue");
    std::uint64_t out = 0;
    for (std::uint32_t k = 0; k < prec_; ++k) out += x.digit(k) * pow_[k];
    return out;
}

PadicScalar ResidueRing::to_scalar(std::uint64_t a) const {
    std::vector<std::uint32_t> digits(prec_);
    for (std::uint32_t k = 0; k < prec_; ++k) digits[k] = digit(a, k);
    return PadicScalar::from_digits(p_, 0, std::move(digits), prec_);
}

}  // namespace ultrabrown::padic
