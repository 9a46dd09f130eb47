#pragma once

#include <cstdint>
#include <vector>

#include "ultrabrown/padic.hpp"

namespace ultrabrown::padic {

/// Word-sized arithmetic in D / p^prec D, the fast path used by the
/// process simulators. Residues are integers in [0, p^prec). Both addition
/// laws are supported; multiplication is the Z/p^prec ring product.
class ResidueRing {
public:
    ResidueRing(std::uint32_t p, std::uint32_t prec);

    /// Largest prec with p^prec <= 2^62.
    static std::uint32_t max_precision(std::uint32_t p);

    std::uint32_t prime() const { return p_; }
    std::uint32_t precision() const { return prec_; }
    std::uint64_t modulus() const { return pow_[prec_]; }
    /// p^k for 0 <= k <= prec.
    std::uint64_t power(std::uint32_t k) const { return pow_[k]; }

    std::uint64_t add(std::uint64_t a, std::uint64_t b, AddMode mode) const {
        if (mode == AddMode::carry) {
            const std::uint64_t s = a + b;
            return s >= modulus() ? s - modulus() : s;
        }
        return add_digitwise(a, b);
    }
    std::uint64_t negate(std::uint64_t a, AddMode mode) const;
    std::uint64_t sub(std::uint64_t a, std::uint64_t b, AddMode mode) const { return add(a, negate(b, mode), mode); }
    std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % modulus());
    }

    /// Reduction to D / p^level D (level <= prec).
    std::uint64_t truncate(std::uint64_t a, std::uint32_t level) const { return a % pow_[level]; }
    std::uint32_t digit(std::uint64_t a, std::uint32_t position) const {
        return static_cast<std::uint32_t>((a / pow_[position]) % p_);
    }
    /// Valuation, or prec when a == 0 (zero to the known precision).
    std::uint32_t valuation(std::uint64_t a) const;
    /// True iff |a| <= p^{-level}, i.e. a == 0 mod p^level.
    bool within(std::uint64_t a, std::uint32_t level) const { return a % pow_[level] == 0; }

    std::uint64_t from_scalar(const PadicScalar& x) const;
    PadicScalar to_scalar(std::uint64_t a) const;

private:
    std::uint64_t add_digitwise(std::uint64_t a, std::uint64_t b) const;

    std::uint32_t p_;
    std::uint32_t prec_;
    std::vector<std::uint64_t> pow_;
};

}  // namespace ultrabrown::padic
