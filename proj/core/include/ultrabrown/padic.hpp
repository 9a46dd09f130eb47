#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace ultrabrown::padic {

using Rational = boost::multiprecision::cpp_rational;

/// Addition law. `carry` is ordinary Q_p addition; `digitwise` adds digits
/// mod p without carries (the p-series field F_p((T)), additive structure only).
enum class AddMode { carry, digitwise };

inline constexpr std::int64_t kInfiniteValuation = std::numeric_limits<std::int64_t>::max();

/// Raised for base mismatches, precision exhaustion and inversion of zero.
class PadicError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

bool is_prime(std::uint64_t n);

/// p^{-v}, or 0. Totally ordered; comparing two nonzero norms of different
/// bases throws.
class Norm {
public:
    Norm() = default;

    static Norm zero() { return Norm{}; }
    static Norm of(std::uint32_t p, std::int64_t valuation);

    bool is_zero() const { return zero_; }
    std::uint32_t base() const { return p_; }
    /// Valuation v with norm p^{-v}; kInfiniteValuation for zero.
    std::int64_t valuation() const { return zero_ ? kInfiniteValuation : v_; }

    double to_double() const;
    Rational to_rational() const;

    Norm operator*(const Norm& other) const;

    friend std::strong_ordering operator<=>(const Norm& a, const Norm& b);
    friend bool operator==(const Norm& a, const Norm& b) { return (a <=> b) == 0; }

private:
    bool zero_ = true;
    std::uint32_t p_ = 0;
    std::int64_t v_ = 0;
};

Norm max(const Norm& a, const Norm& b);

/// A finite-precision element of Q_p: the value is known modulo p^abs_prec.
///
/// Stored as p^val * (d0 + d1 p + d2 p^2 + ...), least significant digit first,
/// with d0 != 0. High zero digits are trimmed, so digits().size() may be
/// smaller than the relative precision. An element with no known nonzero
/// digit is the zero of its precision class: norm 0, valuation kInfiniteValuation.
///
/// Precision bookkeeping: addition keeps the smaller absolute precision;
/// multiplication and inversion keep the smaller relative precision
/// (abs_prec - val), so dividing by y costs val(y) absolute digits.
class PadicScalar {
public:
    PadicScalar() = default;

    static PadicScalar zero(std::uint32_t p, std::int64_t abs_prec);
    static PadicScalar one(std::uint32_t p, std::int64_t abs_prec) { return from_integer(p, 1, abs_prec); }
    static PadicScalar from_integer(std::uint32_t p, std::int64_t value, std::int64_t abs_prec);
    /// num/den known modulo p^abs_prec. Throws if den == 0.
    static PadicScalar from_rational(std::uint32_t p, std::int64_t num, std::int64_t den,
                                     std::int64_t abs_prec);
    /// p^val * sum digits[i] p^i, truncated to abs_prec and normalized.
    static PadicScalar from_digits(std::uint32_t p, std::int64_t val, std::vector<std::uint32_t> digits,
                                   std::int64_t abs_prec);

    std::uint32_t prime() const { return p_; }
    bool is_zero() const { return digits_.empty(); }
    std::int64_t valuation() const { return is_zero() ? kInfiniteValuation : val_; }
    std::int64_t abs_prec() const { return abs_prec_; }
    /// Number of significant digits, abs_prec - val; 0 for zero.
    std::int64_t rel_prec() const { return is_zero() ? 0 : abs_prec_ - val_; }
    const std::vector<std::uint32_t>& digits() const { return digits_; }
    Norm norm() const { return is_zero() ? Norm::zero() : Norm::of(p_, val_); }

    /// Digit of p^position; positions at or above abs_prec are unknown and throw.
    std::uint32_t digit(std::int64_t position) const;
    bool in_unit_ball() const { return is_zero() || val_ >= 0; }

    /// Same value, known to fewer digits. Throws if m > abs_prec.
    PadicScalar with_precision(std::int64_t m) const;
    /// Multiplication by p^k (exact: shifts valuation and precision).
    PadicScalar shifted(std::int64_t k) const;

    PadicScalar add(const PadicScalar& y, AddMode mode = AddMode::carry) const;
    PadicScalar negate(AddMode mode = AddMode::carry) const;
    PadicScalar sub(const PadicScalar& y, AddMode mode = AddMode::carry) const;
    PadicScalar mul(const PadicScalar& y) const;
    PadicScalar inv() const;
    PadicScalar div(const PadicScalar& y) const { return mul(y.inv()); }

    /// Fractional part sum_{i<0} d_i p^i as a real number in [0, 1).
    double fractional_part() const;

    /// Equal values at the common precision min(abs_prec).
    bool congruent(const PadicScalar& y) const;

    /// "p^v * (d0 d1 ... | m)"; zero is "p^inf * ( | m)".
    std::string to_string() const;
    static PadicScalar parse(std::string_view text);

    /// Digits at positions 0..abs_prec-1 as base-36 characters, least
    /// significant first. Requires p <= 36 and the element to lie in D.
    std::string to_digit_string() const;
    static PadicScalar from_digit_string(std::uint32_t p, std::string_view text);

    friend PadicScalar operator+(const PadicScalar& a, const PadicScalar& b) { return a.add(b); }
    friend PadicScalar operator-(const PadicScalar& a, const PadicScalar& b) { return a.sub(b); }
    friend PadicScalar operator*(const PadicScalar& a, const PadicScalar& b) { return a.mul(b); }
    friend PadicScalar operator-(const PadicScalar& a) { return a.negate(); }

    /// Representation equality: same base, precision, valuation and digits.
    friend bool operator==(const PadicScalar&, const PadicScalar&) = default;

private:
    PadicScalar(std::uint32_t p, std::int64_t val, std::vector<std::uint32_t> digits, std::int64_t abs_prec);
    void normalize();
    void require_same_base(const PadicScalar& y) const;

    std::uint32_t p_ = 2;
    std::int64_t val_ = 0;
    std::vector<std::uint32_t> digits_;
    std::int64_t abs_prec_ = 0;
};

/// Element of K^d with the sup norm.
class PadicVector {
public:
    PadicVector() = default;
    explicit PadicVector(std::vector<PadicScalar> coords);

    static PadicVector zero(std::uint32_t p, std::size_t dim, std::int64_t abs_prec);

    std::size_t dim() const { return coords_.size(); }
    std::uint32_t prime() const { return coords_.empty() ? 0 : coords_.front().prime(); }
    std::int64_t abs_prec() const;
    const PadicScalar& operator[](std::size_t i) const { return coords_[i]; }
    const std::vector<PadicScalar>& coords() const { return coords_; }

    Norm norm() const;
    bool in_unit_ball() const;

    PadicVector add(const PadicVector& y, AddMode mode = AddMode::carry) const;
    PadicVector sub(const PadicVector& y, AddMode mode = AddMode::carry) const;
    PadicVector negate(AddMode mode = AddMode::carry) const;
    PadicVector scale(const PadicScalar& c) const;
    PadicVector with_precision(std::int64_t m) const;

    /// Coordinate digit strings joined by ':'.
    std::string to_digit_string() const;

    friend bool operator==(const PadicVector&, const PadicVector&) = default;

private:
    std::vector<PadicScalar> coords_;
};

/// v_p(n!) by Legendre's formula.
std::int64_t factorial_valuation(std::uint32_t p, std::uint64_t n);

}  // namespace ultrabrown::padic
