#include "ultrabrown/padic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace ultrabrown::padic {

namespace {

std::uint32_t checked_base(std::uint32_t p) {
    if (!is_prime(p)) throw PadicError("base must be prime: " + std::to_string(p));
    return p;
}

std::uint32_t inverse_mod_prime(std::uint32_t a, std::uint32_t p) {
    // Extended Euclid on (a, p).
    std::int64_t t = 0, new_t = 1;
    std::int64_t r = p, new_r = a % p;
    while (new_r != 0) {
        const std::int64_t q = r / new_r;
        t = std::exchange(new_t, t - q * new_t);
        r = std::exchange(new_r, r - q * new_r);
    }
    if (r != 1) throw PadicError("digit is not invertible mod p");
    if (t < 0) t += p;
    return static_cast<std::uint32_t>(t);
}

// Digits of a - b mod p^len (both given as digit vectors, missing digits zero).
void subtract_in_place(std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b, std::size_t offset,
                       std::uint32_t p) {
    std::int64_t borrow = 0;
    for (std::size_t i = offset; i < a.size(); ++i) {
        const std::size_t j = i - offset;
        std::int64_t t = static_cast<std::int64_t>(a[i]) - borrow - (j < b.size() ? b[j] : 0);
        borrow = 0;
        if (t < 0) {
            const std::int64_t k = (-t + p - 1) / p;
            t += k * static_cast<std::int64_t>(p);
            borrow = k;
        }
        a[i] = static_cast<std::uint32_t>(t);
    }
}

// Digits of c * b (c < p) truncated to len digits.
std::vector<std::uint32_t> scale_digits(const std::vector<std::uint32_t>& b, std::uint32_t c, std::size_t len,
                                        std::uint32_t p) {
    std::vector<std::uint32_t> out(len, 0);
    std::uint64_t carry = 0;
    for (std::size_t i = 0; i < len; ++i) {
        const std::uint64_t t = (i < b.size() ? static_cast<std::uint64_t>(b[i]) * c : 0) + carry;
        out[i] = static_cast<std::uint32_t>(t % p);
        carry = t / p;
    }
    return out;
}

}  // namespace

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

// ---------------------------------------------------------------- Norm

Norm Norm::of(std::uint32_t p, std::int64_t valuation) {
    Norm n;
    n.zero_ = false;
    n.p_ = p;
    n.v_ = valuation;
    return n;
}

double Norm::to_double() const {
    if (zero_) return 0.0;
    return std::pow(static_cast<double>(p_), -static_cast<double>(v_));
}

Rational Norm::to_rational() const {
    if (zero_) return Rational(0);
    boost::multiprecision::cpp_int pk = boost::multiprecision::pow(boost::multiprecision::cpp_int(p_),
                                                                   static_cast<unsigned>(v_ < 0 ? -v_ : v_));
    return v_ < 0 ? Rational(pk) : Rational(boost::multiprecision::cpp_int(1), pk);
}

Norm Norm::operator*(const Norm& other) const {
    if (zero_ || other.zero_) return zero();
    if (p_ != other.p_) throw PadicError("norm base mismatch");
    return of(p_, v_ + other.v_);
}

std::strong_ordering operator<=>(const Norm& a, const Norm& b) {
    if (a.zero_ || b.zero_) return static_cast<int>(!a.zero_) <=> static_cast<int>(!b.zero_);
    if (a.p_ != b.p_) throw PadicError("norm base mismatch");
    return b.v_ <=> a.v_;
}

Norm max(const Norm& a, const Norm& b) { return a < b ? b : a; }

// ---------------------------------------------------------------- PadicScalar

PadicScalar::PadicScalar(std::uint32_t p, std::int64_t val, std::vector<std::uint32_t> digits, std::int64_t abs_prec)
    : p_(p), val_(val), digits_(std::move(digits)), abs_prec_(abs_prec) {
    normalize();
}

void PadicScalar::normalize() {
    // Drop digits at or beyond the absolute precision.
    const std::int64_t keep = abs_prec_ - val_;
    if (keep <= 0) {
        digits_.clear();
    } else if (static_cast<std::int64_t>(digits_.size()) > keep) {
        digits_.resize(static_cast<std::size_t>(keep));
    }
    auto first = std::find_if(digits_.begin(), digits_.end(), [](std::uint32_t d) { return d != 0; });
    if (first == digits_.end()) {
        digits_.clear();
        val_ = 0;
        return;
    }
    const auto shift = first - digits_.begin();
    digits_.erase(digits_.begin(), first);
    val_ += shift;
    while (!digits_.empty() && digits_.back() == 0) digits_.pop_back();
}

void PadicScalar::require_same_base(const PadicScalar& y) const {
    if (p_ != y.p_) throw PadicError("base mismatch: " + std::to_string(p_) + " vs " + std::to_string(y.p_));
}

PadicScalar PadicScalar::zero(std::uint32_t p, std::int64_t abs_prec) {
    return PadicScalar(checked_base(p), 0, {}, abs_prec);
}

PadicScalar PadicScalar::from_integer(std::uint32_t p, std::int64_t value, std::int64_t abs_prec) {
    std::vector<std::uint32_t> digits;
    __int128 n = value;
    const __int128 pp = p;
    // Floor-division digit extraction also handles negative integers, whose
    // expansions end in an infinite run of (p-1).
    for (std::int64_t i = 0; i < abs_prec && n != 0; ++i) {
        __int128 d = n % pp;
        if (d < 0) d += pp;
        digits.push_back(static_cast<std::uint32_t>(d));
        n = (n - d) / pp;
    }
    return PadicScalar(checked_base(p), 0, std::move(digits), abs_prec);
}

PadicScalar PadicScalar::from_rational(std::uint32_t p, std::int64_t num, std::int64_t den, std::int64_t abs_prec) {
    if (den == 0) throw PadicError("zero denominator");
    if (num == 0) return zero(p, abs_prec);
    std::int64_t v = 0;
    while (num % static_cast<std::int64_t>(p) == 0) {
        num /= static_cast<std::int64_t>(p);
        ++v;
    }
    while (den % static_cast<std::int64_t>(p) == 0) {
        den /= static_cast<std::int64_t>(p);
        --v;
    }
    const std::int64_t rel = abs_prec - v;
    if (rel <= 0) return zero(p, abs_prec);
    const PadicScalar a = from_integer(p, num, rel);
    const PadicScalar b = from_integer(p, den, rel);
    return a.mul(b.inv()).shifted(v);
}

PadicScalar PadicScalar::from_digits(std::uint32_t p, std::int64_t val, std::vector<std::uint32_t> digits,
                                     std::int64_t abs_prec) {
    checked_base(p);
    for (auto d : digits)
        if (d >= p) throw PadicError("digit out of range");
    return PadicScalar(p, val, std::move(digits), abs_prec);
}

std::uint32_t PadicScalar::digit(std::int64_t position) const {
    if (position >= abs_prec_) throw PadicError("digit beyond known precision");
    if (is_zero() || position < val_) return 0;
    const auto i = static_cast<std::size_t>(position - val_);
    return i < digits_.size() ? digits_[i] : 0;
}

PadicScalar PadicScalar::with_precision(std::int64_t m) const {
    if (m > abs_prec_) throw PadicError("cannot raise precision");
    return PadicScalar(p_, val_, digits_, m);
}

PadicScalar PadicScalar::shifted(std::int64_t k) const {
    PadicScalar r = *this;
    r.abs_prec_ += k;
    if (!r.is_zero()) r.val_ += k;
    return r;
}

PadicScalar PadicScalar::add(const PadicScalar& y, AddMode mode) const {
    require_same_base(y);
    const std::int64_t prec = std::min(abs_prec_, y.abs_prec_);
    if (is_zero()) return y.with_precision(prec);
    if (y.is_zero()) return with_precision(prec);
    const std::int64_t lo = std::min(val_, y.val_);
    if (lo >= prec) return zero(p_, prec);
    const auto len = static_cast<std::size_t>(prec - lo);
    std::vector<std::uint32_t> out(len, 0);
    std::uint64_t carry = 0;
    for (std::size_t i = 0; i < len; ++i) {
        const std::int64_t pos = lo + static_cast<std::int64_t>(i);
        const std::uint64_t s = static_cast<std::uint64_t>(digit(pos)) + y.digit(pos) + carry;
        out[i] = static_cast<std::uint32_t>(s % p_);
        carry = mode == AddMode::carry ? s / p_ : 0;
    }
    return PadicScalar(p_, lo, std::move(out), prec);
}

PadicScalar PadicScalar::negate(AddMode mode) const {
    if (is_zero()) return *this;
    const auto len = static_cast<std::size_t>(abs_prec_ - val_);
    std::vector<std::uint32_t> out(len, 0);
    for (std::size_t i = 0; i < len; ++i) {
        const std::uint32_t d = i < digits_.size() ? digits_[i] : 0;
        if (mode == AddMode::digitwise) {
            out[i] = (p_ - d) % p_;
        } else {
            // Two's-complement analogue: p - d0 at the lowest nonzero digit, p - 1 - d above.
            out[i] = i == 0 ? p_ - d : p_ - 1 - d;
        }
    }
    return PadicScalar(p_, val_, std::move(out), abs_prec_);
}

PadicScalar PadicScalar::sub(const PadicScalar& y, AddMode mode) const { return add(y.negate(mode), mode); }

PadicScalar PadicScalar::mul(const PadicScalar& y) const {
    require_same_base(y);
    if (is_zero() && y.is_zero()) return zero(p_, abs_prec_ + y.abs_prec_);
    if (is_zero()) return zero(p_, abs_prec_ + y.val_);
    if (y.is_zero()) return zero(p_, y.abs_prec_ + val_);
    const std::int64_t rel = std::min(rel_prec(), y.rel_prec());
    const auto len = static_cast<std::size_t>(rel);
    std::vector<std::uint32_t> acc(len, 0);
    const std::uint64_t p = p_;
    for (std::size_t i = 0; i < digits_.size() && i < len; ++i) {
        std::uint64_t carry = 0;
        const std::uint64_t a = digits_[i];
        for (std::size_t j = 0; i + j < len; ++j) {
            const std::uint64_t b = j < y.digits_.size() ? y.digits_[j] : 0;
            if (b == 0 && carry == 0 && j >= y.digits_.size()) break;
            const std::uint64_t t = acc[i + j] + a * b + carry;
            acc[i + j] = static_cast<std::uint32_t>(t % p);
            carry = t / p;
        }
    }
    const std::int64_t val = val_ + y.val_;
    return PadicScalar(p_, val, std::move(acc), val + rel);
}

PadicScalar PadicScalar::inv() const {
    if (is_zero()) throw PadicError("inversion of an element indistinguishable from zero");
    const auto len = static_cast<std::size_t>(rel_prec());
    const std::uint32_t u0_inv = inverse_mod_prime(digits_[0], p_);
    // Solve u * w == 1 mod p^len digit by digit, tracking R = 1 - u * w.
    std::vector<std::uint32_t> remainder(len, 0);
    remainder[0] = 1;
    std::vector<std::uint32_t> w(len, 0);
    for (std::size_t i = 0; i < len; ++i) {
        const auto wi = static_cast<std::uint32_t>((static_cast<std::uint64_t>(remainder[i]) * u0_inv) % p_);
        w[i] = wi;
        if (wi != 0) subtract_in_place(remainder, scale_digits(digits_, wi, len - i, p_), i, p_);
    }
    return PadicScalar(p_, -val_, std::move(w), -val_ + static_cast<std::int64_t>(len));
}

double PadicScalar::fractional_part() const {
    if (is_zero() || val_ >= 0) return 0.0;
    double frac = 0.0;
    double scale = 1.0 / p_;
    // digit at position -1 has weight p^{-1}, position -2 weight p^{-2}, ...
    for (std::int64_t pos = -1; pos >= val_; --pos) {
        frac += digit(pos) * scale;
        scale /= p_;
    }
    return frac;
}

bool PadicScalar::congruent(const PadicScalar& y) const {
    require_same_base(y);
    const std::int64_t m = std::min(abs_prec_, y.abs_prec_);
    return with_precision(m) == y.with_precision(m);
}

std::string PadicScalar::to_string() const {
    std::ostringstream os;
    os << p_ << '^';
    if (is_zero()) {
        os << "inf * ( | " << abs_prec_ << ')';
        return os.str();
    }
    os << val_ << " * (";
    for (std::size_t i = 0; i < digits_.size(); ++i) os << (i ? " " : "") << digits_[i];
    os << " | " << abs_prec_ << ')';
    return os.str();
}

PadicScalar PadicScalar::parse(std::string_view text) {
    const auto fail = [&] { return PadicError("malformed p-adic literal: " + std::string(text)); };
    std::string s(text);
    const auto caret = s.find('^');
    const auto star = s.find('*');
    const auto open = s.find('(');
    const auto bar = s.find('|');
    const auto close = s.find(')');
    if (caret == std::string::npos || star == std::string::npos || open == std::string::npos ||
        bar == std::string::npos || close == std::string::npos || !(caret < star && star < open && open < bar &&
                                                                    bar < close))
        throw fail();
    try {
        const auto p = static_cast<std::uint32_t>(std::stoul(s.substr(0, caret)));
        const std::string vtext = s.substr(caret + 1, star - caret - 1);
        const std::int64_t prec = std::stoll(s.substr(bar + 1, close - bar - 1));
        std::istringstream ds(s.substr(open + 1, bar - open - 1));
        std::vector<std::uint32_t> digits;
        for (std::uint64_t d; ds >> d;) digits.push_back(static_cast<std::uint32_t>(d));
        if (vtext.find("inf") != std::string::npos) {
            if (!digits.empty()) throw fail();
            return zero(p, prec);
        }
        return from_digits(p, std::stoll(vtext), std::move(digits), prec);
    } catch (const std::logic_error&) {
        throw fail();
    }
}

std::string PadicScalar::to_digit_string() const {
    if (p_ > 36) throw PadicError("digit strings need p <= 36");
    if (!in_unit_ball()) throw PadicError("digit strings encode elements of D only");
    static constexpr char kAlphabet[] = "0123456789abcdefghijklmnopqrstuvwxyz";
    std::string out;
    out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(abs_prec_, 0)));
    for (std::int64_t pos = 0; pos < abs_prec_; ++pos) out.push_back(kAlphabet[digit(pos)]);
    return out;
}

PadicScalar PadicScalar::from_digit_string(std::uint32_t p, std::string_view text) {
    std::vector<std::uint32_t> digits;
    digits.reserve(text.size());
    for (char c : text) {
        std::uint32_t d;
        if (c >= '0' && c <= '9') d = static_cast<std::uint32_t>(c - '0');
        else if (c >= 'a' && c <= 'z') d = static_cast<std::uint32_t>(c - 'a' + 10);
        else throw PadicError("bad digit character");
        digits.push_back(d);
    }
    return from_digits(p, 0, std::move(digits), static_cast<std::int64_t>(text.size()));
}

// ---------------------------------------------------------------- PadicVector

PadicVector::PadicVector(std::vector<PadicScalar> coords) : coords_(std::move(coords)) {
    for (const auto& c : coords_) {
        if (c.prime() != coords_.front().prime()) throw PadicError("vector coordinates differ in base");
    }
}

PadicVector PadicVector::zero(std::uint32_t p, std::size_t dim, std::int64_t abs_prec) {
    return PadicVector(std::vector<PadicScalar>(dim, PadicScalar::zero(p, abs_prec)));
}

std::int64_t PadicVector::abs_prec() const {
    std::int64_t m = std::numeric_limits<std::int64_t>::max();
    for (const auto& c : coords_) m = std::min(m, c.abs_prec());
    return m;
}

Norm PadicVector::norm() const {
    Norm n = Norm::zero();
    for (const auto& c : coords_) n = max(n, c.norm());
    return n;
}

bool PadicVector::in_unit_ball() const {
    return std::all_of(coords_.begin(), coords_.end(), [](const PadicScalar& c) { return c.in_unit_ball(); });
}

namespace {
template <typename Op>
PadicVector zip(const PadicVector& a, const PadicVector& b, Op op) {
    if (a.dim() != b.dim()) throw PadicError("vector dimension mismatch");
    std::vector<PadicScalar> out;
    out.reserve(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) out.push_back(op(a[i], b[i]));
    return PadicVector(std::move(out));
}
}  // namespace

PadicVector PadicVector::add(const PadicVector& y, AddMode mode) const {
    return zip(*this, y, [mode](const PadicScalar& a, const PadicScalar& b) { return a.add(b, mode); });
}

PadicVector PadicVector::sub(const PadicVector& y, AddMode mode) const {
    return zip(*this, y, [mode](const PadicScalar& a, const PadicScalar& b) { return a.sub(b, mode); });
}

PadicVector PadicVector::negate(AddMode mode) const {
    std::vector<PadicScalar> out;
    for (const auto& c : coords_) out.push_back(c.negate(mode));
    return PadicVector(std::move(out));
}

PadicVector PadicVector::scale(const PadicScalar& s) const {
    std::vector<PadicScalar> out;
    for (const auto& c : coords_) out.push_back(c.mul(s));
    return PadicVector(std::move(out));
}

PadicVector PadicVector::with_precision(std::int64_t m) const {
    std::vector<PadicScalar> out;
    for (const auto& c : coords_) out.push_back(c.with_precision(m));
    return PadicVector(std::move(out));
}

std::string PadicVector::to_digit_string() const {
    std::string out;
    for (std::size_t i = 0; i < coords_.size(); ++i) {
        if (i) out.push_back(':');
        out += coords_[i].to_digit_string();
    }
    return out;
}

std::int64_t factorial_valuation(std::uint32_t p, std::uint64_t n) {
    std::int64_t v = 0;
    for (std::uint64_t q = n / p; q > 0; q /= p) v += static_cast<std::int64_t>(q);
    return v;
}

}  // namespace ultrabrown::padic
