#include "ultrabrown/tree.hpp"

#include <algorithm>

namespace ultrabrown::padic {

BallAddress::BallAddress(std::uint32_t p, std::uint32_t dim, std::uint32_t level, std::vector<std::uint32_t> path)
    : p_(p), dim_(dim), level_(level), path_(std::move(path)) {
    if (!is_prime(p)) throw PadicError("base must be prime");
    if (dim == 0) throw PadicError("ball dimension must be positive");
    if (path_.size() != static_cast<std::size_t>(dim) * level) throw PadicError("ball path has wrong size");
    for (auto d : path_)
        if (d >= p) throw PadicError("ball path digit out of range");
}

BallAddress BallAddress::from_index(std::uint32_t p, std::uint32_t dim, std::uint32_t level, std::uint64_t index) {
    std::vector<std::uint32_t> path(static_cast<std::size_t>(dim) * level);
    // Last digit of the interleaved stream is the least significant.
    for (std::uint32_t j = level; j-- > 0;) {
        for (std::uint32_t i = dim; i-- > 0;) {
            path[i * level + j] = static_cast<std::uint32_t>(index % p);
            index /= p;
        }
    }
    if (index != 0) throw PadicError("ball index out of range");
    return BallAddress(p, dim, level, std::move(path));
}

BallAddress BallAddress::parent() const {
    if (level_ == 0) throw PadicError("root has no parent");
    std::vector<std::uint32_t> path(static_cast<std::size_t>(dim_) * (level_ - 1));
    for (std::uint32_t i = 0; i < dim_; ++i)
        for (std::uint32_t j = 0; j + 1 < level_; ++j) path[i * (level_ - 1) + j] = digit(i, j);
    return BallAddress(p_, dim_, level_ - 1, std::move(path));
}

std::vector<BallAddress> BallAddress::children() const {
    std::uint64_t count = 1;
    for (std::uint32_t i = 0; i < dim_; ++i) count *= p_;
    std::vector<BallAddress> out;
    out.reserve(count);
    const std::uint32_t next = level_ + 1;
    for (std::uint64_t c = 0; c < count; ++c) {
        std::vector<std::uint32_t> path(static_cast<std::size_t>(dim_) * next);
        std::uint64_t rest = c;
        for (std::uint32_t i = dim_; i-- > 0;) {
            for (std::uint32_t j = 0; j < level_; ++j) path[i * next + j] = digit(i, j);
            path[i * next + level_] = static_cast<std::uint32_t>(rest % p_);
            rest /= p_;
        }
        out.emplace_back(p_, dim_, next, std::move(path));
    }
    return out;
}

bool BallAddress::contains(const PadicVector& t) const {
    if (t.dim() != dim_ || t.prime() != p_) return false;
    if (!t.in_unit_ball() || t.abs_prec() < level_) return false;
    for (std::uint32_t i = 0; i < dim_; ++i)
        for (std::uint32_t j = 0; j < level_; ++j)
            if (t[i].digit(j) != digit(i, j)) return false;
    return true;
}

bool BallAddress::contains(const BallAddress& other) const {
    if (other.p_ != p_ || other.dim_ != dim_ || other.level_ < level_) return false;
    for (std::uint32_t i = 0; i < dim_; ++i)
        for (std::uint32_t j = 0; j < level_; ++j)
            if (other.digit(i, j) != digit(i, j)) return false;
    return true;
}

PadicVector BallAddress::center(std::int64_t abs_prec) const {
    if (abs_prec < level_) throw PadicError("center needs precision at least the ball level");
    std::vector<PadicScalar> coords;
    for (std::uint32_t i = 0; i < dim_; ++i) {
        std::vector<std::uint32_t> digits(path_.begin() + i * level_, path_.begin() + (i + 1) * level_);
        coords.push_back(PadicScalar::from_digits(p_, 0, std::move(digits), abs_prec));
    }
    return PadicVector(std::move(coords));
}

std::vector<std::uint64_t> BallAddress::residues() const {
    std::vector<std::uint64_t> out(dim_, 0);
    for (std::uint32_t i = 0; i < dim_; ++i) {
        std::uint64_t r = 0;
        for (std::uint32_t j = level_; j-- > 0;) r = r * p_ + digit(i, j);
        out[i] = r;
    }
    return out;
}

std::uint64_t BallAddress::index() const {
    std::uint64_t idx = 0;
    for (std::uint32_t j = 0; j < level_; ++j)
        for (std::uint32_t i = 0; i < dim_; ++i) idx = idx * p_ + digit(i, j);
    return idx;
}

std::string BallAddress::to_string() const {
    static constexpr char kAlphabet[] = "0123456789abcdefghijklmnopqrstuvwxyz";
    std::string out = std::to_string(level_);
    for (std::uint32_t i = 0; i < dim_; ++i) {
        out.push_back(':');
        for (std::uint32_t j = 0; j < level_; ++j) {
            const auto d = digit(i, j);
            if (p_ <= 36) {
                out.push_back(kAlphabet[d]);
            } else {
                if (j) out.push_back('.');
                out += std::to_string(d);
            }
        }
    }
    return out;
}

BallAddress ball_of(const PadicVector& t, std::uint32_t level) {
    if (t.dim() == 0) throw PadicError("empty point");
    if (!t.in_unit_ball()) throw PadicError("point lies outside D^N");
    if (t.abs_prec() < level) throw PadicError("insufficient precision for requested ball level");
    const auto dim = static_cast<std::uint32_t>(t.dim());
    std::vector<std::uint32_t> path(static_cast<std::size_t>(dim) * level);
    for (std::uint32_t i = 0; i < dim; ++i)
        for (std::uint32_t j = 0; j < level; ++j) path[i * level + j] = t[i].digit(j);
    return BallAddress(t.prime(), dim, level, std::move(path));
}

std::vector<BallAddress> children(const BallAddress& a) { return a.children(); }

BallAddress translate(const BallAddress& a, const PadicVector& s, AddMode mode) {
    if (s.dim() != a.dim() || s.prime() != a.prime()) throw PadicError("translation vector does not match ball");
    if (!s.in_unit_ball()) throw PadicError("translation must lie in D^N");
    const std::int64_t k = a.level();
    if (s.abs_prec() < k) throw PadicError("insufficient precision for translation");
    return ball_of(a.center(k).add(s.with_precision(k), mode), a.level());
}

std::strong_ordering order_compare(const PadicVector& s, const PadicVector& t) {
    if (s.dim() != t.dim()) throw PadicError("order_compare dimension mismatch");
    if (!s.in_unit_ball() || !t.in_unit_ball()) throw PadicError("order_compare needs points of D^N");
    const std::int64_t m = std::min(s.abs_prec(), t.abs_prec());
    for (std::int64_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < s.dim(); ++i) {
            const auto c = s[i].digit(j) <=> t[i].digit(j);
            if (c != 0) return c;
        }
    }
    return std::strong_ordering::equal;
}

std::strong_ordering order_compare(const BallAddress& a, const BallAddress& b) {
    if (a.dim() != b.dim()) throw PadicError("order_compare dimension mismatch");
    const std::uint32_t m = std::min(a.level(), b.level());
    for (std::uint32_t j = 0; j < m; ++j) {
        for (std::uint32_t i = 0; i < a.dim(); ++i) {
            const auto c = a.digit(i, j) <=> b.digit(i, j);
            if (c != 0) return c;
        }
    }
    return std::strong_ordering::equal;
}

}  // namespace ultrabrown::padic
