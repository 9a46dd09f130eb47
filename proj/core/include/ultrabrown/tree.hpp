#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "ultrabrown/padic.hpp"

namespace ultrabrown::padic {

/// A coset of p^k D^N: node of the rooted p^N-ary ball tree.
///
/// path holds digit j (0 <= j < level) of coordinate i at path[i * level + j].
/// The ball has diameter p^{-level} and p^N children.
class BallAddress {
public:
    BallAddress() = default;
    BallAddress(std::uint32_t p, std::uint32_t dim, std::uint32_t level, std::vector<std::uint32_t> path);

    static BallAddress root(std::uint32_t p, std::uint32_t dim) { return BallAddress(p, dim, 0, {}); }
    /// Ball whose position among the level-k balls, in the total order, is index.
    static BallAddress from_index(std::uint32_t p, std::uint32_t dim, std::uint32_t level, std::uint64_t index);

    std::uint32_t prime() const { return p_; }
    std::uint32_t dim() const { return dim_; }
    std::uint32_t level() const { return level_; }
    std::uint32_t digit(std::uint32_t coord, std::uint32_t position) const { return path_[coord * level_ + position]; }
    const std::vector<std::uint32_t>& path() const { return path_; }

    Norm diameter() const { return Norm::of(p_, level_); }
    BallAddress parent() const;
    /// The p^N sub-balls at level+1, in increasing order.
    std::vector<BallAddress> children() const;
    bool contains(const PadicVector& t) const;
    bool contains(const BallAddress& other) const;
    /// The representative with all digits beyond the path equal to zero.
    PadicVector center(std::int64_t abs_prec) const;
    /// Coordinate residues mod p^level.
    std::vector<std::uint64_t> residues() const;
    /// Position among the p^{N level} balls of this level (requires it to fit in 64 bits).
    std::uint64_t index() const;

    /// "level:digits_0:digits_1:..." with path digits least significant first.
    std::string to_string() const;

    friend bool operator==(const BallAddress&, const BallAddress&) = default;

private:
    std::uint32_t p_ = 2;
    std::uint32_t dim_ = 1;
    std::uint32_t level_ = 0;
    std::vector<std::uint32_t> path_;
};

/// The level-k ball containing t. Requires t in D^N known to at least k digits.
BallAddress ball_of(const PadicVector& t, std::uint32_t level);
std::vector<BallAddress> children(const BallAddress& a);
/// Address of s + a under the given addition law.
BallAddress translate(const BallAddress& a, const PadicVector& s, AddMode mode = AddMode::carry);

/// Total order on D^N: lexicographic on the interleaved digit stream
/// (digit 0 of every coordinate, then digit 1, ...). Disjoint balls of one
/// level order all of their points the same way.
std::strong_ordering order_compare(const PadicVector& s, const PadicVector& t);
std::strong_ordering order_compare(const BallAddress& a, const BallAddress& b);

}  // namespace ultrabrown::padic
