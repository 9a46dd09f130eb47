#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace ultrabrown::rng {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t combine(std::uint64_t h, std::uint64_t x) {
    return mix64(h ^ (mix64(x) + 0x632be59bd9b4e019ULL + (h << 6) + (h >> 2)));
}

/// Seed plus a hierarchical address. Every random quantity in the library is
/// drawn from a stream keyed this way, so any draw can be reproduced without
/// replaying earlier ones.
struct RngKey {
    std::uint64_t seed = 0;
    std::uint64_t address = 0;

    RngKey child(std::uint64_t tag) const { return {seed, combine(address, tag)}; }
    RngKey child(std::initializer_list<std::uint64_t> tags) const {
        RngKey k = *this;
        for (auto t : tags) k = k.child(t);
        return k;
    }

    friend bool operator==(const RngKey&, const RngKey&) = default;
};

/// Counter-based stream: word i is a pure function of (key, i).
class KeyedStream {
public:
    explicit KeyedStream(RngKey key) : base_(combine(mix64(key.seed), key.address)) {}

    std::uint64_t next() { return mix64(base_ + 0xd1b54a32d192ed03ULL * ++counter_); }

    /// Uniform on [0, bound), bound >= 1, without modulo bias.
    std::uint64_t uniform_below(std::uint64_t bound);
    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    /// count i.i.d. uniform digits in [0, p).
    std::vector<std::uint32_t> digits(std::uint32_t p, std::size_t count);

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t base_;
    std::uint64_t counter_ = 0;
};

}  // namespace ultrabrown::rng
