#include "ultrabrown/rng.hpp"

#include <algorithm>

namespace ultrabrown::rng {

std::uint64_t KeyedStream::uniform_below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    // Lemire's multiply-and-reject.
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(next()) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

std::vector<std::uint32_t> KeyedStream::digits(std::uint32_t p, std::size_t count) {
    std::vector<std::uint32_t> out;
    out.reserve(count);
    // Pack as many digits as fit in one uniform draw.
    std::uint64_t chunk_bound = 1;
    std::size_t chunk = 0;
    while (chunk_bound <= (std::uint64_t{1} << 62) / p) {
        chunk_bound *= p;
        ++chunk;
    }
    while (out.size() < count) {
        const std::size_t take = std::min(chunk, count - out.size());
        std::uint64_t bound = 1;
        for (std::size_t i = 0; i < take; ++i) bound *= p;
        std::uint64_t r = uniform_below(bound);
        for (std::size_t i = 0; i < take; ++i) {
            out.push_back(static_cast<std::uint32_t>(r % p));
            r /= p;
        }
    }
    return out;
}

}  // namespace ultrabrown::rng
