#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace ultrabrown {

/// Worker count: ULTRABROWN_WORKERS if set (>= 1), else hardware concurrency.
std::size_t worker_count();

/// Calls body(i) for every i in [0, n), split into contiguous chunks across
/// worker_count() threads. body must only write to per-index state.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// out[i] = fn(i) for i in [0, n), computed in parallel, returned in index order.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn) {
    std::vector<T> out(n);
    parallel_for(n, [&](std::size_t i) { out[i] = fn(i); });
    return out;
}

}  // namespace ultrabrown
