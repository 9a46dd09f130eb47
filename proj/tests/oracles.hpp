#pragma once

// Reference computations used by the tests. Everything here is written
// against integers and exact rationals, without the library's p-adic types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ultrabrown/padic.hpp"

namespace oracle {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max();

inline std::int64_t valuation(BigInt n, std::uint32_t p) {
    if (n == 0) return kInf;
    if (n < 0) n = -n;
    std::int64_t v = 0;
    while (n % p == 0) {
        n /= p;
        ++v;
    }
    return v;
}

inline std::int64_t valuation(const Rational& x, std::uint32_t p) {
    if (x == 0) return kInf;
    return valuation(boost::multiprecision::numerator(x), p) - valuation(boost::multiprecision::denominator(x), p);
}

inline Rational pow_p(std::uint32_t p, std::int64_t e) {
    Rational r(1);
    for (std::int64_t i = 0; i < std::abs(e); ++i) r *= p;
    return e >= 0 ? r : Rational(1) / r;
}

/// |x|_p as an exact rational.
inline Rational norm(const Rational& x, std::uint32_t p) {
    const auto v = valuation(x, p);
    return v == kInf ? Rational(0) : pow_p(p, -v);
}

inline Rational vmax(std::initializer_list<Rational> xs) { return std::max(xs); }

inline std::int64_t ipow(std::int64_t b, std::int64_t e) {
    std::int64_t r = 1;
    while (e-- > 0) r *= b;
    return r;
}

inline std::int64_t int_valuation(std::int64_t n, std::uint32_t p) {
    if (n == 0) return kInf;
    std::int64_t v = 0;
    for (; n % p == 0; n /= p) ++v;
    return v;
}

/// Random rational with small numerator and denominator; zero with probability about 1/8.
struct RationalSource {
    std::mt19937_64 gen;
    explicit RationalSource(std::uint64_t seed) : gen(seed) {}

    std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(gen);
    }
    Rational scalar() {
        if (uniform(0, 7) == 0) return Rational(0);
        // Powers of p in numerator and denominator make valuations spread out.
        const std::int64_t num = uniform(-200, 200);
        const std::int64_t den = uniform(1, 200);
        return Rational(num, den) * Rational(ipow(2, uniform(0, 6))) / Rational(ipow(3, uniform(0, 3)));
    }
    /// Nonnegative weights a >= b >= ... >= 0, occasionally zero or tied.
    std::vector<Rational> decreasing_weights(std::size_t count) {
        std::vector<Rational> w(count);
        for (auto& x : w) x = uniform(0, 5) == 0 ? Rational(0) : Rational(uniform(1, 50), uniform(1, 20));
        std::sort(w.begin(), w.end(), std::greater<>());
        if (count > 1 && uniform(0, 4) == 0) w[1] = w[0];
        return w;
    }
    std::uint32_t prime() {
        static constexpr std::uint32_t primes[] = {2, 3, 5, 7};
        return primes[uniform(0, 3)];
    }
};

/// Index of the grid point t in {0..p^m-1} (N = 1) under the interleaved
/// digit order: compare digit 0 first, then digit 1, and so on.
inline std::vector<std::int64_t> ordered_grid_1d(std::uint32_t p, std::uint32_t m) {
    std::vector<std::int64_t> pts(static_cast<std::size_t>(ipow(p, m)));
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = static_cast<std::int64_t>(i);
    auto key = [&](std::int64_t t) {
        // digit-reversed integer
        std::int64_t r = 0;
        for (std::uint32_t k = 0; k < m; ++k, t /= p) r = r * p + t % p;
        return r;
    };
    std::sort(pts.begin(), pts.end(), [&](auto a, auto b) { return key(a) < key(b); });
    return pts;
}

/// p^{-d(m+1)p^{m}} prod_{i>=2} (p^{-1}|t_i - t_{i-1}|)^{-d} for N = 1 and the zero function.
inline Rational hitting_formula_1d(std::uint32_t p, std::uint32_t d, std::uint32_t m) {
    const auto pts = ordered_grid_1d(p, m);
    Rational r = pow_p(p, -static_cast<std::int64_t>(d) * (m + 1) * static_cast<std::int64_t>(pts.size()));
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const auto v = int_valuation(pts[i] - pts[i - 1], p);
        r *= pow_p(p, static_cast<std::int64_t>(d) * (1 + v));
    }
    return r;
}

/// The survival root y = 1 - h of y = (1 - x) + x y^{p^N}, x = p^{-d}, by bisection on [0, 1).
inline double survival_h(std::uint32_t p, std::uint32_t N, std::uint32_t d) {
    const double x = std::pow(p, -static_cast<double>(d));
    const double B = std::pow(p, static_cast<double>(N));
    auto g = [&](double y) { return (1 - x) + x * std::pow(y, B) - y; };
    if (B * x <= 1.0) return 0.0;
    // g(0) > 0 and g is negative just below 1 when the mean B x exceeds 1.
    double lo = 0.0, hi = 1.0 - 1e-9;
    while (g(hi) > 0) hi = 1.0 - (1.0 - hi) / 2;
    for (int i = 0; i < 200; ++i) {
        const double mid = (lo + hi) / 2;
        (g(mid) > 0 ? lo : hi) = mid;
    }
    return 1.0 - (lo + hi) / 2;
}

/// The paper's kernel u(p^{-k}) as a double.
inline double kernel_u(std::uint32_t p, std::uint32_t N, std::uint32_t d, std::int64_t k) {
    const double q = p;
    const double c = (1 - std::pow(q, -double(N))) / std::pow(q, d);
    if (N == d) return c * k;
    return c / (std::pow(q, double(d) - N) - 1) * (std::pow(q, (double(d) - N) * k) - 1);
}

/// (phi_n * v)(0) = p^{dn} int_{|y| <= p^{-n}} u(|y|) dy by summing shells.
inline double truncated_origin_by_shells(std::uint32_t p, std::uint32_t N, std::uint32_t d, std::uint32_t n) {
    const double q = p;
    double s = 0.0;
    for (std::int64_t k = n; k < n + 400; ++k)
        s += std::pow(q, -double(d) * k) * (1 - std::pow(q, -double(d))) * kernel_u(p, N, d, k);
    return std::pow(q, double(d) * n) * s;
}

/// E[kappa_n(D^N)^2] for mu = delta_0 by counting pairs of level-n balls:
/// A_C is uniform mod p^{n+1}, and A_C - A_C' is uniform on p^{j+1} D^d when the balls are at distance p^{-j}.
inline Rational second_moment_delta0(std::uint32_t p, std::uint32_t N, std::uint32_t d, std::uint32_t n) {
    const std::int64_t balls = ipow(p, std::int64_t(N) * n);
    const Rational both_zero_same = pow_p(p, -std::int64_t(d) * n);
    Rational sum = Rational(balls) * both_zero_same;
    for (std::int64_t j = 0; j < static_cast<std::int64_t>(n); ++j) {
        const std::int64_t partners = ipow(p, std::int64_t(N) * (n - j - 1)) * (ipow(p, N) - 1);
        sum += Rational(balls) * Rational(partners) * pow_p(p, -std::int64_t(d) * n) *
               pow_p(p, -std::int64_t(d) * (n - j - 1));
    }
    return sum * pow_p(p, 2 * (std::int64_t(d) - std::int64_t(N)) * n);
}

/// Minimum of m^T K m over {(w, 1-w) : w = k / steps} for a symmetric 2 x 2 matrix.
inline std::pair<double, double> simplex_grid_min_2(double k11, double k12, double k22, int steps) {
    double best = std::numeric_limits<double>::infinity(), arg = 0;
    for (int i = 0; i <= steps; ++i) {
        const double w = double(i) / steps;
        const double e = w * w * k11 + 2 * w * (1 - w) * k12 + (1 - w) * (1 - w) * k22;
        if (e < best) best = e, arg = w;
    }
    return {arg, best};
}

/// |mean - target| <= sigmas * se, or exact agreement when se = 0.
inline bool within_sigmas(double mean, double se, double target, double sigmas = 3.0) {
    return se == 0.0 ? std::abs(mean - target) < 1e-12 : std::abs(mean - target) <= sigmas * se;
}

}  // namespace oracle
