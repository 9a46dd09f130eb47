#include "ultrabrown/localtime.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ultrabrown/parallel.hpp"

namespace ultrabrown::localtime {

namespace {

std::uint64_t ipow(std::uint64_t base, std::uint64_t exp) {
    std::uint64_t r = 1;
    for (std::uint64_t i = 0; i < exp; ++i) r *= base;
    return r;
}

bool within_all(const padic::ResidueRing& ring, std::span<const std::uint64_t> a, std::uint32_t level) {
    return std::all_of(a.begin(), a.end(), [&](std::uint64_t x) { return ring.within(x, level); });
}

double fixed_point_map(double y, double x, double branching) { return y - (1.0 - x) - x * std::pow(y, branching); }

}  // namespace

double SurvivalParams::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) m += static_cast<double>(i + 1) * q[i];
    return m;
}

SurvivalParams solve_h(std::uint32_t p, std::uint32_t N, std::uint32_t d) {
    if (!padic::is_prime(p)) throw padic::PadicError("p must be prime");
    if (N == 0 || d == 0) throw std::invalid_argument("N and d must be positive");
    SurvivalParams sp;
    sp.p = p;
    sp.N = N;
    sp.d = d;
    const double x = std::pow(static_cast<double>(p), -static_cast<double>(d));
    const double branching = std::pow(static_cast<double>(p), static_cast<double>(N));
    if (N <= d) {
        // Mean offspring p^{N-d} <= 1: extinction is certain and the root is y = 1.
        sp.h = 0.0;
        sp.residual = std::abs(fixed_point_map(1.0, x, branching));
        return sp;
    }
    double y = 0.0;
    for (; sp.iterations < 200; ++sp.iterations) {
        const double g = fixed_point_map(y, x, branching);
        const double dg = 1.0 - x * branching * std::pow(y, branching - 1.0);
        const double step = g / dg;
        y -= step;
        if (std::abs(step) < 1e-16) break;
    }
    sp.h = 1.0 - y;
    sp.residual = std::abs(fixed_point_map(y, x, branching));
    for (const auto& qi : offspring_law_exact(p, N, sp.h)) sp.q.push_back(static_cast<double>(qi));
    return sp;
}

std::vector<Rational> offspring_law_exact(std::uint32_t p, std::uint32_t N, double h) {
    if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("offspring law needs h in (0, 1]");
    const std::uint64_t M = ipow(p, N);
    const Rational hr(h);
    const Rational yr = Rational(1) - hr;
    // Binomial terms by the ratio recurrence C(M,i+1) = C(M,i) (M-i)/(i+1).
    std::vector<Rational> hp(M + 1, Rational(1)), yp(M + 1, Rational(1));
    for (std::uint64_t i = 1; i <= M; ++i) {
        hp[i] = hp[i - 1] * hr;
        yp[i] = yp[i - 1] * yr;
    }
    const Rational norm = Rational(1) - yp[M];
    std::vector<Rational> q(M);
    Rational binom(1);
    for (std::uint64_t i = 1; i <= M; ++i) {
        binom = binom * Rational(M - i + 1) / Rational(i);
        q[i - 1] = binom * hp[i] * yp[M - i] / norm;
    }
    return q;
}

Rational offspring_mean_closed_form(std::uint32_t p, std::uint32_t N, std::uint32_t d) {
    return padic::Norm::of(p, static_cast<std::int64_t>(d) - static_cast<std::int64_t>(N)).to_rational();
}

std::vector<std::uint64_t> gw_simulate(const SurvivalParams& sp, std::uint32_t generations, const rng::RngKey& key) {
    if (sp.q.empty()) throw std::invalid_argument("gw_simulate needs h > 0");
    std::vector<double> cdf(sp.q.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < sp.q.size(); ++i) cdf[i] = acc += sp.q[i];
    std::vector<std::uint64_t> out;
    out.reserve(generations);
    std::uint64_t v = 1;
    for (std::uint32_t g = 0; g < generations; ++g) {
        rng::KeyedStream stream(key.child(g));
        std::uint64_t next = 0;
        for (std::uint64_t i = 0; i < v; ++i) {
            const double u = stream.uniform01() * acc;
            const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
            next += static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), cdf.size() - 1)) + 1;
        }
        v = next;
        out.push_back(v);
    }
    return out;
}

CandidateSet candidates(const BrownianMotion& bm, std::uint32_t n) {
    if (n + 1 > bm.config().depth) throw std::invalid_argument("candidates need n + 1 <= depth");
    const auto grid = bm.grid(n);
    CandidateSet out{n, {}};
    for (std::uint64_t b = 0; b < grid.size(); ++b)
        if (within_all(bm.ring(), grid.value(b), n + 1)) out.balls.push_back(b);
    return out;
}

std::vector<CandidateSet> candidate_descent(const BrownianMotion& bm, std::uint32_t max_level) {
    const auto& cfg = bm.config();
    if (max_level + 1 > cfg.depth) throw std::invalid_argument("candidates need n + 1 <= depth");
    const std::uint32_t d = cfg.state_dim;
    const std::uint64_t fan = cfg.branching();
    const auto& ring = bm.ring();
    struct Level {
        std::vector<std::uint64_t> index, hash, value;
    };
    std::vector<CandidateSet> out;
    Level cur;
    std::vector<std::uint64_t> z(d);
    bm.weight(bm.root_hash(), 0, z);
    if (within_all(ring, z, 1)) {
        cur.index.push_back(0);
        cur.hash.push_back(bm.root_hash());
        cur.value = z;
    }
    out.push_back({0, cur.index});
    for (std::uint32_t k = 1; k <= max_level; ++k) {
        Level next;
        std::vector<std::uint64_t> a(d);
        for (std::size_t b = 0; b < cur.index.size(); ++b) {
            for (std::uint64_t c = 0; c < fan; ++c) {
                const std::uint64_t h = BrownianMotion::child_hash(cur.hash[b], c);
                bm.weight(h, k, z);
                for (std::uint32_t i = 0; i < d; ++i) a[i] = ring.add(cur.value[b * d + i], z[i], cfg.mode);
                if (!within_all(ring, a, k + 1)) continue;
                next.index.push_back(cur.index[b] * fan + c);
                next.hash.push_back(h);
                next.value.insert(next.value.end(), a.begin(), a.end());
            }
        }
        cur = std::move(next);
        out.push_back({k, cur.index});
    }
    return out;
}

DilationMeasure dilation_from_descent(const BrownianConfig& cfg, const std::vector<CandidateSet>& descent,
                                      std::uint32_t n, std::uint32_t m) {
    if (m < n) throw std::invalid_argument("dilation needs m >= n");
    if (m >= descent.size()) throw std::invalid_argument("descent does not reach level m");
    const std::uint64_t span = cfg.ball_count(m - n);
    DilationMeasure out;
    out.n = n;
    out.m = m;
    out.mass_per_ball = std::pow(static_cast<double>(cfg.p),
                                 (static_cast<double>(cfg.state_dim) - static_cast<double>(cfg.index_dim)) * n);
    for (auto b : descent[m].balls) {
        const std::uint64_t anc = b / span;
        if (out.balls.empty() || out.balls.back() != anc) out.balls.push_back(anc);
    }
    return out;
}

DilationMeasure dilation_estimate(const BrownianMotion& bm, std::uint32_t n, std::uint32_t m) {
    if (m < n) throw std::invalid_argument("dilation needs m >= n");
    return dilation_from_descent(bm.config(), candidate_descent(bm, m), n, m);
}

double LocalTimeField::cell_volume() const {
    return std::pow(static_cast<double>(p), -static_cast<double>(d) * r);
}

double LocalTimeField::total() const {
    double s = 0.0;
    for (double f : field) s += f;
    return s * cell_volume();
}

LocalTimeField local_time_field(const BrownianMotion& bm, std::uint32_t n, std::uint32_t r) {
    const auto& cfg = bm.config();
    if (r > n) throw std::invalid_argument("local_time_field needs r <= n");
    const auto grid = bm.grid(n);
    const auto& ring = bm.ring();
    LocalTimeField out{cfg.p, cfg.state_dim, n, r, {}};
    const std::uint64_t q = ring.power(r);
    out.field.assign(ipow(q, cfg.state_dim), 0.0);
    const double weight = std::pow(static_cast<double>(cfg.p), static_cast<double>(cfg.state_dim) * r) /
                          static_cast<double>(grid.size());
    for (std::uint64_t b = 0; b < grid.size(); ++b) {
        const auto a = grid.value(b);
        std::uint64_t cell = 0;
        for (std::size_t i = a.size(); i-- > 0;) cell = cell * q + ring.truncate(a[i], r);
        out.field[cell] += weight;
    }
    return out;
}

std::vector<std::uint64_t> surviving_offspring_histogram(const BrownianConfig& cfg, std::uint32_t n, std::uint32_t m,
                                                         std::uint64_t reps) {
    if (m < n + 1) throw std::invalid_argument("need m > n");
    const std::uint64_t fan = cfg.branching();
    const std::uint64_t span = cfg.ball_count(m - n - 1);
    auto rows = parallel_map<std::vector<std::uint64_t>>(reps, [&](std::size_t rep) {
        const BrownianMotion bm(cfg.replica(rep));
        const auto descent = candidate_descent(bm, m);
        std::vector<std::uint64_t> hist(fan, 0);
        std::uint64_t parent = 0, children = 0, last_child = 0;
        bool open = false;
        for (auto b : descent[m].balls) {
            const std::uint64_t child = b / span;
            if (open && child == last_child) continue;
            if (open && child / fan == parent) {
                ++children;
            } else {
                if (open) ++hist[children - 1];
                parent = child / fan;
                children = 1;
                open = true;
            }
            last_child = child;
        }
        if (open) ++hist[children - 1];
        return hist;
    });
    std::vector<std::uint64_t> total(fan, 0);
    for (const auto& h : rows)
        for (std::uint64_t i = 0; i < fan; ++i) total[i] += h[i];
    return total;
}

double fmeasure_cover_sum(const BrownianMotion& bm, std::uint32_t m) {
    if (m < 2) throw std::invalid_argument("f-measure sum needs m >= 2");
    const auto& cfg = bm.config();
    const auto descent = candidate_descent(bm, m);
    const double lp = std::log(static_cast<double>(cfg.p));
    const double f = std::pow(static_cast<double>(cfg.p),
                              -static_cast<double>(m) * (static_cast<double>(cfg.index_dim) - cfg.state_dim)) *
                     std::pow(std::log(m * lp), static_cast<double>(cfg.state_dim) / cfg.index_dim);
    return f * static_cast<double>(descent[m].balls.size());
}

}  // namespace ultrabrown::localtime
