#include "ultrabrown/brownian.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

#include "ultrabrown/gaussian.hpp"
#include "ultrabrown/parallel.hpp"

namespace ultrabrown::brownian {

namespace {

constexpr std::uint64_t kWeightTag = 0x6b62'7765'6967'6874ULL;

std::uint64_t ipow(std::uint64_t base, std::uint64_t exp) {
    std::uint64_t r = 1;
    for (std::uint64_t i = 0; i < exp; ++i) r *= base;
    return r;
}

// Distance exponent j with |s - t| = p^{-j} for distinct level-m balls a < b given by index.
std::uint32_t split_level(std::uint64_t a, std::uint64_t b, std::uint64_t branching, std::uint32_t m) {
    std::uint32_t common = m;
    while (a != b) {
        a /= branching;
        b /= branching;
        --common;
    }
    return common;
}

std::uint64_t residue_cell(const ResidueRing& ring, std::span<const std::uint64_t> x, std::uint32_t r) {
    std::uint64_t cell = 0;
    for (std::size_t i = x.size(); i-- > 0;) cell = cell * ring.power(r) + ring.truncate(x[i], r);
    return cell;
}

std::uint32_t min_valuation(const ResidueRing& ring, std::span<const std::uint64_t> x) {
    std::uint32_t v = ring.precision();
    for (auto c : x) v = std::min(v, ring.valuation(c));
    return v;
}

void check_quotient_level(const BrownianConfig& cfg, std::uint32_t r) {
    if (r == 0 || r > cfg.precision()) throw std::invalid_argument("quotient level must lie in [1, depth+1]");
}

struct GridTables {
    std::vector<std::uint64_t> values;
    std::vector<std::uint64_t> hashes;
};

GridTables build_grid(const BrownianMotion& bm, std::uint32_t level) {
    const auto& cfg = bm.config();
    if (level > cfg.depth) throw std::invalid_argument("grid level exceeds depth");
    const std::uint32_t d = cfg.state_dim;
    const std::uint64_t fan = cfg.branching();
    GridTables g;
    g.values.assign(d, 0);
    g.hashes.assign(1, bm.root_hash());
    bm.weight(g.hashes[0], 0, g.values);
    std::vector<std::uint64_t> z(d);
    for (std::uint32_t k = 1; k <= level; ++k) {
        GridTables next;
        next.values.resize(g.hashes.size() * fan * d);
        next.hashes.resize(g.hashes.size() * fan);
        for (std::uint64_t parent = 0; parent < g.hashes.size(); ++parent) {
            for (std::uint64_t c = 0; c < fan; ++c) {
                const std::uint64_t child = parent * fan + c;
                next.hashes[child] = BrownianMotion::child_hash(g.hashes[parent], c);
                bm.weight(next.hashes[child], k, z);
                for (std::uint32_t i = 0; i < d; ++i)
                    next.values[child * d + i] = bm.ring().add(g.values[parent * d + i], z[i], cfg.mode);
            }
        }
        g = std::move(next);
    }
    return g;
}

// X at each point of a fixed list, for one path.
std::vector<std::uint64_t> eval_points(const BrownianMotion& bm, const std::vector<std::vector<std::uint64_t>>& pts) {
    const std::uint32_t d = bm.config().state_dim;
    std::vector<std::uint64_t> out(pts.size() * d);
    for (std::size_t k = 0; k < pts.size(); ++k) bm.eval_residues(pts[k], std::span(out).subspan(k * d, d));
    return out;
}

std::vector<std::vector<std::uint64_t>> residues_of(const BrownianConfig& cfg, std::span<const PadicVector> points) {
    const ResidueRing ring(cfg.p, cfg.precision());
    std::vector<std::vector<std::uint64_t>> out;
    out.reserve(points.size());
    for (const auto& t : points) {
        if (t.dim() != cfg.index_dim) throw std::invalid_argument("point has wrong dimension");
        out.push_back(point_residues(ring, t));
    }
    return out;
}

// Contingency test of every increment against the tuple of the earlier ones.
harness::TestReport increment_statistic(const BrownianConfig& cfg, std::span<const PadicVector> points,
                                        std::uint32_t r, std::uint64_t reps, double alpha, std::string name) {
    if (points.empty()) throw std::invalid_argument("no points");
    check_quotient_level(cfg, r);
    if (points.size() == 1) {
        // A single value has no increments to test.
        harness::TestReport trivial;
        trivial.name = std::move(name);
        trivial.alpha = alpha;
        trivial.seed = cfg.seed;
        trivial.decide();
        return trivial;
    }
    const auto pts = residues_of(cfg, points);
    const std::uint32_t d = cfg.state_dim;
    const std::size_t k = pts.size();
    const ResidueRing ring(cfg.p, cfg.precision());
    const std::uint64_t cells = gaussian::quotient_cell_count(cfg.p, d, r);
    // cells of increment i per replica
    auto per_rep = parallel_map<std::vector<std::uint64_t>>(reps, [&](std::size_t rep) {
        const BrownianMotion bm(cfg.replica(rep));
        const auto x = eval_points(bm, pts);
        std::vector<std::uint64_t> inc(d), out(k);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::uint32_t c = 0; c < d; ++c)
                inc[c] = i == 0 ? x[c] : ring.sub(x[i * d + c], x[(i - 1) * d + c], cfg.mode);
            out[i] = residue_cell(ring, inc, r);
        }
        return out;
    });
    harness::TestReport worst;
    worst.p_value = 2.0;
    for (std::size_t i = 1; i < k; ++i) {
        std::uint64_t past_count = 1;
        for (std::size_t j = 0; j < i; ++j) past_count *= cells;
        std::vector<std::uint64_t> u(reps), v(reps);
        for (std::uint64_t rep = 0; rep < reps; ++rep) {
            std::uint64_t past = 0;
            for (std::size_t j = i; j-- > 0;) past = past * cells + per_rep[rep][j];
            u[rep] = past;
            v[rep] = per_rep[rep][i];
        }
        auto rep = gaussian::independence_test_cells(u, v, past_count, cells, alpha, name);
        if (rep.p_value < worst.p_value) worst = rep;
    }
    worst.p_value = std::min(1.0, worst.p_value * static_cast<double>(k - 1));
    worst.alpha = alpha;
    worst.seed = cfg.seed;
    worst.decide();
    return worst;
}

}  // namespace

std::uint64_t BrownianConfig::branching() const { return ipow(p, index_dim); }

std::uint64_t BrownianConfig::ball_count(std::uint32_t level) const {
    return ipow(p, static_cast<std::uint64_t>(index_dim) * level);
}

BrownianConfig BrownianConfig::replica(std::uint64_t index) const {
    BrownianConfig c = *this;
    c.seed = rng::combine(seed, index);
    return c;
}

void BrownianConfig::validate() const {
    if (!padic::is_prime(p)) throw padic::PadicError("p must be prime");
    if (index_dim == 0 || state_dim == 0) throw std::invalid_argument("N and d must be positive");
    if (precision() > ResidueRing::max_precision(p))
        throw std::invalid_argument("depth too large for word-sized residues");
    if (ipow(p, index_dim) == 0 || index_dim > 62) throw std::invalid_argument("index dimension too large");
}

GridRestriction::GridRestriction(const BrownianConfig& cfg, std::uint32_t level, std::vector<std::uint64_t> values)
    : p_(cfg.p),
      index_dim_(cfg.index_dim),
      dim_(cfg.state_dim),
      level_(level),
      count_(cfg.ball_count(level)),
      ring_(cfg.p, cfg.precision()),
      values_(std::move(values)) {
    if (values_.size() != count_ * dim_) throw std::invalid_argument("grid table has wrong size");
}

BallAddress GridRestriction::address(std::uint64_t index) const {
    return BallAddress::from_index(p_, index_dim_, level_, index);
}

PadicVector GridRestriction::value_vector(std::uint64_t index) const { return residues_to_vector(ring_, value(index)); }

BrownianMotion::BrownianMotion(BrownianConfig cfg)
    : cfg_(cfg), ring_((cfg.validate(), cfg.p), cfg.precision()), root_hash_(rng::combine(kWeightTag, cfg.seed)) {}

void BrownianMotion::weight(std::uint64_t address_hash, std::uint32_t level, std::span<std::uint64_t> out) const {
    rng::KeyedStream stream(rng::RngKey{cfg_.seed, address_hash});
    for (auto& z : out) z = gaussian::sample_residue(ring_, level, stream);
}

std::uint64_t BrownianMotion::address_hash(const BallAddress& ball) const {
    if (ball.prime() != cfg_.p || ball.dim() != cfg_.index_dim) throw std::invalid_argument("ball of another tree");
    std::uint64_t h = root_hash_;
    for (std::uint32_t j = 0; j < ball.level(); ++j) {
        std::uint64_t code = 0;
        for (std::uint32_t i = 0; i < cfg_.index_dim; ++i) code = code * cfg_.p + ball.digit(i, j);
        h = child_hash(h, code);
    }
    return h;
}

PadicVector BrownianMotion::weight(const BallAddress& ball) const {
    std::vector<std::uint64_t> z(cfg_.state_dim);
    weight(address_hash(ball), ball.level(), z);
    return residues_to_vector(ring_, z);
}

std::uint64_t BrownianMotion::child_code(std::span<const std::uint64_t> t, std::uint32_t position) const {
    std::uint64_t code = 0;
    for (std::uint32_t i = 0; i < cfg_.index_dim; ++i) code = code * cfg_.p + ring_.digit(t[i], position);
    return code;
}

void BrownianMotion::eval_residues(std::span<const std::uint64_t> t, std::span<std::uint64_t> out) const {
    std::fill(out.begin(), out.end(), 0);
    std::vector<std::uint64_t> z(cfg_.state_dim);
    std::uint64_t h = root_hash_;
    for (std::uint32_t k = 0; k <= cfg_.depth; ++k) {
        weight(h, k, z);
        for (std::uint32_t i = 0; i < cfg_.state_dim; ++i) out[i] = ring_.add(out[i], z[i], cfg_.mode);
        if (k < cfg_.depth) h = child_hash(h, child_code(t, k));
    }
}

void BrownianMotion::eval_w_residues(std::span<const std::uint64_t> t, std::span<std::uint64_t> out) const {
    std::fill(out.begin(), out.end(), 0);
    // C_k(t) contains 0 exactly for k <= v(t).
    const std::uint32_t v = min_valuation(ring_, t);
    std::vector<std::uint64_t> z(cfg_.state_dim);
    std::uint64_t h = root_hash_;
    for (std::uint32_t k = 0; k <= cfg_.depth; ++k) {
        if (k > v) {
            weight(h, k, z);
            for (std::uint32_t i = 0; i < cfg_.state_dim; ++i) out[i] = ring_.add(out[i], z[i], cfg_.mode);
        }
        if (k < cfg_.depth) h = child_hash(h, child_code(t, k));
    }
}

PadicVector BrownianMotion::eval(const PadicVector& t) const {
    if (t.dim() != cfg_.index_dim) throw std::invalid_argument("point has wrong dimension");
    const auto r = point_residues(ring_, t);
    std::vector<std::uint64_t> out(cfg_.state_dim);
    eval_residues(r, out);
    return residues_to_vector(ring_, out);
}

GridRestriction BrownianMotion::grid(std::uint32_t level) const {
    return GridRestriction(cfg_, level, build_grid(*this, level).values);
}

GridRestriction BrownianMotion::grid_point_values(std::uint32_t level) const {
    auto g = build_grid(*this, level);
    const std::uint32_t d = cfg_.state_dim;
    std::vector<std::uint64_t> z(d);
    for (std::uint64_t b = 0; b < g.hashes.size(); ++b) {
        std::uint64_t h = g.hashes[b];
        for (std::uint32_t k = level + 1; k <= cfg_.depth; ++k) {
            h = child_hash(h, 0);
            weight(h, k, z);
            for (std::uint32_t i = 0; i < d; ++i) g.values[b * d + i] = ring_.add(g.values[b * d + i], z[i], cfg_.mode);
        }
    }
    return GridRestriction(cfg_, level, std::move(g.values));
}

ShiftedBrownian::ShiftedBrownian(const BrownianMotion& base, const PadicVector& s) : base_(&base), shift_(s) {
    if (s.dim() != base.config().index_dim || !s.in_unit_ball()) throw std::invalid_argument("shift must lie in D^N");
}

PadicVector ShiftedBrownian::eval(const PadicVector& t) const {
    return base_->eval(shift_.add(t, base_->config().mode));
}

ShiftedBrownian ShiftedBrownian::shifted(const PadicVector& more) const {
    return ShiftedBrownian(*base_, shift_.add(more, base_->config().mode));
}

ShiftedBrownian shift(const BrownianMotion& bm, const PadicVector& s) { return ShiftedBrownian(bm, s); }

std::vector<std::uint64_t> point_residues(const ResidueRing& ring, const PadicVector& t) {
    std::vector<std::uint64_t> out;
    out.reserve(t.dim());
    for (const auto& c : t.coords()) out.push_back(ring.from_scalar(c));
    return out;
}

PadicVector residues_to_vector(const ResidueRing& ring, std::span<const std::uint64_t> r) {
    std::vector<padic::PadicScalar> coords;
    coords.reserve(r.size());
    for (auto x : r) coords.push_back(ring.to_scalar(x));
    return PadicVector(std::move(coords));
}

std::vector<PadicVector> zero_grid_function(const BrownianConfig& cfg, std::uint32_t m) {
    return std::vector<PadicVector>(cfg.ball_count(m), PadicVector::zero(cfg.p, cfg.state_dim, m + 1));
}

HittingProbability hitting_prob_exact(const BrownianConfig& cfg, std::span<const PadicVector> f, std::uint32_t m) {
    const std::uint64_t count = cfg.ball_count(m);
    if (f.size() != count) throw std::invalid_argument("f needs one value per level-m ball");
    const ResidueRing ring(cfg.p, m + 1);
    std::vector<std::vector<std::uint64_t>> fr;
    fr.reserve(count);
    HittingProbability out;
    for (const auto& v : f) {
        if (v.dim() != cfg.state_dim) throw std::invalid_argument("f value has wrong dimension");
        if (!v.in_unit_ball()) {
            out.constraint_violated = true;
            return out;
        }
        fr.push_back(point_residues(ring, v));
    }
    const std::int64_t d = cfg.state_dim;
    std::int64_t e = -d * static_cast<std::int64_t>(m + 1) * static_cast<std::int64_t>(count);
    // Consecutive points suffice: balls are intervals of the order, so the
    // ultrametric inequality propagates the Lipschitz bound to all pairs.
    for (std::uint64_t b = 1; b < count; ++b) {
        const std::uint32_t j = split_level(b - 1, b, cfg.branching(), m);
        for (std::uint32_t i = 0; i < cfg.state_dim; ++i) {
            if (!ring.within(ring.sub(fr[b][i], fr[b - 1][i], cfg.mode), j + 1)) {
                out.constraint_violated = true;
                return out;
            }
        }
        e += d * (1 + static_cast<std::int64_t>(j));
    }
    out.exponent = e;
    out.value = padic::Norm::of(cfg.p, -e).to_rational();
    return out;
}

harness::McEstimate hitting_prob_mc(const BrownianConfig& cfg, std::span<const PadicVector> f, std::uint32_t m,
                                    std::uint64_t reps) {
    if (m > cfg.depth) throw std::invalid_argument("grid level exceeds depth");
    if (f.size() != cfg.ball_count(m)) throw std::invalid_argument("f needs one value per level-m ball");
    const ResidueRing ring(cfg.p, cfg.precision());
    const ResidueRing fine(cfg.p, m + 1);
    std::vector<std::uint64_t> fr;
    for (const auto& v : f)
        for (const auto& c : v.coords()) fr.push_back(fine.from_scalar(c));
    const std::uint32_t d = cfg.state_dim;
    auto hits = parallel_map<std::uint8_t>(reps, [&](std::size_t rep) -> std::uint8_t {
        const BrownianMotion bm(cfg.replica(rep));
        const auto g = bm.grid(m);
        for (std::uint64_t b = 0; b < g.size(); ++b) {
            const auto a = g.value(b);
            for (std::uint32_t i = 0; i < d; ++i)
                if (fine.sub(ring.truncate(a[i], m + 1), fr[b * d + i], cfg.mode) != 0) return 0;
        }
        return 1;
    });
    harness::RunningMoments acc;
    for (auto h : hits) acc.push(h);
    return acc.estimate();
}

harness::TestReport increments_test(const BrownianConfig& cfg, std::span<const PadicVector> points, std::uint32_t r,
                                    std::uint64_t reps, double alpha) {
    for (std::size_t i = 1; i < points.size(); ++i)
        if (padic::order_compare(points[i - 1], points[i]) != std::strong_ordering::less)
            throw std::invalid_argument("increments_test needs strictly increasing points");
    return increment_statistic(cfg, points, r, reps, alpha, "increments");
}

harness::TestReport increment_dependence(const BrownianConfig& cfg, std::span<const PadicVector> points,
                                         std::uint32_t r, std::uint64_t reps, double alpha) {
    return increment_statistic(cfg, points, r, reps, alpha, "increment_dependence");
}

harness::TestReport ball_independence_test(const BrownianConfig& cfg, const PadicVector& s, const PadicVector& t,
                                           std::uint32_t ball_level, std::uint32_t r, std::uint64_t reps,
                                           double alpha) {
    check_quotient_level(cfg, r);
    const BallAddress c = padic::ball_of(s, ball_level);
    if (c.contains(t)) throw std::invalid_argument("t must lie outside the ball of s");
    const PadicVector pts[] = {s, t};
    const auto rs = residues_of(cfg, pts);
    const ResidueRing ring(cfg.p, cfg.precision());
    const std::uint32_t d = cfg.state_dim;
    auto cells = parallel_map<std::pair<std::uint64_t, std::uint64_t>>(reps, [&](std::size_t rep) {
        const BrownianMotion bm(cfg.replica(rep));
        const auto x = eval_points(bm, rs);
        std::vector<std::uint64_t> diff(d);
        for (std::uint32_t i = 0; i < d; ++i) diff[i] = ring.sub(x[d + i], x[i], cfg.mode);
        return std::pair{residue_cell(ring, std::span(x).first(d), r), residue_cell(ring, diff, r)};
    });
    std::vector<std::uint64_t> u(reps), v(reps);
    for (std::uint64_t k = 0; k < reps; ++k) std::tie(u[k], v[k]) = cells[k];
    const std::uint64_t n = gaussian::quotient_cell_count(cfg.p, d, r);
    auto rep = gaussian::independence_test_cells(u, v, n, n, alpha, "ball_independence");
    rep.seed = cfg.seed;
    return rep;
}

harness::TestReport origin_independence_test(const BrownianConfig& cfg, const PadicVector& t, std::uint32_t r,
                                             std::uint64_t reps, double alpha) {
    const auto zero = PadicVector::zero(cfg.p, cfg.index_dim, cfg.precision());
    const std::int64_t v = t.norm().valuation();
    if (v == padic::kInfiniteValuation || v >= cfg.precision()) throw std::invalid_argument("t must be nonzero");
    auto rep = ball_independence_test(cfg, zero, t, static_cast<std::uint32_t>(v + 1), r, reps, alpha);
    rep.name = "origin_independence";
    return rep;
}

harness::TestReport pair_law_test(const BrownianConfig& cfg, const PadicVector& t, std::uint32_t r,
                                  std::uint64_t reps, double alpha) {
    check_quotient_level(cfg, r);
    const std::int64_t vt = t.norm().valuation();
    if (vt == padic::kInfiniteValuation || vt >= cfg.precision()) throw std::invalid_argument("t must be nonzero");
    const auto k = static_cast<std::uint32_t>(vt);
    const ResidueRing ring(cfg.p, cfg.precision());
    const std::uint32_t d = cfg.state_dim;
    const std::uint64_t n = gaussian::quotient_cell_count(cfg.p, d, r);
    const PadicVector pts[] = {PadicVector::zero(cfg.p, cfg.index_dim, cfg.precision()), t};
    const auto rs = residues_of(cfg, pts);
    auto cells = parallel_map<std::uint64_t>(reps, [&](std::size_t rep) {
        const BrownianMotion bm(cfg.replica(rep));
        const auto x = eval_points(bm, rs);
        std::vector<std::uint64_t> diff(d);
        for (std::uint32_t i = 0; i < d; ++i) diff[i] = ring.sub(x[d + i], x[i], cfg.mode);
        return residue_cell(ring, std::span(x).first(d), r) * n + residue_cell(ring, diff, r);
    });
    std::vector<std::uint64_t> counts(n * n, 0);
    for (auto c : cells) ++counts[c];
    // Support: x arbitrary, y - x in p^{k+1} D^d.
    const ResidueRing q(cfg.p, r);
    const std::uint32_t need = std::min(k + 1, r);
    const std::uint64_t per_coord = q.power(r - need);
    const double mass = 1.0 / (static_cast<double>(n) * static_cast<double>(ipow(per_coord, d)));
    std::vector<double> probs(n * n, 0.0);
    std::vector<std::uint64_t> diff(d);
    for (std::uint64_t u = 0; u < n; ++u) {
        for (std::uint64_t v = 0; v < n; ++v) {
            std::uint64_t rest = v;
            bool in = true;
            for (std::uint32_t i = 0; i < d; ++i) {
                in = in && q.within(rest % q.modulus(), need);
                rest /= q.modulus();
            }
            if (in) probs[u * n + v] = mass;
        }
    }
    auto rep = harness::chi_square_goodness(counts, probs, alpha, "pair_law");
    rep.seed = cfg.seed;
    return rep;
}

harness::TestReport shift_law_test(const BrownianConfig& cfg, const PadicVector& t0, const PadicVector& s,
                                   std::uint32_t r, std::uint64_t reps, double alpha) {
    check_quotient_level(cfg, r);
    const std::uint32_t d = cfg.state_dim;
    const std::uint64_t n = gaussian::quotient_cell_count(cfg.p, d, r);
    auto cells = parallel_map<std::pair<std::uint64_t, std::uint64_t>>(reps, [&](std::size_t rep) {
        const BrownianMotion a(cfg.replica(2 * rep));
        const BrownianMotion b(cfg.replica(2 * rep + 1));
        return std::pair{gaussian::quotient_cell(a.eval(t0), r), gaussian::quotient_cell(shift(b, s).eval(t0), r)};
    });
    std::vector<std::uint64_t> h1(n, 0), h2(n, 0);
    for (const auto& [x, y] : cells) {
        ++h1[x];
        ++h2[y];
    }
    auto rep = harness::chi_square_homogeneity(h1, h2, alpha, "shift_law");
    rep.seed = cfg.seed;
    return rep;
}

PathAudit audit_path(const BrownianMotion& bm, std::uint32_t level) {
    const auto& cfg = bm.config();
    if (level >= cfg.depth) throw std::invalid_argument("audit needs depth > level");
    const auto g = bm.grid_point_values(level);
    const ResidueRing& ring = bm.ring();
    const std::uint32_t d = cfg.state_dim;
    PathAudit out;
    out.equal_by_distance.assign(level, 0);
    out.pairs_by_distance.assign(level, 0);
    for (std::uint64_t b = 0; b < g.size(); ++b) {
        const PadicVector x = bm.eval(g.address(b).center(cfg.precision()));
        if (!x.in_unit_ball()) ++out.norm_violations;
        if (point_residues(ring, x) != std::vector<std::uint64_t>(g.value(b).begin(), g.value(b).end()))
            ++out.eval_mismatches;
    }
    std::vector<std::uint64_t> diff(d);
    for (std::uint64_t a = 0; a < g.size(); ++a) {
        for (std::uint64_t b = a + 1; b < g.size(); ++b) {
            const std::uint32_t j = split_level(a, b, cfg.branching(), level);
            for (std::uint32_t i = 0; i < d; ++i) diff[i] = ring.sub(g.value(b)[i], g.value(a)[i], cfg.mode);
            const std::uint32_t v = min_valuation(ring, diff);
            ++out.pairs;
            ++out.pairs_by_distance[j];
            if (v < j + 1) ++out.lipschitz_violations;
            if (v == j + 1) ++out.equal_by_distance[j];
        }
    }
    return out;
}

}  // namespace ultrabrown::brownian
