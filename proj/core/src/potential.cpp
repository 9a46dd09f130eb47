#include "ultrabrown/potential.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ultrabrown/codec.hpp"
#include "ultrabrown/gaussian.hpp"
#include "ultrabrown/parallel.hpp"
#include "ultrabrown/rng.hpp"

namespace ultrabrown::potential {

namespace {

constexpr std::uint64_t kPalmTag = 0x70616c6dULL;

Rational power(std::uint32_t p, std::int64_t e) { return padic::Norm::of(p, -e).to_rational(); }

double powd(std::uint32_t p, std::int64_t e) { return std::pow(static_cast<double>(p), static_cast<double>(e)); }

Rational leading_constant(const KernelParams& kp) {
    return (Rational(1) - power(kp.p, -static_cast<std::int64_t>(kp.N))) * power(kp.p, -static_cast<std::int64_t>(kp.d));
}

void check_params(const KernelParams& kp) {
    if (!padic::is_prime(kp.p)) throw padic::PadicError("p must be prime");
    if (kp.N == 0 || kp.d == 0) throw std::invalid_argument("N and d must be positive");
}

// x mod p^n from the digits of a point of D^d.
std::vector<std::uint64_t> low_residues(const PadicVector& x, std::uint32_t n) {
    if (!x.in_unit_ball()) throw padic::PadicError("atoms must lie in D^d");
    if (x.abs_prec() < n) throw padic::PadicError("atom precision below the smoothing level");
    std::vector<std::uint64_t> out;
    out.reserve(x.dim());
    for (const auto& c : x.coords()) {
        std::uint64_t r = 0;
        for (std::uint32_t k = n; k-- > 0;) r = r * x.prime() + c.digit(k);
        out.push_back(r);
    }
    return out;
}

}  // namespace

double ExactValue::to_double() const {
    if (infinite) throw std::domain_error("infinite value has no double form");
    return static_cast<double>(value);
}

void to_json(nlohmann::json& j, const ExtendedReal& x) {
    if (x.infinite)
        j = "inf";
    else
        j = x.value;
}

ExactValue kernel_u(const KernelParams& kp, Radius r) {
    check_params(kp);
    if (!r.zero && r.k < 0) throw std::invalid_argument("radius must be p^{-k} with k >= 0, or 0");
    const Rational c = leading_constant(kp);
    const auto N = static_cast<std::int64_t>(kp.N);
    const auto d = static_cast<std::int64_t>(kp.d);
    if (N == d) {
        if (r.zero) return ExactValue::inf();
        return {c * r.k, false};
    }
    const Rational denom = power(kp.p, d - N) - 1;
    if (r.zero) {
        if (N < d) return ExactValue::inf();
        return {-c / denom, false};
    }
    return {c * (power(kp.p, -r.k * (N - d)) - 1) / denom, false};
}

double kernel_u_double(const KernelParams& kp, Radius r) {
    const auto v = kernel_u(kp, r);
    return v.infinite ? std::numeric_limits<double>::infinity() : v.to_double();
}

Rational truncated_kernel_origin(const KernelParams& kp, std::uint32_t n) {
    check_params(kp);
    const Rational c = leading_constant(kp);
    const auto N = static_cast<std::int64_t>(kp.N);
    const auto d = static_cast<std::int64_t>(kp.d);
    const Rational x = power(kp.p, -d);
    if (N == d) return c * (Rational(n) + x / (1 - x));
    const Rational cn = c / (power(kp.p, d - N) - 1);
    return cn * (1 - x) * (power(kp.p, (d - N) * n) / (1 - power(kp.p, -N)) - 1 / (1 - x));
}

ExactValue truncated_kernel(const KernelParams& kp, std::uint32_t n, Radius r) {
    if (r.zero || r.k >= static_cast<std::int64_t>(n)) return {truncated_kernel_origin(kp, n), false};
    return kernel_u(kp, r);
}

double AtomicMeasure::total_mass() const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.mass;
    return s;
}

AtomicMeasure AtomicMeasure::scaled(double c) const {
    AtomicMeasure out = *this;
    for (auto& a : out.atoms) a.mass *= c;
    return out;
}

void AtomicMeasure::validate() const {
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const auto& a = atoms[i];
        if (!(a.mass >= 0.0) || !std::isfinite(a.mass)) throw std::invalid_argument("atom masses must be finite and >= 0");
        if (!a.point.in_unit_ball()) throw padic::PadicError("atoms must lie in D^d");
        if (a.point.dim() != atoms[0].point.dim() || a.point.prime() != atoms[0].point.prime())
            throw std::invalid_argument("atoms live in different spaces");
        for (std::size_t j = 0; j < i; ++j)
            if (distance(a.point, atoms[j].point).zero)
                throw std::invalid_argument("atoms must be distinguishable at their precision");
    }
}

void to_json(nlohmann::json& j, const AtomicMeasure& m) {
    j = nlohmann::json::object();
    auto& arr = j["atoms"] = nlohmann::json::array();
    for (const auto& a : m.atoms) arr.push_back({{"point", a.point}, {"mass", a.mass}});
}

void from_json(const nlohmann::json& j, AtomicMeasure& m) {
    const auto& arr = j.is_array() ? j : j.at("atoms");
    m.atoms.clear();
    for (const auto& a : arr) m.atoms.push_back({a.at("point").get<PadicVector>(), a.value("mass", 1.0)});
}

Radius distance(const PadicVector& x, const PadicVector& y) {
    if (x.dim() != y.dim() || x.prime() != y.prime()) throw std::invalid_argument("points live in different spaces");
    if (!x.in_unit_ball() || !y.in_unit_ball()) throw padic::PadicError("distance is taken in D^d");
    const std::int64_t m = std::min(x.abs_prec(), y.abs_prec());
    std::int64_t best = m;
    for (std::size_t i = 0; i < x.dim(); ++i) {
        for (std::int64_t k = 0; k < best; ++k) {
            if (x[i].digit(k) != y[i].digit(k)) {
                best = k;
                break;
            }
        }
    }
    return best == m ? Radius::origin() : Radius::of(best);
}

ExtendedReal potential_at(const KernelParams& kp, const AtomicMeasure& mu, const PadicVector& x) {
    double s = 0.0;
    for (const auto& a : mu.atoms) {
        if (a.mass == 0.0) continue;
        const auto u = kernel_u(kp, distance(x, a.point));
        if (u.infinite) return ExtendedReal::inf();
        s += a.mass * u.to_double();
    }
    return {s};
}

ExtendedReal energy(const KernelParams& kp, const AtomicMeasure& mu) {
    double s = 0.0;
    for (const auto& a : mu.atoms) {
        if (a.mass == 0.0) continue;
        const auto pa = potential_at(kp, mu, a.point);
        if (pa.infinite) return ExtendedReal::inf();
        s += a.mass * pa.value;
    }
    return {s};
}

double truncated_energy(const KernelParams& kp, const AtomicMeasure& mu, std::uint32_t n) {
    double s = 0.0;
    for (const auto& a : mu.atoms)
        for (const auto& b : mu.atoms)
            s += a.mass * b.mass * truncated_kernel(kp, n, distance(a.point, b.point)).to_double();
    return s;
}

std::vector<double> project_simplex(std::span<const double> v) {
    if (v.empty()) return {};
    std::vector<double> u(v.begin(), v.end());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0, theta = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        cum += u[i];
        const double t = (cum - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0) theta = t;
    }
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(v[i] - theta, 0.0);
    return out;
}

EquilibriumResult equilibrium(const KernelParams& kp, std::span<const PadicVector> points, EquilibriumOptions opts) {
    check_params(kp);
    const std::size_t n = points.size();
    if (n == 0) throw std::invalid_argument("equilibrium needs at least one point");
    EquilibriumResult out;
    out.masses.assign(n, 1.0 / static_cast<double>(n));
    std::vector<double> k(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const Radius r = distance(points[i], points[j]);
            if (i != j && r.zero) throw std::invalid_argument("equilibrium points must be distinct");
            k[i * n + j] = kernel_u_double(kp, r);
        }
    }
    if (std::isinf(k[0])) {
        // Every probability measure on the points charges some atom.
        out.energy = ExtendedReal::inf();
        out.capacity = 0.0;
        out.converged = true;
        return out;
    }
    double lipschitz = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        lipschitz = std::max(lipschitz, std::accumulate(k.begin() + i * n, k.begin() + (i + 1) * n, 0.0));
    // Minimizes half the energy; gradient K m.
    auto& m = out.masses;
    std::vector<double> grad(n), step(n);
    if (lipschitz > 0.0) {
        while (out.iterations < opts.max_iterations) {
            for (std::size_t i = 0; i < n; ++i)
                grad[i] = std::inner_product(k.begin() + i * n, k.begin() + (i + 1) * n, m.begin(), 0.0);
            for (std::size_t i = 0; i < n; ++i) step[i] = m[i] - grad[i] / lipschitz;
            const auto next = project_simplex(step);
            double norm2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) norm2 += (m[i] - next[i]) * (m[i] - next[i]);
            m = next;
            ++out.iterations;
            if (lipschitz * std::sqrt(norm2) < opts.tolerance) {
                out.converged = true;
                break;
            }
        }
    } else {
        out.converged = true;
    }
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) e += m[i] * k[i * n + j] * m[j];
    out.energy = {e};
    out.capacity = e > 0.0 ? 1.0 / e : std::numeric_limits<double>::infinity();
    return out;
}

void to_json(nlohmann::json& j, const EquilibriumResult& r) {
    j = nlohmann::json{{"masses", r.masses},
                       {"energy", r.energy},
                       {"capacity", r.capacity},
                       {"iterations", r.iterations},
                       {"converged", r.converged}};
}

SmoothedMeasure::SmoothedMeasure(const AtomicMeasure& mu, std::uint32_t p, std::uint32_t d, std::uint32_t n)
    : p_(p), d_(d), n_(n), scale_(powd(p, static_cast<std::int64_t>(d) * n)) {
    for (const auto& a : mu.atoms) {
        if (a.point.dim() != d) throw std::invalid_argument("atom has wrong dimension");
        if (a.point.prime() != p) throw std::invalid_argument("atom has wrong base");
        auto key = low_residues(a.point, n);
        auto it = std::find_if(cells_.begin(), cells_.end(), [&](const auto& c) { return c.first == key; });
        if (it == cells_.end())
            cells_.emplace_back(std::move(key), a.mass);
        else
            it->second += a.mass;
    }
}

double SmoothedMeasure::operator()(std::span<const std::uint64_t> x, const padic::ResidueRing& ring) const {
    for (const auto& [key, mass] : cells_) {
        bool match = true;
        for (std::uint32_t i = 0; i < d_ && match; ++i) match = ring.truncate(x[i], n_) == key[i];
        if (match) return scale_ * mass;
    }
    return 0.0;
}

std::vector<double> kappa_densities(const BrownianMotion& bm, const AtomicMeasure& mu, std::uint32_t n) {
    const auto& cfg = bm.config();
    const SmoothedMeasure g(mu, cfg.p, cfg.state_dim, n);
    const auto grid = bm.grid(n);
    const double vol = powd(cfg.p, -static_cast<std::int64_t>(cfg.index_dim) * n);
    std::vector<double> out(grid.size());
    for (std::uint64_t b = 0; b < grid.size(); ++b) out[b] = vol * g(grid.value(b), bm.ring());
    return out;
}

std::vector<std::uint8_t> region_mask(const BrownianConfig& cfg, std::uint32_t n,
                                      std::span<const BallAddress> region) {
    std::vector<std::uint8_t> mask(cfg.ball_count(n), 0);
    for (const auto& ball : region) {
        if (ball.level() > n) throw std::invalid_argument("region balls must have level <= n");
        if (ball.prime() != cfg.p || ball.dim() != cfg.index_dim) throw std::invalid_argument("ball of another tree");
        const std::uint64_t span = cfg.ball_count(n - ball.level());
        const std::uint64_t first = ball.index() * span;
        std::fill(mask.begin() + first, mask.begin() + first + span, 1);
    }
    return mask;
}

double kappa_n(const BrownianMotion& bm, const AtomicMeasure& mu, std::uint32_t n,
               std::span<const BallAddress> region) {
    const auto dens = kappa_densities(bm, mu, n);
    const auto mask = region_mask(bm.config(), n, region);
    double s = 0.0;
    for (std::size_t b = 0; b < dens.size(); ++b)
        if (mask[b]) s += dens[b];
    return s;
}

MartingaleReport martingale_check(const BrownianConfig& cfg, const AtomicMeasure& mu, std::uint32_t n,
                                  std::span<const BallAddress> region, std::uint64_t reps, double sigmas) {
    if (n + 1 > cfg.depth) throw std::invalid_argument("martingale check needs n + 1 <= depth");
    const auto mask_n = region_mask(cfg, n, region);
    const auto mask_next = region_mask(cfg, n + 1, region);
    auto rows = parallel_map<std::array<double, 3>>(reps, [&](std::size_t rep) {
        const BrownianMotion bm(cfg.replica(rep));
        const auto a = kappa_densities(bm, mu, n);
        const auto b = kappa_densities(bm, mu, n + 1);
        double kn = 0.0, kn1 = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (mask_n[i]) kn += a[i];
        for (std::size_t i = 0; i < b.size(); ++i)
            if (mask_next[i]) kn1 += b[i];
        const double inc = kn1 - kn;
        return std::array<double, 3>{inc, inc * kn, kn > 0.0 ? inc : 0.0};
    });
    harness::RunningMoments m[3];
    for (const auto& r : rows)
        for (int i = 0; i < 3; ++i) m[i].push(r[i]);
    MartingaleReport out{m[0].estimate(), m[1].estimate(), m[2].estimate(), false};
    out.pass = out.increment.agrees_with(0.0, sigmas) && out.weighted_by_kappa.agrees_with(0.0, sigmas) &&
               out.weighted_by_support.agrees_with(0.0, sigmas);
    return out;
}

double second_moment_exact(const KernelParams& kp, const AtomicMeasure& mu, std::uint32_t n) {
    check_params(kp);
    if (n == 0) return mu.total_mass() * mu.total_mass();
    const auto N = static_cast<std::int64_t>(kp.N);
    const auto d = static_cast<std::int64_t>(kp.d);
    const double shell = 1.0 - powd(kp.p, -N);
    double s = 0.0;
    for (const auto& a : mu.atoms) {
        for (const auto& b : mu.atoms) {
            const Radius r = distance(a.point, b.point);
            const std::int64_t close = r.zero ? std::numeric_limits<std::int64_t>::max() : r.k;
            double pair = 0.0;
            // |s - t| = p^{-j} with j + 1 < n: X_t lands in the ball of b with probability p^{-d(n-j-1)}.
            for (std::int64_t j = 0; j + 2 <= static_cast<std::int64_t>(n); ++j)
                if (close >= j + 1) pair += powd(kp.p, -d * (n - j - 1)) * powd(kp.p, -N * j) * shell;
            // j >= n - 1: X_t and X_s share their ball.
            if (close >= static_cast<std::int64_t>(n)) pair += powd(kp.p, -N * (n - 1));
            s += a.mass * b.mass * powd(kp.p, d * n) * pair;
        }
    }
    return s;
}

SecondMomentReport second_moment_check(const BrownianConfig& cfg, const AtomicMeasure& mu, std::uint32_t n,
                                       std::uint64_t reps, double sigmas) {
    const KernelParams kp{cfg.p, cfg.index_dim, cfg.state_dim};
    auto rows = parallel_map<double>(reps, [&](std::size_t rep) {
        const BrownianMotion bm(cfg.replica(rep));
        const auto dens = kappa_densities(bm, mu, n);
        return std::accumulate(dens.begin(), dens.end(), 0.0);
    });
    harness::RunningMoments first, second;
    for (double k : rows) {
        first.push(k);
        second.push(k * k);
    }
    SecondMomentReport out;
    out.first_moment = first.estimate();
    out.second_moment = second.estimate();
    out.exact = second_moment_exact(kp, mu, n);
    out.truncated_energy = truncated_energy(kp, mu, n);
    out.pass = out.first_moment.agrees_with(mu.total_mass(), sigmas) && out.second_moment.agrees_with(out.exact, sigmas);
    return out;
}

CylinderFunctional small_value_indicator(const PadicVector& t0, std::uint32_t k) {
    CylinderFunctional f;
    f.points = {t0};
    f.level = k;
    f.fn = [k](std::span<const std::uint64_t> values, const padic::ResidueRing& ring) {
        for (auto v : values)
            if (!ring.within(v, k)) return 0.0;
        return 1.0;
    };
    return f;
}

CylinderFunctional constant_functional(double c) {
    CylinderFunctional f;
    f.level = 1;
    f.fn = [c](std::span<const std::uint64_t>, const padic::ResidueRing&) { return c; };
    return f;
}

PalmReport palm_check(const BrownianConfig& cfg, const AtomicMeasure& mu, const CylinderFunctional& F,
                      std::uint32_t n, std::uint64_t reps, double sigmas) {
    if (F.level == 0 || F.level > cfg.precision()) throw std::invalid_argument("functional level out of range");
    // X(rep + t_i) mod p^level is constant over a level-(level-1) ball of reps.
    const std::uint32_t L = std::max(n, F.level - 1);
    if (L > cfg.depth) throw std::invalid_argument("palm check needs max(n, level-1) <= depth");
    const std::uint32_t d = cfg.state_dim;
    const std::size_t k = F.points.size();
    const padic::ResidueRing ring(cfg.p, cfg.precision());
    const padic::ResidueRing out_ring(cfg.p, F.level);
    std::vector<std::vector<std::uint64_t>> ts;
    for (const auto& t : F.points) ts.push_back(brownian::point_residues(ring, t));
    std::vector<std::vector<std::uint64_t>> atoms;
    for (const auto& a : mu.atoms) atoms.push_back(low_residues(a.point, F.level));
    const SmoothedMeasure g(mu, cfg.p, d, n);
    const double vol = powd(cfg.p, -static_cast<std::int64_t>(cfg.index_dim) * L);

    auto lhs_rows = parallel_map<double>(reps, [&](std::size_t rep) {
        const BrownianMotion bm(cfg.replica(rep));
        const auto grid = bm.grid(L);
        std::vector<std::uint64_t> point(cfg.index_dim), x(d), values(k * d);
        double s = 0.0;
        for (std::uint64_t b = 0; b < grid.size(); ++b) {
            const double w = g(grid.value(b), ring);
            if (w == 0.0) continue;
            const auto center = grid.address(b).residues();
            for (std::size_t i = 0; i < k; ++i) {
                for (std::uint32_t c = 0; c < cfg.index_dim; ++c) point[c] = ring.add(center[c], ts[i][c], cfg.mode);
                bm.eval_residues(point, x);
                for (std::uint32_t c = 0; c < d; ++c) values[i * d + c] = ring.truncate(x[c], F.level);
            }
            s += vol * w * F.fn(values, out_ring);
        }
        return s;
    });

    const BrownianConfig palm_cfg = [&] {
        BrownianConfig c = cfg;
        c.seed = rng::combine(cfg.seed, kPalmTag);
        return c;
    }();
    auto rhs_rows = parallel_map<double>(reps, [&](std::size_t rep) {
        const BrownianConfig rc = palm_cfg.replica(rep);
        const BrownianMotion w(rc);
        rng::KeyedStream stream(rng::RngKey{rc.seed, kPalmTag});
        std::vector<std::uint64_t> u(d), wv(k * d), x(d), values(k * d);
        for (auto& c : u) c = out_ring.truncate(gaussian::sample_residue(ring, n, stream), F.level);
        for (std::size_t i = 0; i < k; ++i) {
            w.eval_w_residues(ts[i], x);
            for (std::uint32_t c = 0; c < d; ++c) wv[i * d + c] = ring.truncate(x[c], F.level);
        }
        double s = 0.0;
        for (std::size_t a = 0; a < atoms.size(); ++a) {
            if (mu.atoms[a].mass == 0.0) continue;
            for (std::size_t i = 0; i < k; ++i)
                for (std::uint32_t c = 0; c < d; ++c)
                    values[i * d + c] =
                        out_ring.add(out_ring.add(atoms[a][c], u[c], cfg.mode), wv[i * d + c], cfg.mode);
            s += mu.atoms[a].mass * F.fn(values, out_ring);
        }
        return s;
    });

    PalmReport out;
    out.lhs = harness::estimate_mean(lhs_rows);
    out.rhs = harness::estimate_mean(rhs_rows);
    out.diff = out.lhs.mean - out.rhs.mean;
    const double se = std::hypot(out.lhs.std_error, out.rhs.std_error);
    out.pass = std::abs(out.diff) <= sigmas * se;
    return out;
}

SupReport potential_sup_check(const KernelParams& kp, const AtomicMeasure& mu, std::span<const PadicVector> probes) {
    SupReport out;
    for (const auto& x : probes) out.sup_probes = std::max(out.sup_probes, potential_at(kp, mu, x));
    for (const auto& a : mu.atoms)
        if (a.mass > 0.0) out.sup_support = std::max(out.sup_support, potential_at(kp, mu, a.point));
    if (out.sup_probes.infinite)
        out.attained_on_support = out.sup_support.infinite;
    else
        out.attained_on_support =
            out.sup_support.infinite || out.sup_probes.value <= out.sup_support.value * (1.0 + 1e-12) + 1e-300;
    return out;
}

}  // namespace ultrabrown::potential
