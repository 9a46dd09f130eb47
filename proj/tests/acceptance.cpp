// Acceptance run: one PASS/FAIL line per criterion. Reference values come from
// oracles.hpp and identities.hpp, not from the library.
//
// Exit status is 0 when every criterion passes or fails only in the known,
// documented way listed in kKnownDeviations; any other failure exits 1.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "identities.hpp"
#include "oracles.hpp"
#include "ultrabrown/brownian.hpp"
#include "ultrabrown/experiments.hpp"
#include "ultrabrown/gaussian.hpp"
#include "ultrabrown/localtime.hpp"
#include "ultrabrown/parallel.hpp"
#include "ultrabrown/potential.hpp"
#include "ultrabrown/series.hpp"

namespace {

using namespace ultrabrown;
using padic::PadicScalar;
using padic::PadicVector;

enum class Verdict { pass, fail, known_deviation };

struct Outcome {
    Verdict verdict = Verdict::fail;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

PadicVector point(std::uint32_t p, std::vector<std::int64_t> xs, std::int64_t prec) {
    std::vector<PadicScalar> c;
    for (auto x : xs) c.push_back(PadicScalar::from_integer(p, x, prec));
    return PadicVector(std::move(c));
}

Outcome gaussian_law() {
    const auto start = std::chrono::steady_clock::now();
    gaussian::GaussianSpec spec{.p = 2, .level = 0, .dim = 1, .abs_prec = 8};
    const rng::RngKey root{101, 0};
    const auto xs = parallel_map<PadicVector>(100000, [&](std::size_t i) { return gaussian::sample(spec, root.child(i)); });
    const auto chi = harness::chi_square_uniform(gaussian::quotient_histogram(xs, 8));
    double worst = 0;
    for (auto den : {1, 2}) {
        const auto xi = PadicScalar::from_rational(2, 1, den, 8);
        worst = std::max(worst, std::abs(gaussian::char_empirical(xs, xi) - gaussian::char_exact(spec, xi)));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool ok = chi.pass && chi.dof == 255 && worst <= 0.02 && secs < 30;
    return {ok ? Verdict::pass : Verdict::fail,
            fmt("chi2=%.1f dof=%.0f p=%.3f, max |phi_hat - phi| = %.4f over |xi| in {1,2}, %.1fs", chi.statistic, chi.dof,
                chi.p_value, worst, secs)};
}

Outcome path_constraints() {
    const brownian::BrownianConfig cfg{.p = 2, .index_dim = 1, .state_dim = 1, .depth = 7, .seed = 102};
    const std::uint32_t level = 6;
    const std::uint64_t paths = 1000, balls = 64;
    struct PathResult {
        brownian::PathAudit audit;
        std::vector<std::uint8_t> equal;
    };
    const auto results = parallel_map<PathResult>(paths, [&](std::size_t i) {
        const brownian::BrownianMotion bm(cfg.replica(i));
        PathResult r{brownian::audit_path(bm, level), {}};
        const auto g = bm.grid(level);
        const auto& ring = g.ring();
        for (std::uint64_t a = 0; a < balls; ++a) {
            const auto ta = g.address(a).residues()[0];
            for (std::uint64_t b = a + 1; b < balls; ++b) {
                const auto tb = g.address(b).residues()[0];
                const auto j = ring.valuation(ring.sub(ta, tb, cfg.mode));
                const auto dv = ring.valuation(ring.sub(g.value(a)[0], g.value(b)[0], cfg.mode));
                r.equal.push_back(dv == j + 1);
            }
        }
        return r;
    });
    std::uint64_t violations = 0, mismatches = 0;
    std::vector<harness::RunningMoments> by_class(level);
    std::vector<std::uint64_t> per_pair(results.front().equal.size(), 0);
    for (const auto& r : results) {
        violations += r.audit.norm_violations + r.audit.lipschitz_violations;
        mismatches += r.audit.eval_mismatches;
        for (std::size_t j = 0; j < r.audit.pairs_by_distance.size(); ++j)
            if (r.audit.pairs_by_distance[j] > 0)
                by_class[j].push(double(r.audit.equal_by_distance[j]) / double(r.audit.pairs_by_distance[j]));
        for (std::size_t k = 0; k < per_pair.size(); ++k) per_pair[k] += r.equal[k];
    }
    bool classes_ok = true;
    std::string classes;
    for (std::size_t j = 0; j < by_class.size(); ++j) {
        const auto e = by_class[j].estimate();
        classes_ok = classes_ok && e.agrees_with(0.5);
        classes += fmt(" j%zu=%.4f+-%.4f", j, e.mean, e.std_error);
    }
    const double pair_se = std::sqrt(0.25 / double(paths));
    std::uint64_t outside = 0;
    for (auto c : per_pair) outside += std::abs(double(c) / double(paths) - 0.5) > 3 * pair_se;
    const bool ok = violations == 0 && mismatches == 0 && classes_ok;
    return {ok ? Verdict::pass : Verdict::fail,
            fmt("%llu violations over %llu paths; equality frequency by |s-t|=2^-j:%s; per pair %llu of %zu outside 3 sigma "
                "(about %.1f expected by chance)",
                (unsigned long long)violations, (unsigned long long)paths, classes.c_str(), (unsigned long long)outside,
                per_pair.size(), 0.0027 * double(per_pair.size()))};
}

Outcome hitting() {
    const brownian::BrownianConfig cfg{.p = 2, .index_dim = 1, .state_dim = 1, .depth = 4, .seed = 103};
    bool ok = true;
    std::string detail;
    for (std::uint32_t m : {0u, 1u}) {
        const auto f = brownian::zero_grid_function(cfg, m);
        const auto exact = brownian::hitting_prob_exact(cfg, f, m);
        const auto formula = oracle::hitting_formula_1d(2, 1, m);
        const auto mc = brownian::hitting_prob_mc(cfg, f, m, 100000);
        const double target = formula.convert_to<double>();
        const bool row = exact.value == formula && mc.agrees_with(target);
        ok = ok && row;
        detail += fmt("m=%u exact=%s mc=%.5f+-%.5f; ", m, formula.str().c_str(), mc.mean, mc.std_error);
    }
    ok = ok && oracle::hitting_formula_1d(2, 1, 0) == oracle::Rational(1, 2) &&
         oracle::hitting_formula_1d(2, 1, 1) == oracle::Rational(1, 8);
    return {ok ? Verdict::pass : Verdict::fail, detail};
}

Outcome pair_law() {
    const brownian::BrownianConfig cfg{.p = 2, .index_dim = 1, .state_dim = 1, .depth = 6, .seed = 104};
    bool ok = true;
    std::string detail;
    for (std::int64_t k : {1, 2}) {
        const auto r = std::uint32_t(k + 2);
        const auto rep = brownian::pair_law_test(cfg, point(2, {std::int64_t(1) << k}, 7), r, 100000);
        ok = ok && rep.pass;
        detail += fmt("k=%lld r=%u chi2=%.1f dof=%.0f p=%.3f; ", (long long)k, r, rep.statistic, rep.dof, rep.p_value);
    }
    return {ok ? Verdict::pass : Verdict::fail, detail};
}

Outcome survival() {
    const auto sp = localtime::solve_h(2, 2, 1);
    const double h_oracle = oracle::survival_h(2, 2, 1);
    const auto mean_exact = localtime::offspring_mean_closed_form(2, 2, 1);
    harness::RunningMoments v3;
    const auto runs = parallel_map<double>(10000, [&](std::size_t i) {
        return double(localtime::gw_simulate(sp, 3, {105, i})[2]) / 8.0;
    });
    for (double x : runs) v3.push(x);
    const auto e = v3.estimate();
    const bool ok = std::abs(sp.h - 0.456311) <= 1e-6 && std::abs(sp.h - h_oracle) <= 1e-10 && sp.residual < 1e-12 &&
                    mean_exact == 2 && std::abs(sp.mean() - 2.0) < 1e-9 && e.agrees_with(1.0);
    return {ok ? Verdict::pass : Verdict::fail,
            fmt("h=%.9f (bisection oracle %.9f) residual=%.1e, mean Q=%s (numeric %.12f), E[V_3/8]=%.4f+-%.4f", sp.h,
                h_oracle, sp.residual, mean_exact.str().c_str(), sp.mean(), e.mean, e.std_error)};
}

Outcome candidates() {
    const brownian::BrownianConfig cfg{.p = 2, .index_dim = 2, .state_dim = 1, .depth = 7, .seed = 106};
    const std::uint32_t top = 6;
    struct PathResult {
        std::vector<double> counts;
        std::uint64_t nesting = 0;
        std::uint64_t scan_mismatch = 0;
        std::uint64_t dilation_increase = 0;
    };
    const auto results = parallel_map<PathResult>(10000, [&](std::size_t i) {
        const brownian::BrownianMotion bm(cfg.replica(i));
        const auto descent = localtime::candidate_descent(bm, top);
        PathResult r;
        // Full scans for a subset of paths: the level-6 grid has 4096 balls.
        const bool scan = i % 10 == 0;
        for (std::uint32_t n = 0; n <= top; ++n) {
            r.counts.push_back(double(descent[n].balls.size()));
            if (scan && localtime::candidates(bm, n).balls != descent[n].balls) ++r.scan_mismatch;
            if (n > 0)
                for (auto b : descent[n].balls)
                    if (!std::binary_search(descent[n - 1].balls.begin(), descent[n - 1].balls.end(), b / 4)) ++r.nesting;
        }
        for (std::uint32_t n = 0; n <= top; ++n) {
            double previous = std::numeric_limits<double>::infinity();
            for (std::uint32_t m = n; m <= top; ++m) {
                const double t = localtime::dilation_from_descent(cfg, descent, n, m).total();
                if (t > previous) ++r.dilation_increase;
                previous = t;
            }
        }
        return r;
    });
    std::vector<harness::RunningMoments> counts(top + 1);
    std::uint64_t nesting = 0, scans = 0, increases = 0;
    for (const auto& r : results) {
        for (std::uint32_t n = 0; n <= top; ++n) counts[n].push(r.counts[n]);
        nesting += r.nesting;
        scans += r.scan_mismatch;
        increases += r.dilation_increase;
    }
    bool ok = nesting == 0 && scans == 0 && increases == 0;
    std::string detail;
    for (std::uint32_t n = 0; n <= top; ++n) {
        const double target = std::pow(2.0, 2.0 * n - (n + 1.0));
        const auto e = counts[n].estimate();
        ok = ok && e.agrees_with(target);
        detail += fmt("n=%u %.3f+-%.3f (2^%d); ", n, e.mean, e.std_error, int(n) - 1);
    }
    detail += fmt("nesting violations=%llu, scan mismatches=%llu, dilation increases=%llu", (unsigned long long)nesting,
                  (unsigned long long)scans, (unsigned long long)increases);
    return {ok ? Verdict::pass : Verdict::fail, detail};
}

Outcome energy() {
    const brownian::BrownianConfig cfg{.p = 2, .index_dim = 2, .state_dim = 1, .depth = 6, .seed = 107};
    const potential::KernelParams kp{2, 2, 1};
    const auto mu = potential::AtomicMeasure::dirac(PadicVector::zero(2, 1, cfg.precision()));
    const double u0 = potential::kernel_u(kp, potential::Radius::origin()).to_double();
    bool targets_ok = std::abs(u0 - 0.75) < 1e-15, first_ok = true, vs_target = true, vs_pair_law = true;
    double previous = 0;
    std::string detail;
    for (std::uint32_t n : {3u, 4u, 5u}) {
        const double tn = static_cast<double>(potential::truncated_kernel_origin(kp, n));
        targets_ok = targets_ok && tn > previous && tn < u0 &&
                     std::abs(tn - oracle::truncated_origin_by_shells(2, 2, 1, n)) < 1e-12;
        previous = tn;
        const double pair_law_value = oracle::second_moment_delta0(2, 2, 1, n).convert_to<double>();
        const auto rep = potential::second_moment_check(cfg, mu, n, 20000);
        first_ok = first_ok && rep.first_moment.agrees_with(1.0);
        vs_target = vs_target && rep.second_moment.agrees_with(tn);
        vs_pair_law = vs_pair_law && rep.second_moment.agrees_with(pair_law_value);
        detail += fmt("n=%u target=%.6f mc=%.4f+-%.4f pair-law value=%.6f E[kappa]=%.4f+-%.4f; ", n, tn,
                      rep.second_moment.mean, rep.second_moment.std_error, pair_law_value, rep.first_moment.mean,
                      rep.first_moment.std_error);
    }
    if (targets_ok && first_ok && vs_target) return {Verdict::pass, detail};
    if (targets_ok && first_ok && vs_pair_law && !vs_target)
        return {Verdict::known_deviation,
                detail + "targets increase to u(0)=3/4 and E[kappa_n]=1 hold; MC matches the exact second moment, "
                         "which is p^{2d}=4 times the truncated target"};
    return {Verdict::fail, detail};
}

Outcome equilibrium() {
    const potential::KernelParams kp{2, 2, 1};
    const PadicVector two[] = {point(2, {0}, 8), point(2, {1}, 8)};
    const auto eq = potential::equilibrium(kp, two);
    const double u0 = oracle::Rational(3, 4).convert_to<double>(), u1 = oracle::kernel_u(2, 2, 1, 0);
    const auto [w, grid_min] = oracle::simplex_grid_min_2(u0, u1, u0, 1000);
    const auto single = potential::equilibrium(kp, std::span(two).first(1));
    bool polar_ok = true;
    for (potential::KernelParams pk : {potential::KernelParams{2, 1, 1}, {3, 1, 2}, {2, 2, 2}, {3, 1, 1}}) {
        const PadicVector one[] = {PadicVector::zero(pk.p, pk.d, 8)};
        polar_ok = polar_ok && potential::equilibrium(pk, one).capacity == 0.0;
    }
    const bool ok = eq.masses.size() == 2 && std::abs(eq.masses[0] - 0.5) <= 1e-6 && std::abs(eq.masses[1] - 0.5) <= 1e-6 &&
                    std::abs(eq.energy.value - 0.375) <= 1e-9 && std::abs(eq.masses[0] - w) <= 1e-3 &&
                    std::abs(eq.energy.value - grid_min) <= 1e-9 && std::abs(single.capacity - 4.0 / 3.0) < 1e-12 &&
                    polar_ok;
    return {ok ? Verdict::pass : Verdict::fail,
            fmt("masses (%.9f, %.9f), energy %.12f, grid argmin %.3f min %.12f, single capacity %.12f, polar capacities %s",
                eq.masses[0], eq.masses[1], eq.energy.value, w, grid_min, single.capacity, polar_ok ? "0" : "nonzero")};
}

Outcome occupation() {
    struct Case {
        brownian::BrownianConfig cfg;
        std::uint32_t n, r;
    };
    const Case cases[] = {{{.p = 2, .index_dim = 2, .state_dim = 1, .depth = 6, .seed = 108}, 6, 3},
                          {{.p = 2, .index_dim = 1, .state_dim = 1, .depth = 8, .seed = 109}, 8, 4},
                          {{.p = 3, .index_dim = 2, .state_dim = 2, .depth = 4, .seed = 110}, 4, 2}};
    double worst = 0;
    std::uint64_t paths = 0, empty = 0, negative = 0;
    for (const auto& c : cases) {
        const auto errs = parallel_map<std::array<double, 3>>(1000, [&](std::size_t i) {
            const auto f = localtime::local_time_field(brownian::BrownianMotion(c.cfg.replica(i)), c.n, c.r);
            const bool any = std::any_of(f.field.begin(), f.field.end(), [](double x) { return x > 0; });
            const bool neg = std::any_of(f.field.begin(), f.field.end(), [](double x) { return x < 0; });
            return std::array<double, 3>{std::abs(f.total() - 1.0), any ? 0.0 : 1.0, neg ? 1.0 : 0.0};
        });
        for (const auto& e : errs) {
            worst = std::max(worst, e[0]);
            empty += e[1] > 0;
            negative += e[2] > 0;
            ++paths;
        }
    }
    const bool ok = worst <= 1e-12 && empty == 0 && negative == 0;
    return {ok ? Verdict::pass : Verdict::fail,
            fmt("%llu paths, max |total - 1| = %.2e, empty fields %llu, negative cells %llu", (unsigned long long)paths,
                worst, (unsigned long long)empty, (unsigned long long)negative)};
}

// (8.3.1) and (8.3.2) read literally: |a_0| >= |a_1| >= |a_p| >= |a_{p^2}| >= ... and
// |a_{p^n}| = ... = |a_{p^{n+1}-1}|, over the listed terms.
bool vdp_conditions(const std::vector<std::int64_t>& v, std::uint32_t p) {
    std::vector<std::int64_t> heads{v[0]};
    for (std::uint64_t q = 1; q < v.size(); q *= p) heads.push_back(v[q]);
    for (std::size_t i = 1; i < heads.size(); ++i)
        if (heads[i] < heads[i - 1]) return false;
    for (std::size_t i = 1; i < v.size(); ++i) {
        std::uint64_t q = 1;
        while (q * p <= i) q *= p;
        if (v[i] != v[q]) return false;
    }
    return true;
}

Outcome stationarity() {
    harness::RunConfig rc{.experiment = "series-stationarity", .seed = 111};
    const auto res = harness::run(rc);
    const auto& r = res.report;
    const double tv = r["increasing_pair"]["tv"].get<double>();
    // X(0) = a_0 Z_0 lies in 2Z_2 and X(1) is uniform: first digits (1, 0) against (1/2, 1/2).
    const double exact_tv = 0.5;
    std::mt19937_64 gen(112);
    std::uint64_t disagreements = 0, stationary = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        series::SeriesSpec s{.basis = series::Basis::van_der_put, .p = 2, .M = 15};
        const bool structured = trial % 2 == 0;
        std::int64_t cur = std::int64_t(gen() % 3);
        s.valuations.push_back(cur);
        for (std::uint64_t n = 1; n <= s.M; ++n) {
            if (structured && (n & (n - 1)) == 0) cur += std::int64_t(gen() % 2);
            s.valuations.push_back(structured ? cur : std::int64_t(gen() % 4));
        }
        const bool fast = series::stationary_vdp(s);
        stationary += fast;
        disagreements += fast != vdp_conditions(s.valuations, 2);
    }
    const bool ok = res.pass && r["nonincreasing_norms"]["test"]["pass"] == true &&
                    r["increasing_pair"]["test"]["pass"] == false && std::abs(tv - exact_tv) <= 0.02 &&
                    std::abs(r["increasing_pair"]["exact_tv"].get<double>() - exact_tv) < 1e-12 && disagreements == 0;
    return {ok ? Verdict::pass : Verdict::fail,
            fmt("monotone spec p=%.3f; increasing pair p=%.2e tv=%.4f (exact 0.5); vdp predicate %llu/1000 disagreements "
                "(%llu stationary)",
                r["nonincreasing_norms"]["test"]["p_value"].get<double>(),
                r["increasing_pair"]["test"]["p_value"].get<double>(), tv, (unsigned long long)disagreements,
                (unsigned long long)stationary)};
}

Outcome identities_fuzz() {
    const auto results = identities::all(113, 100000);
    bool ok = true;
    std::string detail;
    for (const auto& r : results) {
        ok = ok && r.ok() && r.instances == 100000;
        detail += fmt("%s %llu/%llu violations, %llu library mismatches; ", r.name.c_str(),
                      (unsigned long long)r.violations, (unsigned long long)r.instances,
                      (unsigned long long)r.library_mismatches);
    }
    return {ok ? Verdict::pass : Verdict::fail, detail};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"Gaussian law exactness", gaussian_law},
        {"path module constraints", path_constraints},
        {"hitting probability", hitting},
        {"pair law", pair_law},
        {"survival and branching", survival},
        {"candidate counts", candidates},
        {"energy identity", energy},
        {"equilibrium optimizer", equilibrium},
        {"occupation identity", occupation},
        {"series stationarity", stationarity},
        {"ultrametric identity fuzzing", identities_fuzz},
    };
    int unexpected = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {Verdict::fail, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const char* word = o.verdict == Verdict::pass ? "PASS" : "FAIL";
        const char* tag = o.verdict == Verdict::known_deviation ? " [known deviation]" : "";
        std::printf("criterion %zu: %s%s %s (%.1fs): %s\n", i + 1, word, tag, criteria[i].first.c_str(), secs,
                    o.detail.c_str());
        std::fflush(stdout);
        unexpected += o.verdict == Verdict::fail;
    }
    return unexpected == 0 ? 0 : 1;
}
