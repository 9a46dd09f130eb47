#include "ultrabrown/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "ultrabrown/brownian.hpp"
#include "ultrabrown/codec.hpp"
#include "ultrabrown/gaussian.hpp"
#include "ultrabrown/localtime.hpp"
#include "ultrabrown/parallel.hpp"
#include "ultrabrown/potential.hpp"
#include "ultrabrown/series.hpp"

namespace ultrabrown::harness {

namespace {

using padic::PadicScalar;
using padic::PadicVector;

std::string rational_text(const padic::Rational& r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

brownian::BrownianConfig bm_config(const RunConfig& rc, std::uint32_t p, std::uint32_t N, std::uint32_t d,
                                   std::uint32_t depth) {
    brownian::BrownianConfig c;
    c.p = rc.p.value_or(p);
    c.index_dim = rc.N.value_or(N);
    c.state_dim = rc.d.value_or(d);
    c.depth = rc.depth.value_or(depth);
    c.seed = rc.seed;
    return c;
}

std::vector<std::uint32_t> levels_or(const RunConfig& rc, std::vector<std::uint32_t> fallback) {
    return rc.levels.empty() ? fallback : rc.levels;
}

double ipow(double base, double exp) { return std::pow(base, exp); }

RunResult gaussian_uniformity(const RunConfig& rc) {
    gaussian::GaussianSpec spec;
    spec.p = rc.p.value_or(2);
    spec.abs_prec = rc.depth.value_or(8);
    const std::uint64_t reps = rc.reps.value_or(100000);
    const auto r = static_cast<std::uint32_t>(spec.abs_prec);
    const rng::RngKey root{rc.seed, 0};
    auto samples = parallel_map<PadicVector>(reps, [&](std::size_t i) { return gaussian::sample(spec, root.child(i)); });
    const auto counts = gaussian::quotient_histogram(samples, r);
    auto chi = chi_square_uniform(counts, rc.alpha, "gaussian_uniformity");
    chi.seed = rc.seed;
    RunResult out;
    out.pass = chi.pass;
    nlohmann::json chars = nlohmann::json::array();
    for (std::int64_t v : {0, -1}) {
        const auto xi = PadicScalar::from_digits(spec.p, v, {1}, spec.abs_prec);
        const double exact = gaussian::char_exact(spec, xi);
        const auto emp = gaussian::char_empirical(samples, xi);
        const double err = std::abs(emp - std::complex<double>(exact, 0.0));
        const bool ok = err <= 0.02;
        out.pass = out.pass && ok;
        chars.push_back({{"xi_norm", xi.norm().to_double()},
                         {"exact", exact},
                         {"empirical_re", emp.real()},
                         {"empirical_im", emp.imag()},
                         {"error", err},
                         {"pass", ok}});
    }
    out.report = {{"chi_square", chi}, {"characteristic", chars}};
    std::ostringstream csv;
    csv << "cell,count\n";
    for (std::size_t i = 0; i < counts.size(); ++i) csv << i << ',' << counts[i] << '\n';
    out.tables.emplace_back("counts.csv", csv.str());
    return out;
}

RunResult bm_hitting(const RunConfig& rc) {
    const auto cfg = bm_config(rc, 2, 1, 1, 6);
    const std::uint64_t reps = rc.reps.value_or(100000);
    RunResult out;
    out.pass = true;
    nlohmann::json rows = nlohmann::json::array();
    std::ostringstream csv;
    csv << "m,exact,mc_mean,mc_std_error,pass\n";
    for (std::uint32_t m : levels_or(rc, {0, 1})) {
        const auto f = brownian::zero_grid_function(cfg, m);
        const auto exact = brownian::hitting_prob_exact(cfg, f, m);
        const auto mc = brownian::hitting_prob_mc(cfg, f, m, reps);
        const double target = static_cast<double>(exact.value);
        const bool ok = mc.agrees_with(target, rc.sigmas);
        out.pass = out.pass && ok;
        rows.push_back({{"m", m}, {"exact", target}, {"exact_rational", rational_text(exact.value)}, {"mc", mc}, {"pass", ok}});
        csv << m << ',' << target << ',' << mc.mean << ',' << mc.std_error << ',' << ok << '\n';
    }
    out.report = {{"levels", rows}};
    out.tables.emplace_back("hitting.csv", csv.str());
    return out;
}

RunResult pair_law(const RunConfig& rc) {
    const auto cfg = bm_config(rc, 2, 1, 1, 6);
    const std::uint64_t reps = rc.reps.value_or(100000);
    const std::uint32_t r = 4;
    RunResult out;
    out.pass = true;
    nlohmann::json rows = nlohmann::json::array();
    for (std::uint32_t k : levels_or(rc, {1, 2})) {
        std::vector<PadicScalar> coords;
        for (std::uint32_t i = 0; i < cfg.index_dim; ++i)
            coords.push_back(i == 0 ? PadicScalar::from_digits(cfg.p, k, {1}, cfg.precision())
                                    : PadicScalar::zero(cfg.p, cfg.precision()));
        auto rep = brownian::pair_law_test(cfg, PadicVector(std::move(coords)), r, reps, rc.alpha);
        out.pass = out.pass && rep.pass;
        rows.push_back({{"k", k}, {"quotient_level", r}, {"test", rep}});
    }
    out.report = {{"levels", rows}};
    return out;
}

RunResult gw_localtime(const RunConfig& rc) {
    const auto cfg = bm_config(rc, 2, 2, 1, 7);
    const std::uint64_t reps = rc.reps.value_or(10000);
    RunResult out;
    const auto sp = localtime::solve_h(cfg.p, cfg.index_dim, cfg.state_dim);
    nlohmann::json report;
    report["h"] = sp.h;
    report["residual"] = sp.residual;
    report["q"] = sp.q;
    report["q_mean"] = sp.mean();
    report["q_mean_closed_form"] = static_cast<double>(localtime::offspring_mean_closed_form(cfg.p, cfg.index_dim, cfg.state_dim));
    bool pass = sp.residual < 1e-12;

    const std::uint32_t generations = 3;
    std::ostringstream gw_csv;
    gw_csv << "generation,mean_V,std_error\n";
    if (!sp.q.empty()) {
        auto runs = parallel_map<std::vector<std::uint64_t>>(reps, [&](std::size_t i) {
            return localtime::gw_simulate(sp, generations, rng::RngKey{rc.seed, 1}.child(i));
        });
        const double growth = ipow(cfg.p, static_cast<double>(cfg.index_dim) - cfg.state_dim);
        nlohmann::json gens = nlohmann::json::array();
        for (std::uint32_t g = 0; g < generations; ++g) {
            RunningMoments m;
            for (const auto& r : runs) m.push(static_cast<double>(r[g]) / ipow(growth, g + 1.0));
            const auto e = m.estimate();
            gens.push_back(e);
            gw_csv << g + 1 << ',' << e.mean << ',' << e.std_error << '\n';
            if (g + 1 == generations) pass = pass && e.agrees_with(1.0, rc.sigmas);
        }
        report["normalized_generations"] = gens;
    }

    const auto levels = levels_or(rc, {0, 1, 2, 3, 4, 5, 6});
    const std::uint32_t top = *std::max_element(levels.begin(), levels.end());
    struct PathStats {
        std::vector<double> counts;
        std::uint64_t nesting_violations = 0;
        std::uint64_t scan_mismatches = 0;
        std::uint64_t dilation_increases = 0;
        double occupation_error = 0.0;
    };
    auto paths = parallel_map<PathStats>(reps, [&](std::size_t i) {
        const brownian::BrownianMotion bm(cfg.replica(i));
        const auto descent = localtime::candidate_descent(bm, top);
        PathStats s;
        for (auto n : levels) s.counts.push_back(static_cast<double>(descent[n].balls.size()));
        for (std::uint32_t n = 1; n <= top; ++n)
            for (auto b : descent[n].balls)
                if (!std::binary_search(descent[n - 1].balls.begin(), descent[n - 1].balls.end(),
                                        b / cfg.branching()))
                    ++s.nesting_violations;
        if (i < 100)
            for (std::uint32_t n = 0; n <= top; ++n)
                if (localtime::candidates(bm, n).balls != descent[n].balls) ++s.scan_mismatches;
        for (std::uint32_t n = 0; n <= top; ++n) {
            double last = std::numeric_limits<double>::infinity();
            for (std::uint32_t m = n; m <= top; ++m) {
                const double t = localtime::dilation_from_descent(cfg, descent, n, m).total();
                if (t > last) ++s.dilation_increases;
                last = t;
            }
        }
        for (std::uint32_t r = 0; r <= std::min<std::uint32_t>(top, 3); ++r)
            s.occupation_error =
                std::max(s.occupation_error, std::abs(localtime::local_time_field(bm, top, r).total() - 1.0));
        return s;
    });
    nlohmann::json cand = nlohmann::json::array();
    std::ostringstream cand_csv;
    cand_csv << "level,mean,std_error,expected\n";
    std::uint64_t nesting = 0, mismatches = 0, increases = 0;
    double occupation = 0.0;
    for (const auto& s : paths) {
        nesting += s.nesting_violations;
        mismatches += s.scan_mismatches;
        increases += s.dilation_increases;
        occupation = std::max(occupation, s.occupation_error);
    }
    for (std::size_t j = 0; j < levels.size(); ++j) {
        RunningMoments m;
        for (const auto& s : paths) m.push(s.counts[j]);
        const auto e = m.estimate();
        const double n = levels[j];
        const double expected = ipow(cfg.p, cfg.index_dim * n - cfg.state_dim * (n + 1));
        const bool ok = e.agrees_with(expected, rc.sigmas);
        pass = pass && ok;
        cand.push_back({{"level", levels[j]}, {"estimate", e}, {"expected", expected}, {"pass", ok}});
        cand_csv << levels[j] << ',' << e.mean << ',' << e.std_error << ',' << expected << '\n';
    }
    pass = pass && nesting == 0 && mismatches == 0 && increases == 0 && occupation <= 1e-12;
    report["candidates"] = cand;
    report["nesting_violations"] = nesting;
    report["scan_mismatches"] = mismatches;
    report["dilation_increases"] = increases;
    report["occupation_max_error"] = occupation;
    out.pass = pass;
    out.report = report;
    out.tables.emplace_back("gw.csv", gw_csv.str());
    out.tables.emplace_back("candidates.csv", cand_csv.str());
    return out;
}

RunResult energy_second_moment(const RunConfig& rc) {
    const auto cfg = bm_config(rc, 2, 2, 1, 6);
    const std::uint64_t reps = rc.reps.value_or(20000);
    const potential::KernelParams kp{cfg.p, cfg.index_dim, cfg.state_dim};
    const auto mu = potential::AtomicMeasure::dirac(PadicVector::zero(cfg.p, cfg.state_dim, cfg.precision()));
    RunResult out;
    out.pass = true;
    nlohmann::json rows = nlohmann::json::array();
    std::ostringstream csv;
    csv << "n,truncated_kernel_origin,exact_second_moment,mc_second_moment,mc_std_error,mc_first_moment\n";
    double previous = -std::numeric_limits<double>::infinity();
    const auto u0 = potential::kernel_u(kp, potential::Radius::origin());
    for (std::uint32_t n : levels_or(rc, {3, 4, 5})) {
        const auto rep = potential::second_moment_check(cfg, mu, n, reps, rc.sigmas);
        const double tn = static_cast<double>(potential::truncated_kernel_origin(kp, n));
        const bool increasing = tn > previous && (u0.infinite || tn < u0.to_double());
        previous = tn;
        out.pass = out.pass && rep.pass && increasing;
        rows.push_back({{"n", n},
                        {"truncated_kernel_origin", tn},
                        {"exact_second_moment", rep.exact},
                        {"ratio", tn > 0 ? rep.exact / tn : 0.0},
                        {"mc_second_moment", rep.second_moment},
                        {"mc_first_moment", rep.first_moment},
                        {"pass", rep.pass && increasing}});
        csv << n << ',' << tn << ',' << rep.exact << ',' << rep.second_moment.mean << ','
            << rep.second_moment.std_error << ',' << rep.first_moment.mean << '\n';
    }
    const PadicVector x = PadicVector::zero(cfg.p, cfg.state_dim, cfg.precision());
    std::vector<PadicScalar> yc(cfg.state_dim, PadicScalar::zero(cfg.p, cfg.precision()));
    yc[0] = PadicScalar::one(cfg.p, cfg.precision());
    const PadicVector pair[] = {x, PadicVector(yc)};
    const auto eq2 = potential::equilibrium(kp, pair);
    const auto eq1 = potential::equilibrium(kp, std::span(pair).first(1));
    // Points at distance 1 have u = 0 between them, so the optimum splits the mass evenly.
    if (!u0.infinite) {
        const double half_energy = u0.to_double() / 2;
        out.pass = out.pass && eq2.masses.size() == 2 && std::abs(eq2.masses[0] - 0.5) <= 1e-6 &&
                   std::abs(eq2.masses[1] - 0.5) <= 1e-6 && !eq2.energy.infinite &&
                   std::abs(eq2.energy.value - half_energy) <= 1e-9 &&
                   std::abs(eq1.capacity - 1.0 / u0.to_double()) <= 1e-12;
    } else {
        out.pass = out.pass && eq1.capacity == 0.0 && eq2.capacity == 0.0;
    }
    out.report = {{"levels", rows},
                  {"u0", u0.infinite ? nlohmann::json("inf") : nlohmann::json(u0.to_double())},
                  {"equilibrium_pair", eq2},
                  {"equilibrium_single", eq1}};
    out.tables.emplace_back("energy.csv", csv.str());
    return out;
}

RunResult palm(const RunConfig& rc) {
    const auto cfg = bm_config(rc, 2, 2, 1, 6);
    const std::uint64_t reps = rc.reps.value_or(10000);
    const std::uint32_t n = levels_or(rc, {3}).front();
    const auto mu = potential::AtomicMeasure::dirac(PadicVector::zero(cfg.p, cfg.state_dim, cfg.precision()));
    std::vector<PadicScalar> tc(cfg.index_dim, PadicScalar::zero(cfg.p, cfg.precision()));
    tc[0] = PadicScalar::from_digits(cfg.p, 1, {1}, cfg.precision());
    const PadicVector t0(tc);
    struct Case {
        std::string name;
        potential::CylinderFunctional F;
    };
    const std::vector<Case> cases = {{"constant", potential::constant_functional(1.0)},
                                     {"small_value_1", potential::small_value_indicator(t0, 1)},
                                     {"small_value_3", potential::small_value_indicator(t0, 3)}};
    RunResult out;
    out.pass = true;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& c : cases) {
        const auto rep = potential::palm_check(cfg, mu, c.F, n, reps, rc.sigmas);
        out.pass = out.pass && rep.pass;
        rows.push_back({{"functional", c.name}, {"lhs", rep.lhs}, {"rhs", rep.rhs}, {"diff", rep.diff}, {"pass", rep.pass}});
    }
    out.report = {{"n", n}, {"cases", rows}};
    return out;
}

bool vdp_brute_force(const std::vector<std::int64_t>& v, std::uint32_t p) {
    // Literal reading: |a_0| >= |a_1| >= |a_p| >= ... and |a_{p^s}| = ... = |a_{p^{s+1}-1}|.
    std::vector<std::uint64_t> heads{0};
    for (std::uint64_t s = 1; s < v.size(); s *= p) heads.push_back(s);
    for (std::size_t i = 1; i < heads.size(); ++i)
        if (!(padic::Norm::of(p, v[heads[i - 1]]) >= padic::Norm::of(p, v[heads[i]]))) return false;
    for (std::size_t n = 1; n < v.size(); ++n) {
        std::uint64_t s = 1;
        while (s * p <= n) s *= p;
        if (v[n] != v[s]) return false;
    }
    return true;
}

RunResult series_stationarity(const RunConfig& rc) {
    const std::uint32_t p = rc.p.value_or(2);
    const std::uint64_t reps = rc.reps.value_or(20000);
    const std::int64_t m = rc.depth.value_or(8);
    RunResult out;
    series::SeriesSpec good;
    good.basis = series::Basis::mahler;
    good.p = p;
    good.M = 7;
    good.abs_prec = m;
    good.seed = rc.seed;
    for (std::int64_t n = 0; n <= 7; ++n) good.valuations.push_back(n);
    const std::int64_t point_prec = m + padic::factorial_valuation(p, good.M) + 2;
    std::vector<PadicScalar> pts;
    for (int t = 0; t < 3; ++t) pts.push_back(PadicScalar::from_integer(p, t, point_prec));
    const auto one = PadicScalar::from_integer(p, 1, point_prec);
    const auto pass_rep = series::stationarity_test(good, one, pts, 2, reps, rc.alpha);

    series::SeriesSpec bad = good;
    bad.valuations = {1, 0};
    bad.M = 1;
    const PadicScalar zero[] = {PadicScalar::zero(p, point_prec)};
    const PadicScalar moved[] = {one};
    const auto reject_rep = series::stationarity_test(bad, one, zero, 1, reps, rc.alpha);
    const double exact_tv = tv_distance(series::exact_quotient_law(bad, zero, 1), series::exact_quotient_law(bad, moved, 1));

    rng::KeyedStream stream(rng::RngKey{rc.seed, 7});
    std::uint64_t disagreements = 0, stationary_count = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        series::SeriesSpec s;
        s.basis = series::Basis::van_der_put;
        s.p = p;
        s.M = 15;
        // Half the draws are block-constant and monotone, half arbitrary.
        std::int64_t cur = static_cast<std::int64_t>(stream.uniform_below(3));
        s.valuations.push_back(cur);
        const bool structured = stream.uniform_below(2) == 0;
        for (std::uint64_t n = 1; n <= s.M; ++n) {
            if (structured) {
                std::uint64_t k = n;
                while (k % p == 0) k /= p;
                if (k == 1) cur += static_cast<std::int64_t>(stream.uniform_below(2));
                s.valuations.push_back(cur);
            } else {
                s.valuations.push_back(static_cast<std::int64_t>(stream.uniform_below(4)));
            }
        }
        const bool fast = series::stationary_vdp(s);
        stationary_count += fast;
        if (fast != vdp_brute_force(s.valuations, p)) ++disagreements;
    }
    out.pass = pass_rep.test.pass && !reject_rep.test.pass && std::abs(reject_rep.tv - 0.5) <= 0.02 &&
               std::abs(exact_tv - 0.5) < 1e-12 && disagreements == 0;
    out.report = {{"nonincreasing_norms", {{"test", pass_rep.test}, {"tv", pass_rep.tv}}},
                  {"increasing_pair", {{"test", reject_rep.test}, {"tv", reject_rep.tv}, {"exact_tv", exact_tv}}},
                  {"vdp_predicate", {{"trials", 1000}, {"stationary", stationary_count}, {"disagreements", disagreements}}}};
    std::ostringstream csv;
    csv << "case,cell,original,shifted\n";
    for (const auto* rep : {&pass_rep, &reject_rep}) {
        const char* name = rep == &pass_rep ? "nonincreasing_norms" : "increasing_pair";
        for (std::size_t c = 0; c < rep->original.size(); ++c)
            csv << name << ',' << c << ',' << rep->original[c] << ',' << rep->shifted[c] << '\n';
    }
    out.tables.emplace_back("stationarity.csv", csv.str());
    return out;
}

const std::map<std::string, std::function<RunResult(const RunConfig&)>>& registry() {
    static const std::map<std::string, std::function<RunResult(const RunConfig&)>> r = {
        {"gaussian-uniformity", gaussian_uniformity},
        {"bm-hitting", bm_hitting},
        {"pair-law", pair_law},
        {"gw-localtime", gw_localtime},
        {"energy-second-moment", energy_second_moment},
        {"palm", palm},
        {"series-stationarity", series_stationarity},
    };
    return r;
}

}  // namespace

const std::vector<std::string>& experiment_ids() {
    static const std::vector<std::string> ids = [] {
        std::vector<std::string> v;
        for (const auto& [k, f] : registry()) v.push_back(k);
        return v;
    }();
    return ids;
}

RunResult run(const RunConfig& cfg) {
    const auto it = registry().find(cfg.experiment);
    if (it == registry().end()) throw std::invalid_argument("unknown experiment: " + cfg.experiment);
    RunResult out = it->second(cfg);
    out.report["experiment"] = cfg.experiment;
    out.report["seed"] = cfg.seed;
    out.report["alpha"] = cfg.alpha;
    out.report["pass"] = out.pass;
    if (!cfg.out_dir.empty()) write_artifacts(out, cfg.out_dir);
    return out;
}

void write_artifacts(const RunResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
        f << text;
        if (!f) throw std::runtime_error("write failed for " + (dir / name).string());
    };
    write("report.json", result.report.dump(2) + "\n");
    for (const auto& [name, text] : result.tables) write(name, text);
}

}  // namespace ultrabrown::harness
