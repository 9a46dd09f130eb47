#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "ultrabrown/brownian.hpp"
#include "ultrabrown/codec.hpp"
#include "ultrabrown/experiments.hpp"
#include "ultrabrown/localtime.hpp"
#include "ultrabrown/parallel.hpp"
#include "ultrabrown/potential.hpp"
#include "ultrabrown/series.hpp"

namespace {

using namespace ultrabrown;
using nlohmann::json;

struct Common {
    std::optional<std::uint32_t> p, N, d, depth;
    std::optional<std::uint64_t> reps;
    std::uint64_t seed = 1;
    double alpha = harness::kDefaultAlpha;
    std::string out;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--p", c.p, "prime");
    app->add_option("--N", c.N, "index dimension");
    app->add_option("--d", c.d, "state dimension");
    app->add_option("--depth", c.depth, "weight depth / precision");
    app->add_option("--reps", c.reps, "Monte Carlo replicas");
    app->add_option("--seed", c.seed, "root seed");
    app->add_option("--alpha", c.alpha, "test level");
    app->add_option("--out", c.out, "output path");
}

json read_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    return json::parse(f);
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
}

brownian::BrownianConfig bm_config(const Common& c, std::uint32_t N, std::uint32_t d, std::uint32_t depth) {
    brownian::BrownianConfig cfg;
    cfg.p = c.p.value_or(2);
    cfg.index_dim = c.N.value_or(N);
    cfg.state_dim = c.d.value_or(d);
    cfg.depth = c.depth.value_or(depth);
    cfg.seed = c.seed;
    return cfg;
}

int run_experiment(const std::string& id, const Common& c, const std::vector<std::uint32_t>& levels) {
    harness::RunConfig rc;
    rc.experiment = id;
    rc.p = c.p;
    rc.N = c.N;
    rc.d = c.d;
    rc.depth = c.depth;
    rc.reps = c.reps;
    rc.seed = c.seed;
    rc.alpha = c.alpha;
    rc.levels = levels;
    rc.out_dir = c.out;
    const auto result = harness::run(rc);
    std::cout << result.report.dump(2) << '\n';
    return result.pass ? 0 : 1;
}

int cmd_bm(const Common& c, std::uint32_t level) {
    const auto cfg = bm_config(c, 1, 1, std::max<std::uint32_t>(level, 6));
    const brownian::BrownianMotion bm(cfg);
    const auto grid = bm.grid(level);
    std::ostringstream csv;
    csv << "address,value\n";
    for (std::uint64_t b = 0; b < grid.size(); ++b)
        csv << grid.address(b).to_string() << ',' << grid.value_vector(b).to_digit_string() << '\n';
    emit(c.out, csv.str());
    return 0;
}

potential::KernelParams kernel(const Common& c) { return {c.p.value_or(2), c.N.value_or(2), c.d.value_or(1)}; }

int cmd_capacity(const Common& c, const std::string& points_file) {
    const json j = read_json(points_file);
    std::vector<padic::PadicVector> points;
    for (const auto& e : j.is_array() ? j : j.at("points"))
        points.push_back(e.is_object() ? e.at("point").get<padic::PadicVector>() : e.get<padic::PadicVector>());
    const auto r = potential::equilibrium(kernel(c), points);
    emit(c.out, json(r).dump(2) + "\n");
    return r.converged ? 0 : 1;
}

int cmd_energy(const Common& c, const std::string& measure_file, std::uint32_t n) {
    const auto mu = read_json(measure_file).get<potential::AtomicMeasure>();
    mu.validate();
    const auto kp = kernel(c);
    json out{{"energy", potential::energy(kp, mu)}, {"total_mass", mu.total_mass()}};
    if (n > 0) {
        out["n"] = n;
        out["truncated_energy"] = potential::truncated_energy(kp, mu, n);
        out["second_moment"] = potential::second_moment_exact(kp, mu, n);
    }
    emit(c.out, out.dump(2) + "\n");
    return 0;
}

int cmd_palm(const Common& c, const std::string& measure_file, std::uint32_t n, std::uint32_t k,
             std::uint32_t t0_valuation) {
    const auto cfg = bm_config(c, 2, 1, 6);
    const auto mu = measure_file.empty()
                        ? potential::AtomicMeasure::dirac(padic::PadicVector::zero(cfg.p, cfg.state_dim, cfg.precision()))
                        : read_json(measure_file).get<potential::AtomicMeasure>();
    std::vector<padic::PadicScalar> tc(cfg.index_dim, padic::PadicScalar::zero(cfg.p, cfg.precision()));
    tc[0] = padic::PadicScalar::from_digits(cfg.p, t0_valuation, {1}, cfg.precision());
    const auto F = potential::small_value_indicator(padic::PadicVector(tc), k);
    const auto r = potential::palm_check(cfg, mu, F, n, c.reps.value_or(10000));
    emit(c.out, json{{"lhs", r.lhs}, {"rhs", r.rhs}, {"diff", r.diff}, {"pass", r.pass}}.dump(2) + "\n");
    return r.pass ? 0 : 1;
}

int cmd_localtime(const Common& c, std::uint32_t n, std::uint32_t m, std::uint32_t r) {
    const auto cfg = bm_config(c, 2, 1, std::max(n, m) + 1);
    const std::uint64_t reps = c.reps.value_or(1000);
    const auto sp = localtime::solve_h(cfg.p, cfg.index_dim, cfg.state_dim);
    struct Row {
        double total = 0.0;
        std::vector<double> field;
    };
    auto rows = parallel_map<Row>(reps, [&](std::size_t i) {
        const brownian::BrownianMotion bm(cfg.replica(i));
        return Row{localtime::dilation_estimate(bm, n, m).total(), localtime::local_time_field(bm, n, r).field};
    });
    harness::RunningMoments total;
    std::vector<double> field(rows.front().field.size(), 0.0);
    for (const auto& row : rows) {
        total.push(row.total);
        for (std::size_t x = 0; x < field.size(); ++x) field[x] += row.field[x] / static_cast<double>(reps);
    }
    std::ostringstream csv;
    csv << "cell,mean_field\n";
    for (std::size_t x = 0; x < field.size(); ++x) csv << x << ',' << field[x] << '\n';
    emit(c.out, csv.str());
    std::cerr << json{{"h", sp.h}, {"n", n}, {"m", m}, {"dilation_total", total.estimate()}}.dump(2) << '\n';
    return 0;
}

int cmd_series(const Common& c, const std::string& basis, const std::string& norms_file, std::uint64_t M,
               const std::string& points_file, std::int64_t shift, std::uint32_t r) {
    series::SeriesSpec spec;
    spec.basis = basis == "vdp" ? series::Basis::van_der_put : series::Basis::mahler;
    spec.p = c.p.value_or(2);
    spec.M = M;
    spec.abs_prec = c.depth.value_or(8);
    spec.seed = c.seed;
    for (const auto& v : read_json(norms_file))
        spec.valuations.push_back(v.is_string() ? padic::kInfiniteValuation : v.get<std::int64_t>());
    const std::int64_t prec = spec.abs_prec + padic::factorial_valuation(spec.p, M) + 2;
    std::vector<padic::PadicScalar> points;
    for (const auto& t : read_json(points_file)) points.push_back(padic::PadicScalar::from_integer(spec.p, t.get<std::int64_t>(), prec));
    const auto s = padic::PadicScalar::from_integer(spec.p, shift, prec);
    const auto rep = series::stationarity_test(spec, s, points, r, c.reps.value_or(20000), c.alpha);
    const bool predicate = spec.basis == series::Basis::mahler ? series::stationary_mahler(spec) : series::stationary_vdp(spec);
    emit(c.out, json{{"predicate", predicate}, {"test", rep.test}, {"tv", rep.tv},
                     {"truncation_radius", spec.truncation_radius().to_double()}}
                        .dump(2) +
                    "\n");
    return predicate == rep.test.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and verification toolkit for Brownian motion over local fields"};
    app.require_subcommand(1);

    Common common;
    std::vector<std::uint32_t> levels;

    auto* bm = app.add_subcommand("bm", "dump the level-n grid restriction of one path");
    add_common(bm, common);
    std::uint32_t grid_level = 3;
    bm->add_option("--grid-level", grid_level, "grid level n");

    auto* cap = app.add_subcommand("capacity", "equilibrium measure and capacity of a point set");
    add_common(cap, common);
    std::string points_file;
    cap->add_option("--points", points_file, "JSON list of points")->required();

    auto* en = app.add_subcommand("energy", "energy of an atomic measure");
    add_common(en, common);
    std::string measure_file;
    std::uint32_t trunc_level = 0;
    en->add_option("--measure", measure_file, "JSON atom list")->required();
    en->add_option("--n", trunc_level, "also report level-n truncated quantities");

    auto* pa = app.add_subcommand("palm", "palm experiment, or a single check of F = 1{|f(t0)| <= p^-k}");
    add_common(pa, common);
    std::uint32_t palm_n = 3, palm_k = 3, t0_val = 1;
    auto* pa_measure = pa->add_option("--measure", measure_file, "JSON atom list (default: unit mass at 0)");
    auto* pa_n = pa->add_option("--n", palm_n, "approximation level");
    auto* pa_k = pa->add_option("--k", palm_k, "threshold exponent");
    auto* pa_t0 = pa->add_option("--t0-valuation", t0_val, "valuation of t0");

    auto* lt = app.add_subcommand("localtime", "dilation estimate and occupation field");
    add_common(lt, common);
    std::uint32_t lt_n = 4, lt_m = 6, lt_r = 1;
    lt->add_option("--n", lt_n, "level n");
    lt->add_option("--m", lt_m, "candidate level m");
    lt->add_option("--r", lt_r, "value resolution of the field");

    auto* se = app.add_subcommand("series", "stationarity test of a random series");
    add_common(se, common);
    std::string basis = "mahler", norms_file;
    std::uint64_t series_M = 7;
    std::int64_t series_shift = 1;
    std::uint32_t series_r = 1;
    se->add_option("--basis", basis, "mahler or vdp")->check(CLI::IsMember({"mahler", "vdp"}));
    se->add_option("--norms", norms_file, "JSON list of coefficient valuations")->required();
    se->add_option("--M", series_M, "truncation");
    se->add_option("--points", points_file, "JSON list of integer points")->required();
    se->add_option("--shift", series_shift, "integer shift");
    se->add_option("--r", series_r, "quotient level");

    auto* run = app.add_subcommand("run", "run a named experiment");
    add_common(run, common);
    std::string experiment;
    run->add_option("experiment", experiment, "experiment id")->required()->check(CLI::IsMember(harness::experiment_ids()));
    run->add_option("--levels", levels, "levels used by the experiment");

    std::vector<CLI::App*> direct;
    for (const auto& id : harness::experiment_ids()) {
        if (id == "palm") continue;
        auto* sub = app.add_subcommand(id, "run the " + id + " experiment");
        add_common(sub, common);
        sub->add_option("--levels", levels, "levels used by the experiment");
        direct.push_back(sub);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (*bm) return cmd_bm(common, grid_level);
        if (*cap) return cmd_capacity(common, points_file);
        if (*en) return cmd_energy(common, measure_file, trunc_level);
        if (*pa && !*pa_measure && !*pa_n && !*pa_k && !*pa_t0) return run_experiment("palm", common, levels);
        if (*pa) return cmd_palm(common, measure_file, palm_n, palm_k, t0_val);
        if (*lt) return cmd_localtime(common, lt_n, lt_m, lt_r);
        if (*se) return cmd_series(common, basis, norms_file, series_M, points_file, series_shift, series_r);
        if (*run) return run_experiment(experiment, common, levels);
        for (auto* sub : direct)
            if (*sub) return run_experiment(sub->get_name(), common, levels);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
