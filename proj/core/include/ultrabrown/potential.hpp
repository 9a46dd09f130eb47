#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "ultrabrown/brownian.hpp"
#include "ultrabrown/padic.hpp"
#include "ultrabrown/stats.hpp"
#include "ultrabrown/tree.hpp"

namespace ultrabrown::potential {

using brownian::BrownianConfig;
using brownian::BrownianMotion;
using padic::BallAddress;
using padic::PadicVector;
using padic::Rational;

struct KernelParams {
    std::uint32_t p = 2;
    std::uint32_t N = 2;
    std::uint32_t d = 1;
};

/// r = p^{-k}, or r = 0.
struct Radius {
    bool zero = false;
    std::int64_t k = 0;

    static Radius of(std::int64_t k) { return {false, k}; }
    static Radius origin() { return {true, 0}; }
};

/// Exact value in [0, +inf].
struct ExactValue {
    Rational value = 0;
    bool infinite = false;

    double to_double() const;
    static ExactValue inf() { return {Rational(0), true}; }
};

/// Value in [0, +inf] with the infinity flag kept out of the arithmetic.
struct ExtendedReal {
    double value = 0.0;
    bool infinite = false;

    static ExtendedReal inf() { return {0.0, true}; }
    friend bool operator<(const ExtendedReal& a, const ExtendedReal& b) {
        if (a.infinite) return false;
        return b.infinite || a.value < b.value;
    }
};

void to_json(nlohmann::json& j, const ExtendedReal& x);

/// u(r): (1 - p^{-N}) p^{-d} log_p(1/r) when N = d, otherwise
/// (1 - p^{-N}) p^{-d} (r^{N-d} - 1) / (p^{d-N} - 1); u(0) = lim_{r->0} u(r).
ExactValue kernel_u(const KernelParams& kp, Radius r);
double kernel_u_double(const KernelParams& kp, Radius r);

/// (phi_n * v)(0) = p^{dn} \int_{|y| <= p^{-n}} u(|y|) dy, in closed form.
Rational truncated_kernel_origin(const KernelParams& kp, std::uint32_t n);
/// (phi_n * v)(z): u(|z|) when |z| > p^{-n}, else its value at 0.
ExactValue truncated_kernel(const KernelParams& kp, std::uint32_t n, Radius r);

/// Finite measure with point masses on D^d.
struct AtomicMeasure {
    struct Atom {
        PadicVector point;
        double mass = 0.0;
    };
    std::vector<Atom> atoms;

    double total_mass() const;
    static AtomicMeasure dirac(const PadicVector& x, double mass = 1.0) { return {{{x, mass}}}; }
    AtomicMeasure scaled(double c) const;
    void validate() const;
};

void to_json(nlohmann::json& j, const AtomicMeasure& m);
void from_json(const nlohmann::json& j, AtomicMeasure& m);

/// |x - y| as a Radius; zero when the points agree to their common precision.
Radius distance(const PadicVector& x, const PadicVector& y);

/// \iint u(|x - y|) mu(dx) mu(dy).
ExtendedReal energy(const KernelParams& kp, const AtomicMeasure& mu);
/// The same double sum with the level-n truncated kernel phi_n * v.
double truncated_energy(const KernelParams& kp, const AtomicMeasure& mu, std::uint32_t n);

/// \int u(|x - y|) mu(dy).
ExtendedReal potential_at(const KernelParams& kp, const AtomicMeasure& mu, const PadicVector& x);

struct EquilibriumResult {
    std::vector<double> masses;
    ExtendedReal energy;
    /// 1 / energy, 0 when the energy is infinite.
    double capacity = 0.0;
    std::uint64_t iterations = 0;
    bool converged = false;
};

void to_json(nlohmann::json& j, const EquilibriumResult& r);

struct EquilibriumOptions {
    double tolerance = 1e-10;
    std::uint64_t max_iterations = 100000;
};

/// Minimizes the energy over probability measures carried by the points.
/// Projected gradient on the simplex from the barycenter.
EquilibriumResult equilibrium(const KernelParams& kp, std::span<const PadicVector> points,
                              EquilibriumOptions opts = {});

/// Euclidean projection onto the probability simplex.
std::vector<double> project_simplex(std::span<const double> v);

/// (phi_n * mu)(x) = p^{dn} mu(ball(x, p^{-n})) as a lookup on x mod p^n.
class SmoothedMeasure {
public:
    SmoothedMeasure(const AtomicMeasure& mu, std::uint32_t p, std::uint32_t d, std::uint32_t n);
    double operator()(std::span<const std::uint64_t> x_residues, const padic::ResidueRing& ring) const;
    std::uint32_t level() const { return n_; }

private:
    std::uint32_t p_;
    std::uint32_t d_;
    std::uint32_t n_;
    double scale_;
    std::vector<std::pair<std::vector<std::uint64_t>, double>> cells_;
};

/// kappa_n of every level-n ball on one path: p^{-Nn} (phi_n * mu)(A_C), in index order.
std::vector<double> kappa_densities(const BrownianMotion& bm, const AtomicMeasure& mu, std::uint32_t n);

/// kappa_n(B) for B a union of balls of level <= n.
double kappa_n(const BrownianMotion& bm, const AtomicMeasure& mu, std::uint32_t n,
               std::span<const BallAddress> region);

/// Indicator over level-n ball indices of a union of balls of level <= n.
std::vector<std::uint8_t> region_mask(const BrownianConfig& cfg, std::uint32_t n,
                                      std::span<const BallAddress> region);

struct MartingaleReport {
    /// E[(kappa_{n+1}(B) - kappa_n(B)) g] for g = 1, kappa_n(B), 1{kappa_n(B) > 0}.
    harness::McEstimate increment;
    harness::McEstimate weighted_by_kappa;
    harness::McEstimate weighted_by_support;
    bool pass = false;
};

MartingaleReport martingale_check(const BrownianConfig& cfg, const AtomicMeasure& mu, std::uint32_t n,
                                  std::span<const BallAddress> region, std::uint64_t reps,
                                  double sigmas = harness::kDefaultSigmas);

/// E[kappa_n(D^N)^2] from the law of (X_s, X_t): for |s-t| = p^{-j}, X_s is
/// uniform on D^d and X_t - X_s uniform on p^{j+1} D^d, independently.
double second_moment_exact(const KernelParams& kp, const AtomicMeasure& mu, std::uint32_t n);

struct SecondMomentReport {
    harness::McEstimate first_moment;
    harness::McEstimate second_moment;
    /// The target of the Monte Carlo estimate.
    double exact = 0.0;
    /// \iint (phi_n * v)(x - y) mu mu with the kernel u as normalized above.
    double truncated_energy = 0.0;
    bool pass = false;
};

SecondMomentReport second_moment_check(const BrownianConfig& cfg, const AtomicMeasure& mu, std::uint32_t n,
                                       std::uint64_t reps, double sigmas = harness::kDefaultSigmas);

/// Bounded functional of a path through its values at finitely many points,
/// each reduced mod p^level. values holds d residues per point.
struct CylinderFunctional {
    std::vector<PadicVector> points;
    std::uint32_t level = 1;
    std::function<double(std::span<const std::uint64_t> values, const padic::ResidueRing& ring)> fn;
};

/// F(f) = 1{|f(t0)| <= p^{-k}}.
CylinderFunctional small_value_indicator(const PadicVector& t0, std::uint32_t k);
CylinderFunctional constant_functional(double c);

struct PalmReport {
    harness::McEstimate lhs;
    harness::McEstimate rhs;
    double diff = 0.0;
    bool pass = false;
};

/// E[\int F(X o theta_t) kappa_n(dt)] against \int E[F(x + U_n + W)] mu(dx),
/// with U_n uniform on p^n D^d and W the path without the weights of balls containing 0.
PalmReport palm_check(const BrownianConfig& cfg, const AtomicMeasure& mu, const CylinderFunctional& F,
                      std::uint32_t n, std::uint64_t reps, double sigmas = harness::kDefaultSigmas);

struct SupReport {
    ExtendedReal sup_probes;
    ExtendedReal sup_support;
    bool attained_on_support = false;
};

/// Compares the largest potential over the probes with the largest over the atoms.
SupReport potential_sup_check(const KernelParams& kp, const AtomicMeasure& mu, std::span<const PadicVector> probes);

}  // namespace ultrabrown::potential
