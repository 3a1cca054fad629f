#pragma once

// Classical equilibrium boxes and the fluctuation identities measured on
// them: exit-point variance formula, stationarity of the residual, CLT off
// the characteristic, cube-root exponents, and shape-constant estimates.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "lpp.hpp"
#include "parallel.hpp"
#include "points.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace hammersley {

// Classical box [0, width] x [0, t]: Poisson(lambda) sources on the south
// side, Poisson(1/lambda) sinks on the west side, unit points inside.
struct EquilibriumBox {
    SourcesSinks ss;
    WeightedPointSet points;
    double width = 0, t = 0;
};

inline EquilibriumBox equilibrium_box(double lambda, double width, double t, std::uint64_t seed,
                                      const WeightDistribution& dist = WeightDistribution::dirac1()) {
    if (dist.kind() != WeightDistribution::Kind::Dirac)
        throw std::domain_error("equilibrium boxes exist for unit weights only");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be positive");
    if (!(width >= 0.0) || !(t >= 0.0)) throw std::invalid_argument("box sides must be nonnegative");
    EquilibriumBox b;
    b.width = width;
    b.t = t;
    if (width > 0.0)
        b.ss.sources = sample_atomic_poisson(0.0, width, lambda, dist, derive_seed(seed, stream::sources));
    if (t > 0.0) b.ss.sinks = sample_atomic_poisson(0.0, t, 1.0 / lambda, dist, derive_seed(seed, stream::sinks));
    const Rect r{0.0, std::max(width, 1.0), 0.0, std::max(t, 1.0)};
    b.points = width > 0.0 && t > 0.0 ? sample_point_set({0.0, width, 0.0, t}, 1.0, dist,
                                                         derive_seed(seed, stream::points))
                                      : make_point_set(r, {});
    return b;
}

struct EquilibriumSample {
    double value = 0;      // L_lambda(x, t)
    double exit = 0;       // Z: source position, or -(sink time)
    double z_plus = 0;     // exit along the sources, 0 through a sink
    double sink_exit = 0;  // exit along the sinks, 0 through a source
    double nu_x = 0;       // nu_lambda((0, x])
};

inline EquilibriumSample sample_from_box(const EquilibriumBox& b, double x, double t) {
    PassageResult r = sources_sinks_passage(b.ss, b.points, x, t, false);
    EquilibriumSample s;
    s.value = r.value;
    s.exit = r.exit.value_or(0.0);
    s.z_plus = std::max(0.0, s.exit);
    s.sink_exit = std::max(0.0, -s.exit);
    s.nu_x = b.ss.sources.cumulative(x);
    return s;
}

inline EquilibriumSample equilibrium_passage(double lambda, double x, double t, std::uint64_t seed,
                                             const WeightDistribution& dist = WeightDistribution::dirac1()) {
    return sample_from_box(equilibrium_box(lambda, x, t, seed, dist), x, t);
}

inline std::uint64_t replica_seed(std::uint64_t seed, std::size_t i) { return derive_seed(seed, stream::replica, i); }

inline std::vector<EquilibriumSample> equilibrium_samples(double lambda, double x, double t, std::size_t replicas,
                                                          std::uint64_t seed, unsigned threads) {
    return parallel_map(replicas, threads,
                        [&](std::size_t i) { return equilibrium_passage(lambda, x, t, replica_seed(seed, i)); });
}

// Bonferroni level for k simultaneous checks at joint confidence c.
inline double per_check_confidence(double joint, std::size_t k) { return 1.0 - (1.0 - joint) / static_cast<double>(k); }

struct ExitIdentityReport {
    double lambda = 0, x = 0, t = 0;
    std::size_t replicas = 0;
    MomentSummary L, z_plus, nu_x;
    double var_L = 0, predicted_var = 0, cov_nu_L = 0, predicted_cov = 0;
    IdentityCheck variance;    // Var L - 2 lambda E Z+ against t/lambda - lambda x
    IdentityCheck covariance;  // Cov(nu(x), L) - lambda E Z+ against 0
    bool holds() const { return variance.holds() && covariance.holds(); }
};

inline ExitIdentityReport exit_identity_report(double lambda, double x, double t, std::size_t replicas,
                                               std::uint64_t seed, unsigned threads = 1) {
    if (!(x >= 0.0) || !(t >= 0.0)) throw std::invalid_argument("x and t must be nonnegative");
    if (replicas < 3) throw std::invalid_argument("need at least 3 replicas");
    auto s = equilibrium_samples(lambda, x, t, replicas, seed, threads);
    std::vector<double> L, z, nu;
    for (const auto& e : s) {
        L.push_back(e.value);
        z.push_back(e.z_plus);
        nu.push_back(e.nu_x);
    }
    ExitIdentityReport r;
    r.lambda = lambda;
    r.x = x;
    r.t = t;
    r.replicas = replicas;
    r.L = summarize(L, nu);
    r.z_plus = summarize(z);
    r.nu_x = summarize(nu);
    r.var_L = r.L.variance;
    r.predicted_var = t / lambda - lambda * x + 2.0 * lambda * r.z_plus.mean;
    r.cov_nu_L = *r.L.covariance;
    r.predicted_cov = lambda * r.z_plus.mean;
    const double c = per_check_confidence(0.95, 2);
    r.variance = variance_identity(L, z, 2.0 * lambda, t / lambda - lambda * x, c);
    r.covariance = covariance_identity(nu, L, z, lambda, 0.0, c);
    return r;
}

struct StationarityReport {
    double lambda = 0, a = 0, t = 0, b = 0, psi = 0;
    std::size_t replicas = 0;
    MomentSummary residual;        // L(at, t) - nu(b) - psi t
    double mean_square = 0;        // E residual^2
    double var_characteristic = 0; // Var L(phi t, t), same boxes
    IdentityCheck identity;        // mean_square - var_characteristic against 0
    double ratio_to_t = 0;         // mean_square / t
};

// Residual of L_lambda(at, t) against the characteristic prediction from the
// source axis, b = at - phi t. Boxes start at min(0, b); increments are read
// relative to the box origin, which is exact in equilibrium.
inline StationarityReport stationarity_residual(double lambda, double a, double t, std::size_t replicas,
                                                std::uint64_t seed, unsigned threads = 1) {
    if (!(lambda > 0.0) || !(a > 0.0) || !(t > 0.0)) throw std::invalid_argument("lambda, a, t must be positive");
    if (replicas < 3) throw std::invalid_argument("need at least 3 replicas");
    const double phi = 1.0 / (lambda * lambda), psi = 2.0 / lambda;
    const double x = a * t, b = x - phi * t;
    const double c = std::min(0.0, b);
    const double width = std::max(x, phi * t) - c;
    struct Pair {
        double residual, characteristic;
    };
    auto one = [&](std::size_t i) {
        const EquilibriumBox box = equilibrium_box(lambda, width, t, replica_seed(seed, i));
        auto G = [&](double u, double s) { return sources_sinks_passage(box.ss, box.points, u, s, false).value; };
        const double origin = box.ss.sources.cumulative(-c);
        return Pair{G(x - c, t) - box.ss.sources.cumulative(b - c) - psi * t, G(phi * t - c, t) - origin};
    };
    auto s = parallel_map(replicas, threads, one);
    std::vector<double> res, ch, sq;
    for (const auto& p : s) {
        res.push_back(p.residual);
        ch.push_back(p.characteristic);
        sq.push_back(p.residual * p.residual);
    }
    StationarityReport r;
    r.lambda = lambda;
    r.a = a;
    r.t = t;
    r.b = b;
    r.psi = psi;
    r.replicas = replicas;
    r.residual = summarize(res);
    r.mean_square = mean_of(sq);
    r.var_characteristic = variance_of(ch);
    const double mc = mean_of(ch);
    std::vector<double> psi_i(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) psi_i[i] = sq[i] - (ch[i] - mc) * (ch[i] - mc);
    r.identity.estimate = r.mean_square - r.var_characteristic;
    r.identity.target = 0.0;
    r.identity.halfwidth = z95 * std::sqrt(variance_of(psi_i) / static_cast<double>(s.size()));
    r.ratio_to_t = r.mean_square / t;
    return r;
}

struct CltReport {
    double lambda = 0, a = 0, t = 0, sigma2 = 0, mean_target = 0;
    std::size_t replicas = 0;
    MomentSummary L;
    double variance_ratio = 0;  // Var L / (sigma^2 t)
    TestResult ks;              // standardized L against N(0, 1)
};

// L_lambda(at, t) off the characteristic a = 1/lambda^2.
inline CltReport clt_check(double lambda, double a, double t, std::size_t replicas, std::uint64_t seed,
                           unsigned threads = 1) {
    if (!(lambda > 0.0) || !(a > 0.0) || !(t > 0.0)) throw std::invalid_argument("lambda, a, t must be positive");
    const double sigma2 = std::abs(a * lambda - 1.0 / lambda);
    if (!(sigma2 > 1e-12)) throw std::invalid_argument("a = 1/lambda^2 is the characteristic direction");
    auto s = equilibrium_samples(lambda, a * t, t, replicas, seed, threads);
    CltReport r;
    r.lambda = lambda;
    r.a = a;
    r.t = t;
    r.sigma2 = sigma2;
    r.mean_target = lambda * a * t + t / lambda;
    r.replicas = replicas;
    std::vector<double> L, std_L;
    for (const auto& e : s) {
        L.push_back(e.value);
        std_L.push_back((e.value - r.mean_target) / std::sqrt(sigma2 * t));
    }
    r.L = summarize(L);
    r.variance_ratio = r.L.variance / (sigma2 * t);
    r.ks = ks_test(std_L, NormalRef{0.0, 1.0});
    return r;
}

struct BusemannCltReport {
    double beta = 0, t = 0, target = 0;
    MomentSummary B;
    double slope = 0;  // Var B / t
};

// B(beta, t) = L_1(t cos beta, t sin beta), beta in [0, pi/2].
inline BusemannCltReport busemann_clt(double beta, double t, std::size_t replicas, std::uint64_t seed,
                                      unsigned threads = 1) {
    if (!(beta >= 0.0 && beta <= std::numbers::pi / 2) || !(t > 0.0))
        throw std::invalid_argument("need beta in [0, pi/2] and t > 0");
    const double x = t * std::cos(beta), s = t * std::sin(beta);
    auto e = equilibrium_samples(1.0, x, s, replicas, seed, threads);
    std::vector<double> B;
    for (const auto& v : e) B.push_back(v.value);
    BusemannCltReport r;
    r.beta = beta;
    r.t = t;
    r.target = std::abs(std::cos(beta) - std::sin(beta));
    r.B = summarize(B);
    r.slope = r.B.variance / t;
    return r;
}

inline constexpr std::array<double, 3> tail_levels{1.0, 2.0, 4.0};

struct CubeRootPoint {
    double t = 0;
    MomentSummary L, z_plus;
    IdentityCheck identity;         // Var L - 2 E Z+ against 0
    std::array<double, 3> tail{};   // P(Z > r t^{2/3}), r in tail_levels
};

struct CubeRootReport {
    std::vector<CubeRootPoint> points;
    ExponentFit z_fit, var_fit;
};

inline CubeRootReport cube_root_fit(const std::vector<double>& t_grid, std::size_t replicas, std::uint64_t seed,
                                    unsigned threads = 1) {
    if (t_grid.size() < 4) throw std::invalid_argument("cube-root fit needs at least 4 grid points");
    for (std::size_t i = 0; i < t_grid.size(); ++i)
        if (!(t_grid[i] > 0.0) || (i && !(t_grid[i] > t_grid[i - 1])))
            throw std::invalid_argument("t grid must be positive and increasing");
    CubeRootReport r;
    std::vector<std::pair<double, double>> zf, vf;
    const double conf = per_check_confidence(0.95, t_grid.size());
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        const double t = t_grid[k];
        auto s = equilibrium_samples(1.0, t, t, replicas, derive_seed(seed, stream::auxiliary, k), threads);
        std::vector<double> L, z;
        CubeRootPoint p;
        p.t = t;
        const double scale = std::pow(t, 2.0 / 3.0);
        for (const auto& e : s) {
            L.push_back(e.value);
            z.push_back(e.z_plus);
            for (std::size_t j = 0; j < tail_levels.size(); ++j) p.tail[j] += e.exit > tail_levels[j] * scale;
        }
        for (auto& v : p.tail) v /= static_cast<double>(s.size());
        p.L = summarize(L);
        p.z_plus = summarize(z);
        p.identity = variance_identity(L, z, 2.0, 0.0, conf);
        zf.push_back({t, p.z_plus.mean});
        vf.push_back({t, p.L.variance});
        r.points.push_back(p);
    }
    r.z_fit = loglog_fit(zf);
    r.var_fit = loglog_fit(vf);
    return r;
}

inline constexpr std::array<double, 3> coupled_levels{2.0, 4.0, 8.0};

struct StationaryComparisonPoint {
    double t = 0;
    MomentSummary abs_dev;                // |L(t,t) - 2t| / t^{1/3}
    std::array<double, 3> coupled_tail{}; // P(L1 - L >= r t^{1/3}), r in coupled_levels
    std::size_t order_violations = 0;     // replicas with L1 < L
};

// Point-to-point L(0, (t, t)) and L_1(t, t) on shared interior points.
inline std::vector<StationaryComparisonPoint> compare_L_stationary(const std::vector<double>& t_grid,
                                                                   std::size_t replicas, std::uint64_t seed,
                                                                   unsigned threads = 1) {
    std::vector<StationaryComparisonPoint> out;
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        const double t = t_grid[k];
        if (!(t > 0.0)) throw std::invalid_argument("t must be positive");
        struct Pair {
            double L, L1;
        };
        auto s = parallel_map(replicas, threads, [&](std::size_t i) {
            const EquilibriumBox b =
                equilibrium_box(1.0, t, t, replica_seed(derive_seed(seed, stream::auxiliary, k), i));
            return Pair{last_passage(b.points, {0.0, 0.0}, {t, t}),
                        sources_sinks_passage(b.ss, b.points, t, t, false).value};
        });
        StationaryComparisonPoint p;
        p.t = t;
        const double scale = std::cbrt(t);
        std::vector<double> dev;
        for (const auto& v : s) {
            dev.push_back(std::abs(v.L - 2.0 * t) / scale);
            p.order_violations += v.L1 < v.L;
            for (std::size_t j = 0; j < coupled_levels.size(); ++j)
                p.coupled_tail[j] += v.L1 - v.L >= coupled_levels[j] * scale;
        }
        for (auto& v : p.coupled_tail) v /= static_cast<double>(s.size());
        p.abs_dev = summarize(dev);
        out.push_back(p);
    }
    return out;
}

struct ShapePoint {
    double t = 0;
    MomentSummary ratio;  // L(0, (t, t)) / t
};

struct ShapeReport {
    std::vector<ShapePoint> points;
    double gamma_hat = 0, ci95 = 0;  // at the largest t
    double bound = 0;                // 2 * integral of sqrt(1 - F)
    bool monotone = true;            // nondecreasing in t within CI
};

inline ShapeReport shape_estimate(const WeightDistribution& dist, const std::vector<double>& t_grid,
                                  std::size_t replicas, std::uint64_t seed, unsigned threads = 1) {
    if (t_grid.empty()) throw std::invalid_argument("empty t grid");
    ShapeReport r;
    r.bound = 2.0 * sqrt_tail_integral(dist);
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        const double t = t_grid[k];
        if (!(t > 0.0) || (k && !(t > t_grid[k - 1]))) throw std::invalid_argument("t grid must be increasing");
        auto v = parallel_map(replicas, threads, [&](std::size_t i) {
            auto pts = sample_point_set({0.0, t, 0.0, t}, 1.0, dist,
                                        replica_seed(derive_seed(seed, stream::auxiliary, k), i));
            return last_passage(pts, {0.0, 0.0}, {t, t}) / t;
        });
        r.points.push_back({t, summarize(v)});
    }
    for (std::size_t k = 1; k < r.points.size(); ++k) {
        const auto& p = r.points[k - 1].ratio;
        const auto& q = r.points[k].ratio;
        if (q.mean + q.ci95_mean < p.mean - p.ci95_mean) r.monotone = false;
    }
    r.gamma_hat = r.points.back().ratio.mean;
    r.ci95 = r.points.back().ratio.ci95_mean;
    return r;
}

}  // namespace hammersley
