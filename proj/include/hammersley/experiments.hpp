#pragma once

// Experiment registry shared by the CLI and the acceptance binary. Each
// experiment maps resolved parameters, a seed and a thread count to a report
// whose content depends only on the parameters and the seed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "busemann.hpp"
#include "fluctuations.hpp"
#include "fluid.hpp"
#include "lpp.hpp"
#include "parallel.hpp"
#include "particles.hpp"
#include "points.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "testing/oracle.hpp"

#ifndef HAMMERSLEY_VERSION
#define HAMMERSLEY_VERSION "unknown"
#endif

namespace hammersley::experiments {

using json = nlohmann::json;

inline std::string version() { return HAMMERSLEY_VERSION; }

struct Context {
    json params;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

struct Outcome {
    json estimates = json::object();
    json ci = json::object();
    json checks = json::object();
    std::map<std::string, std::string> csv;  // file name -> content

    void check(const std::string& name, bool ok) { checks[name] = ok; }
    bool pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const json& v) { return v.get<bool>(); });
    }
};

struct Experiment {
    std::string name;
    std::string summary;
    json defaults;
    std::function<Outcome(const Context&)> run;
};

namespace detail {

inline json moments(const MomentSummary& m) {
    json j{{"n", m.n}, {"mean", m.mean}, {"variance", m.variance}};
    if (m.covariance) j["covariance"] = *m.covariance;
    return j;
}

inline json moments_ci(const MomentSummary& m) {
    json j{{"mean", m.ci95_mean}, {"variance", m.ci95_variance}};
    if (m.ci95_covariance) j["covariance"] = *m.ci95_covariance;
    return j;
}

inline json identity(const IdentityCheck& c) {
    return {{"estimate", c.estimate}, {"target", c.target}, {"halfwidth", c.halfwidth}, {"holds", c.holds()}};
}

inline json test_result(const TestResult& t) { return {{"statistic", t.statistic}, {"p_value", t.p_value}, {"n", t.n}}; }

inline std::vector<double> doubles(const json& j) { return j.get<std::vector<double>>(); }

inline std::string column_csv(const std::vector<std::string>& names, const std::vector<const std::vector<double>*>& cols) {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < names.size(); ++i) os << (i ? "," : "") << names[i];
    os << '\n';
    const std::size_t n = cols.empty() ? 0 : cols.front()->size();
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << (*cols[i])[r];
        os << '\n';
    }
    return os.str();
}

inline std::size_t replicas_of(const Context& c) {
    const auto n = c.params.at("replicas").get<long long>();
    if (n < 1) throw std::invalid_argument("replicas must be at least 1");
    return static_cast<std::size_t>(n);
}

inline WeightDistribution distribution(const json& p) {
    const auto name = p.at("dist").get<std::string>();
    if (name == "dirac1") return WeightDistribution::dirac1();
    if (name == "exponential") return WeightDistribution::exponential(p.at("rate").get<double>());
    throw std::invalid_argument("unknown weight law '" + name + "' (dirac1 or exponential)");
}

// Plain bisection for p = 1 - exp(-c p), kept apart from the library solver.
inline double bisect_p_plus(double lambda, double rho) {
    const double c = rho / lambda;
    double lo = std::numeric_limits<double>::min(), hi = 1.0;
    for (int i = 0; i < 2000 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (-std::expm1(-c * mid) - mid > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

// Integer box data of the worked example.
struct Figure21 {
    AtomicMeasure sources{std::vector<Atom>{{2, 5}, {5, 3}, {8, 7}}};
    AtomicMeasure sinks{std::vector<Atom>{{1.5, 4}, {6, 6}}};
    WeightedPointSet points = make_point_set({0, 10, 0, 10}, {{4, 3, 4}, {6, 8, 7}});
    double R = 10, T = 10;
};

inline Outcome run_figure21(const Context&) {
    Figure21 f;
    Outcome o;
    const FluidState half = evolve_box(f.sources, f.sinks, f.points, f.R, f.T / 2);
    const FluidState full = evolve_box(f.sources, f.sinks, f.points, f.R, f.T);
    auto masses = [](const AtomicMeasure& m) {
        std::vector<double> v;
        for (const auto& a : m.atoms()) v.push_back(a.mass);
        return v;
    };
    auto atoms = [](const AtomicMeasure& m) {
        json j = json::array();
        for (const auto& a : m.atoms()) j.push_back({a.pos, a.mass});
        return j;
    };
    // Flux through x = 0 twice: from the passage and from the fluid's left ledger.
    const AtomicMeasure flux = flux_measure(SourcesSinks{f.sources, f.sinks}, f.points, {f.T / 2, f.T});
    auto ledger_flux = [&](double t) {
        double s = 0;
        for (const auto& e : full.left_ledger())
            if (e.time <= t) s += e.mass;
        return s;
    };
    o.estimates["half_time_atoms"] = atoms(half.measure());
    o.estimates["final_atoms"] = atoms(full.measure());
    o.estimates["exited_mass"] = full.exited_mass();
    o.estimates["entered_mass"] = full.entered_mass();
    o.estimates["flux_half"] = flux.cumulative(f.T / 2);
    o.estimates["flux_full"] = flux.cumulative(f.T);
    o.estimates["ledger_flux_half"] = ledger_flux(f.T / 2);
    o.estimates["ledger_flux_full"] = ledger_flux(f.T);
    o.check("half_time_masses", masses(half.measure()) == std::vector<double>{1, 4, 6});
    o.check("final_masses", masses(full.measure()) == std::vector<double>{7});
    o.check("exited_mass", full.exited_mass() == 10.0);
    o.check("entered_mass", full.entered_mass() == 2.0);
    o.check("flux_half", flux.cumulative(f.T / 2) == 4.0 && ledger_flux(f.T / 2) == 4.0);
    o.check("flux_full", flux.cumulative(f.T) == 10.0 && ledger_flux(f.T) == 10.0);
    o.check("mass_balance", full.initial_mass() + full.entered_mass() == full.total_mass() + full.exited_mass());
    std::ostringstream ev;
    full.write_event_csv(ev);
    o.csv["figure21_events.csv"] = ev.str();
    return o;
}

inline Outcome run_oracle(const Context& c) {
    const auto& p = c.params;
    auto t = testing::oracle_sweep(static_cast<std::size_t>(p.at("instances").get<long long>()), c.seed,
                                   p.at("max_points").get<int>(), p.at("max_atoms").get<int>());
    Outcome o;
    o.estimates = {{"instances", t.instances},
                   {"last_passage_mismatches", t.last_passage},
                   {"boundary_mismatches", t.boundary},
                   {"sources_sinks_mismatches", t.sources_sinks},
                   {"lowest_geodesic_mismatches", t.lowest_geodesic},
                   {"exit_mismatches", t.exits},
                   {"first_failures", t.first_failures}};
    o.check("all_match", t.mismatches() == 0);
    return o;
}

inline Outcome run_shape(const Context& c) {
    const auto& p = c.params;
    const WeightDistribution dist = detail::distribution(p);
    auto r = shape_estimate(dist, detail::doubles(p.at("t_grid")), detail::replicas_of(c), c.seed, c.threads);
    Outcome o;
    json per_t = json::array(), per_t_ci = json::array();
    for (const auto& pt : r.points) {
        per_t.push_back({{"t", pt.t}, {"mean_L_over_t", pt.ratio.mean}, {"variance", pt.ratio.variance}});
        per_t_ci.push_back({{"t", pt.t}, {"mean_L_over_t", pt.ratio.ci95_mean}});
    }
    o.estimates = {{"per_t", per_t}, {"gamma_hat", r.gamma_hat}, {"domination_bound", r.bound}};
    o.ci = {{"per_t", per_t_ci}, {"gamma_hat", r.ci95}};
    o.check("monotone_in_t", r.monotone);
    o.check("below_domination_bound", r.gamma_hat + r.ci95 <= r.bound);
    const auto band = detail::doubles(p.at("band"));
    if (band.size() == 2) o.check("gamma_in_band", r.gamma_hat >= band[0] && r.gamma_hat <= band[1]);
    else if (!band.empty()) throw std::invalid_argument("band must be empty or [lo, hi]");
    return o;
}

struct BoxObservation {
    std::vector<double> top, east;
    std::vector<long long> cells;
    double top_count = 0, east_count = 0, corner_count = 0;
};

inline BoxObservation observe_box(double rho, double R, double T, int cells, std::uint64_t seed) {
    const auto unit = WeightDistribution::dirac1();
    const AtomicMeasure sources = sample_atomic_poisson(0.0, R, rho, unit, derive_seed(seed, stream::sources));
    const AtomicMeasure sinks = sample_atomic_poisson(0.0, T, 1.0 / rho, unit, derive_seed(seed, stream::sinks));
    const WeightedPointSet pts = sample_point_set({0, R, 0, T}, 1.0, unit, derive_seed(seed, stream::points));
    const FluidState s = evolve_box(sources, sinks, pts, R, T);
    BoxObservation b;
    const AtomicMeasure top = s.measure();
    for (const auto& a : top.atoms())
        for (double m = a.mass; m > 0.5; m -= 1.0) b.top.push_back(a.pos);
    for (const auto& e : s.east_ledger())
        for (double m = e.mass; m > 0.5; m -= 1.0) b.east.push_back(e.time);
    b.cells.assign(static_cast<std::size_t>(cells * cells), 0);
    for (const auto& k : s.corner_log()) {
        const int i = std::min(cells - 1, static_cast<int>(k.x / R * cells));
        const int j = std::min(cells - 1, static_cast<int>(k.t / T * cells));
        ++b.cells[static_cast<std::size_t>(i * cells + j)];
    }
    b.top_count = static_cast<double>(b.top.size());
    b.east_count = static_cast<double>(b.east.size());
    b.corner_count = static_cast<double>(s.corner_log().size());
    return b;
}

inline Outcome run_burke(const Context& c) {
    const auto& p = c.params;
    const double rho = p.at("rho").get<double>(), R = p.at("box").get<double>(), T = R;
    const int cells = p.at("cells").get<int>();
    if (!(rho > 0.0) || !(R > 0.0) || cells < 1) throw std::invalid_argument("need rho > 0, box > 0, cells >= 1");
    const std::size_t n = detail::replicas_of(c);
    auto obs = parallel_map(n, c.threads,
                            [&](std::size_t i) { return observe_box(rho, R, T, cells, replica_seed(c.seed, i)); });
    std::vector<double> top_sp, east_sp, a, b, k;
    std::vector<long long> counts;
    const auto top_k = static_cast<std::size_t>(rho * R / 2), east_k = static_cast<std::size_t>(T / rho / 2);
    for (const auto& o : obs) {
        auto s1 = spacings(o.top, 0.0, top_k);
        auto s2 = spacings(o.east, 0.0, east_k);
        top_sp.insert(top_sp.end(), s1.begin(), s1.end());
        east_sp.insert(east_sp.end(), s2.begin(), s2.end());
        counts.insert(counts.end(), o.cells.begin(), o.cells.end());
        a.push_back(o.top_count);
        b.push_back(o.east_count);
        k.push_back(o.corner_count);
    }
    const auto ks_top = ks_test(top_sp, ExponentialRef{rho});
    const auto ks_east = ks_test(east_sp, ExponentialRef{1.0 / rho});
    const auto chi = chi_square_poisson_test(counts, R * T / (cells * cells));
    const auto i_te = independence_test(a, b), i_tc = independence_test(a, k), i_ec = independence_test(b, k);
    const double level = 0.01, pair_level = level / 3.0;
    Outcome o;
    o.estimates = {{"top_spacings_ks", detail::test_result(ks_top)},
                   {"east_spacings_ks", detail::test_result(ks_east)},
                   {"corner_cells_chi_square", detail::test_result(chi)},
                   {"independence_top_east", detail::test_result(i_te)},
                   {"independence_top_corners", detail::test_result(i_tc)},
                   {"independence_east_corners", detail::test_result(i_ec)},
                   {"mean_top_count", mean_of(a)},
                   {"mean_east_count", mean_of(b)},
                   {"mean_corner_count", mean_of(k)},
                   {"pairwise_level", pair_level}};
    o.check("top_spacings_exponential", ks_top.p_value > level);
    o.check("east_spacings_exponential", ks_east.p_value > level);
    o.check("corners_poisson", chi.p_value > level);
    o.check("pairwise_independent",
            i_te.p_value > pair_level && i_tc.p_value > pair_level && i_ec.p_value > pair_level);
    o.csv["burke_counts.csv"] = detail::column_csv({"top", "east", "corners"}, {&a, &b, &k});
    return o;
}

inline Outcome run_equilibrium(const Context& c) {
    const auto& p = c.params;
    const double rho = p.at("rho").get<double>(), R = p.at("R").get<double>(), T = p.at("T").get<double>();
    if (!(rho > 0.0) || !(R > 0.0) || !(T > 0.0)) throw std::invalid_argument("need rho, R, T > 0");
    const std::size_t n = detail::replicas_of(c);
    auto obs = parallel_map(n, c.threads, [&](std::size_t i) { return observe_box(rho, R, T, 1, replica_seed(c.seed, i)); });
    std::vector<double> sp, counts;
    const auto kmax = static_cast<std::size_t>(rho * R / 2);
    for (const auto& o : obs) {
        auto s = spacings(o.top, 0.0, kmax);
        sp.insert(sp.end(), s.begin(), s.end());
        counts.push_back(o.top_count);
    }
    const auto ks = ks_test(sp, ExponentialRef{rho});
    const auto m = summarize(counts);
    Outcome o;
    o.estimates = {{"spacings_ks", detail::test_result(ks)}, {"final_density", m.mean / R}};
    o.ci = {{"final_density", m.ci95_mean / R}};
    o.check("spacings_exponential", ks.p_value > 0.01);
    return o;
}

inline Outcome run_exit_identity(const Context& c) {
    const auto& p = c.params;
    const double lambda = p.at("lambda").get<double>(), x = p.at("x").get<double>(), t = p.at("t").get<double>();
    auto r = exit_identity_report(lambda, x, t, detail::replicas_of(c), c.seed, c.threads);
    Outcome o;
    o.estimates = {{"var_L", r.var_L},
                   {"offset", t / lambda - lambda * x},
                   {"two_lambda_mean_z_plus", 2 * lambda * r.z_plus.mean},
                   {"predicted_var", r.predicted_var},
                   {"cov_nu_L", r.cov_nu_L},
                   {"lambda_mean_z_plus", r.predicted_cov},
                   {"L", detail::moments(r.L)},
                   {"z_plus", detail::moments(r.z_plus)},
                   {"variance_identity", detail::identity(r.variance)},
                   {"covariance_identity", detail::identity(r.covariance)}};
    o.ci = {{"joint_confidence", 0.95},
            {"variance_identity", r.variance.halfwidth},
            {"covariance_identity", r.covariance.halfwidth},
            {"L", detail::moments_ci(r.L)},
            {"z_plus", detail::moments_ci(r.z_plus)}};
    o.check("variance_identity", r.variance.holds());
    o.check("covariance_identity", r.covariance.holds());
    return o;
}

inline Outcome run_stationarity(const Context& c) {
    const auto& p = c.params;
    auto r = stationarity_residual(p.at("lambda").get<double>(), p.at("a").get<double>(), p.at("t").get<double>(),
                                   detail::replicas_of(c), c.seed, c.threads);
    Outcome o;
    o.estimates = {{"b", r.b},
                   {"psi", r.psi},
                   {"residual", detail::moments(r.residual)},
                   {"mean_square", r.mean_square},
                   {"var_characteristic", r.var_characteristic},
                   {"mean_square_over_t", r.ratio_to_t},
                   {"identity", detail::identity(r.identity)}};
    o.ci = {{"identity", r.identity.halfwidth}, {"residual", detail::moments_ci(r.residual)}};
    o.check("mean_square_equals_characteristic_variance", r.identity.holds());
    return o;
}

inline Outcome run_clt(const Context& c) {
    const auto& p = c.params;
    const double t = p.at("t").get<double>();
    auto r = clt_check(p.at("lambda").get<double>(), p.at("a").get<double>(), t, detail::replicas_of(c), c.seed,
                       c.threads);
    auto b = busemann_clt(p.at("beta").get<double>(), t, detail::replicas_of(c),
                          derive_seed(c.seed, stream::auxiliary), c.threads);
    const double tol = p.at("tolerance").get<double>();
    Outcome o;
    o.estimates = {{"sigma2", r.sigma2},
                   {"mean_target", r.mean_target},
                   {"L", detail::moments(r.L)},
                   {"variance_ratio", r.variance_ratio},
                   {"normal_ks", detail::test_result(r.ks)},
                   {"busemann_slope", b.slope},
                   {"busemann_target", b.target}};
    o.ci = {{"L", detail::moments_ci(r.L)}, {"busemann_slope", b.B.ci95_variance / t}};
    o.check("variance_ratio", std::abs(r.variance_ratio - 1.0) <= tol);
    o.check("normal", r.ks.p_value > 0.01);
    if (b.target > 0.0) o.check("busemann_variance_slope", std::abs(b.slope / b.target - 1.0) <= tol);
    return o;
}

inline Outcome run_busemann_intensity(const Context& c) {
    const auto& p = c.params;
    const auto tans = detail::doubles(p.at("tans"));
    const double h = p.at("interval").get<double>(), r0 = p.at("r0").get<double>();
    const auto radii = geometric_radii(r0, p.at("radii").get<std::size_t>());
    const std::size_t n = detail::replicas_of(c);
    Outcome o;
    json est = json::array(), ci = json::array();
    for (std::size_t k = 0; k < tans.size(); ++k) {
        const auto alpha = DirectionAngle::from_tan(tans[k]);
        const std::uint64_t base = derive_seed(c.seed, stream::auxiliary, k);
        auto s = parallel_map(n, c.threads, [&](std::size_t i) {
            GrowingRegion region({alpha}, radii, h, h, 1.0, WeightDistribution::dirac1(), replica_seed(base, i));
            return sample_nu_alpha(region, alpha, h, true);
        });
        std::vector<double> nu, nu_star;
        for (const auto& v : s)
            if (v.converged) {
                nu.push_back(v.nu.total_mass());
                nu_star.push_back(v.nu_star.total_mass());
            }
        const double rate = static_cast<double>(nu.size()) / static_cast<double>(n);
        const double target = alpha.rho() * h;
        json e{{"tan", tans[k]}, {"target", target}, {"converged_fraction", rate}};
        json ce{{"tan", tans[k]}};
        bool ok = rate >= 0.99 && nu.size() >= 2;
        if (nu.size() >= 2) {
            const auto m = summarize(nu), ms = summarize(nu_star);
            const double prod = m.mean * ms.mean / (h * h);
            e["mean_nu"] = m.mean;
            e["mean_nu_star"] = ms.mean;
            e["product"] = prod;
            ce["mean_nu"] = m.ci95_mean;
            ce["mean_nu_star"] = ms.ci95_mean;
            const bool mean_ok = std::abs(m.mean - target) <= 0.05 * target;
            const bool prod_ok = std::abs(prod - 1.0) <= 0.10;
            o.check("mean_nu_tan_" + std::to_string(static_cast<int>(tans[k])), mean_ok);
            o.check("product_tan_" + std::to_string(static_cast<int>(tans[k])), prod_ok);
        }
        o.check("convergence_tan_" + std::to_string(static_cast<int>(tans[k])), ok);
        est.push_back(e);
        ci.push_back(ce);
    }
    o.estimates["per_angle"] = est;
    o.ci["per_angle"] = ci;
    return o;
}

inline Outcome run_multiclass(const Context& c) {
    const auto& p = c.params;
    std::vector<DirectionAngle> angles;
    for (double t : detail::doubles(p.at("tans"))) angles.push_back(DirectionAngle::from_tan(t));
    const double h = p.at("interval").get<double>();
    const auto radii = geometric_radii(p.at("r0").get<double>(), p.at("radii").get<std::size_t>());
    const std::size_t n = detail::replicas_of(c);
    struct Result {
        bool converged;
        std::size_t violations;
    };
    auto s = parallel_map(n, c.threads, [&](std::size_t i) {
        GrowingRegion region(angles, radii, h, h, 1.0, WeightDistribution::dirac1(), replica_seed(c.seed, i));
        auto m = multi_class_sample(region, angles, h);
        std::vector<double> mesh{0.0, h};
        for (const auto& mu : m.measures)
            for (const auto& a : mu.atoms()) mesh.push_back(a.pos);
        std::sort(mesh.begin(), mesh.end());
        mesh.erase(std::unique(mesh.begin(), mesh.end()), mesh.end());
        std::size_t v = 0;
        for (std::size_t j = 1; j < m.measures.size(); ++j) v += !dominates_on_mesh(m.measures[j], m.measures[j - 1], mesh);
        return Result{m.converged, v};
    });
    std::size_t converged = 0, violations = 0;
    for (const auto& r : s)
        if (r.converged) {
            ++converged;
            violations += r.violations;
        }
    Outcome o;
    o.estimates = {{"converged", converged}, {"violations", violations}};
    o.check("no_violations", violations == 0);
    o.check("some_converged", converged > 0);
    return o;
}

inline Outcome run_second_class(const Context& c) {
    const auto& p = c.params;
    const double lambda = p.at("lambda").get<double>(), T = p.at("T").get<double>();
    const int steps = p.at("steps").get<int>();
    if (!(lambda > 0.0) || !(T > 0.0) || steps < 1) throw std::invalid_argument("need lambda, T > 0 and steps >= 1");
    const double speed = 1.0 / (lambda * lambda);
    const double spread = 6.0 * std::pow(T, 2.0 / 3.0) + 20.0;
    const double z_min = -spread, x_max = 1.25 * speed * T + spread;
    std::vector<double> times;
    for (int k = 1; k <= steps; ++k) times.push_back(T * k / steps);
    const Law law{LawKind::Poisson, lambda};
    struct Result {
        double x;
        bool monotone, saturated;
    };
    auto s = parallel_map(detail::replicas_of(c), c.threads, [&](std::size_t i) {
        const std::uint64_t seed = replica_seed(c.seed, i);
        const AtomicMeasure nu = initial_measure(law, law, z_min, x_max, seed);
        const auto pts = sample_point_set({z_min, x_max, 0.0, T}, 1.0, WeightDistribution::dirac1(),
                                          derive_seed(seed, stream::points));
        auto tr = trajectory(nu, pts, times, z_min, x_max);
        Result r{tr.back().x, true, false};
        for (std::size_t k = 0; k < tr.size(); ++k) {
            if (k && tr[k].x < tr[k - 1].x) r.monotone = false;
            r.saturated = r.saturated || tr[k].saturated;
        }
        return r;
    });
    std::vector<double> ratio;
    std::size_t non_monotone = 0, saturated = 0;
    for (const auto& r : s) {
        ratio.push_back(r.x / T);
        non_monotone += !r.monotone;
        saturated += r.saturated;
    }
    const auto m = summarize(ratio);
    Outcome o;
    o.estimates = {{"mean_X_over_T", m.mean}, {"target", speed}, {"variance", m.variance},
                   {"non_monotone", non_monotone}, {"saturated", saturated}};
    o.ci = {{"mean_X_over_T", m.ci95_mean}};
    o.check("strong_law", std::abs(m.mean - speed) <= 0.10 * speed);
    o.check("monotone", non_monotone == 0);
    o.check("within_window", saturated == 0);
    o.csv["second_class_speeds.csv"] = detail::column_csv({"x_over_T"}, {&ratio});
    return o;
}

inline void rarefaction_poisson(const Context& c, Outcome& o) {
    const auto& p = c.params;
    const double lambda = p.at("lambda").get<double>(), mu = p.at("mu").get<double>(), T = p.at("T").get<double>();
    RarefactionConfig cfg{{LawKind::Poisson, lambda}, {LawKind::Poisson, mu}};
    std::vector<double> grid;
    for (int k = 0; k <= 120; ++k) grid.push_back(1.2 * k / 120.0 / (lambda * lambda));
    auto s = empirical_speed_distribution(cfg, T, detail::replicas_of(c), grid, c.seed, c.threads);
    std::vector<double> sorted = s.speeds;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    auto F = [&](double v) { return v > 0.0 ? rarefaction_cdf_poisson(lambda, mu, v) : 0.0; };
    double sup = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = F(sorted[i]);
        sup = std::max({sup, std::abs(f - static_cast<double>(i + 1) / n), std::abs(f - static_cast<double>(i) / n)});
    }
    const auto lo = p.at("support").at(0).get<double>(), hi = p.at("support").at(1).get<double>();
    const double inside =
        static_cast<double>(std::count_if(sorted.begin(), sorted.end(), [&](double v) { return v >= lo && v <= hi; })) / n;
    o.estimates["poisson"] = {{"sup_distance", sup}, {"mass_in_support", inside}, {"saturated", s.saturated}};
    o.check("poisson_sup_distance", sup <= p.at("sup_tolerance").get<double>());
    o.check("poisson_support", inside >= 0.98);
    std::vector<double> closed;
    for (double v : grid) closed.push_back(F(v));
    o.csv["rarefaction_poisson_cdf.csv"] = detail::column_csv({"v", "empirical", "closed_form"}, {&s.v, &s.cdf, &closed});
}

inline void rarefaction_periodic(const Context& c, Outcome& o) {
    const auto& p = c.params;
    const double lambda = p.at("lambda").get<double>(), mu = p.at("mu").get<double>(), rho = p.at("rho").get<double>();
    const auto series = rarefaction_cdf_periodic(lambda, mu, rho);
    const double oracle = detail::bisect_p_plus(lambda, rho);
    const double s0 = s_minus_cdf(rho, mu, 0);
    const auto n = static_cast<std::size_t>(p.at("mc_replicas").get<long long>());
    // Independent Monte Carlo of P(S+ >= S-); replica i owns its stream.
    auto hits = parallel_map(n, c.threads, [&](std::size_t i) {
        Rng rng = make_rng(derive_seed(c.seed, stream::auxiliary, i));
        const int sp = mc::periodic_s_plus(lambda, rho, rng);
        const int sm = mc::periodic_s_minus(mu, rho, rng);
        return sp >= sm ? 1.0 : 0.0;
    });
    const double q = std::accumulate(hits.begin(), hits.end(), 0.0) / static_cast<double>(n);
    const double half = z95 * std::sqrt(std::max(q * (1 - q), 1e-12) / static_cast<double>(n));
    const double limit = rarefaction_periodic_large_lambda(rho, mu);
    o.estimates["periodic"] = {{"p_plus", series.p_plus},
                               {"p_plus_bisection", oracle},
                               {"s_minus_at_zero", s0},
                               {"series", series.value},
                               {"k_max", series.k_max},
                               {"monte_carlo", q},
                               {"large_lambda_limit", limit}};
    o.ci["periodic"] = {{"monte_carlo", half}};
    o.check("p_plus_matches_bisection", std::abs(series.p_plus - oracle) <= 1e-12);
    o.check("s_minus_zero_exact", s0 == 1.0 - rho / mu);
    o.check("series_matches_monte_carlo", std::abs(series.value - q) <= half);
    o.check("large_lambda_limit", limit == 1.0 - rho / mu);
}

inline Outcome run_rarefaction(const Context& c) {
    const auto law = c.params.at("law").get<std::string>();
    if (law != "poisson" && law != "periodic" && law != "both")
        throw std::invalid_argument("law must be poisson, periodic or both");
    Outcome o;
    if (law != "periodic") rarefaction_poisson(c, o);
    if (law != "poisson") rarefaction_periodic(c, o);
    return o;
}

inline Outcome run_cube_root(const Context& c) {
    const auto& p = c.params;
    auto r = cube_root_fit(detail::doubles(p.at("t_grid")), detail::replicas_of(c), c.seed, c.threads);
    const auto band = detail::doubles(p.at("band"));
    if (band.size() != 2) throw std::invalid_argument("band must be [lo, hi]");
    Outcome o;
    json per_t = json::array(), per_t_ci = json::array();
    bool identities = true, tails = true;
    for (const auto& pt : r.points) {
        per_t.push_back({{"t", pt.t},
                         {"var_L", pt.L.variance},
                         {"mean_z_plus", pt.z_plus.mean},
                         {"identity", detail::identity(pt.identity)},
                         {"tail", pt.tail}});
        per_t_ci.push_back({{"t", pt.t}, {"var_L", pt.L.ci95_variance}, {"mean_z_plus", pt.z_plus.ci95_mean}});
        identities = identities && pt.identity.holds();
        for (std::size_t j = 1; j < pt.tail.size(); ++j) tails = tails && pt.tail[j] <= pt.tail[j - 1];
    }
    o.estimates = {{"per_t", per_t},
                   {"tail_levels", tail_levels},
                   {"z_plus_slope", r.z_fit.slope},
                   {"var_slope", r.var_fit.slope}};
    o.ci = {{"per_t", per_t_ci},
            {"z_plus_slope_stderr", r.z_fit.stderr_slope},
            {"var_slope_stderr", r.var_fit.stderr_slope}};
    auto in_band = [&](double s) { return s >= band[0] && s <= band[1]; };
    o.check("z_plus_slope_in_band", in_band(r.z_fit.slope));
    o.check("var_slope_in_band", in_band(r.var_fit.slope));
    o.check("per_t_identity", identities);
    o.check("tail_monotone", tails);
    return o;
}

inline Outcome run_compare_stationary(const Context& c) {
    const auto& p = c.params;
    auto r = compare_L_stationary(detail::doubles(p.at("t_grid")), detail::replicas_of(c), c.seed, c.threads);
    if (r.empty()) throw std::invalid_argument("empty t grid");
    Outcome o;
    json per_t = json::array(), per_t_ci = json::array();
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    bool tails = true;
    std::size_t violations = 0;
    for (const auto& pt : r) {
        per_t.push_back({{"t", pt.t}, {"mean_abs_dev_over_cbrt_t", pt.abs_dev.mean}, {"coupled_tail", pt.coupled_tail},
                         {"order_violations", pt.order_violations}});
        per_t_ci.push_back({{"t", pt.t}, {"mean_abs_dev_over_cbrt_t", pt.abs_dev.ci95_mean}});
        lo = std::min(lo, pt.abs_dev.mean);
        hi = std::max(hi, pt.abs_dev.mean);
        for (std::size_t j = 1; j < pt.coupled_tail.size(); ++j)
            tails = tails && (pt.coupled_tail[j] < pt.coupled_tail[j - 1] || pt.coupled_tail[j - 1] == 0.0);
        violations += pt.order_violations;
    }
    o.estimates = {{"per_t", per_t}, {"coupled_levels", coupled_levels}, {"max_min_ratio", hi / lo}};
    o.ci = {{"per_t", per_t_ci}};
    o.check("bounded_ratio", hi / lo <= 2.0);
    o.check("coupled_tail_decreasing", tails);
    o.check("stationary_dominates", violations == 0);
    return o;
}

inline const std::vector<Experiment>& registry() {
    static const std::vector<Experiment> r = {
        {"shape", "shape constant from E L(0,(t,t))/t and the domination bound",
         {{"dist", "dirac1"}, {"rate", 1.0}, {"t_grid", {250, 500, 1000}}, {"replicas", 500}, {"band", {1.95, 2.0}}},
         run_shape},
        {"figure21", "worked fluid example with integer data", json::object(), run_figure21},
        {"burke", "output theorem for the box process",
         {{"rho", 1.0}, {"box", 200.0}, {"cells", 4}, {"replicas", 500}}, run_burke},
        {"equilibrium", "invariance of Poisson initial data with Poisson sinks",
         {{"rho", 1.0}, {"R", 200.0}, {"T", 200.0}, {"replicas", 200}}, run_equilibrium},
        {"exit-identity", "variance and covariance formulas through the exit point",
         {{"lambda", 1.0}, {"x", 200.0}, {"t", 200.0}, {"replicas", 5000}}, run_exit_identity},
        {"stationarity", "mean square of the residual against the characteristic variance",
         {{"lambda", 1.0}, {"a", 2.0}, {"t", 500.0}, {"replicas", 500}}, run_stationarity},
        {"clt", "Gaussian fluctuations off the characteristic",
         {{"lambda", 1.0}, {"a", 2.0}, {"t", 500.0}, {"beta", 0.0}, {"tolerance", 0.1}, {"replicas", 500}}, run_clt},
        {"busemann-intensity", "intensity of nu_alpha and nu*_alpha",
         {{"tans", {1.0, 4.0}}, {"interval", 1.0}, {"r0", 128.0}, {"radii", 5}, {"replicas", 1000}}, run_busemann_intensity},
        {"multiclass", "ordering of nu_alpha across angles",
         {{"tans", {0.5, 1.0, 2.0}}, {"interval", 2.0}, {"r0", 64.0}, {"radii", 4}, {"replicas", 200}}, run_multiclass},
        {"second-class", "strong law and monotonicity of the second-class particle",
         {{"lambda", 1.0}, {"T", 500.0}, {"steps", 50}, {"replicas", 200}}, run_second_class},
        {"rarefaction", "random speed in the rarefaction fan",
         {{"law", "both"},
          {"lambda", 1.0},
          {"mu", 2.0},
          {"rho", 1.5},
          {"T", 400.0},
          {"support", {0.2, 1.05}},
          {"sup_tolerance", 0.05},
          {"mc_replicas", 20000},
          {"replicas", 1000}},
         run_rarefaction},
        {"cube-root", "t^{2/3} scaling of Var L and E Z+",
         {{"t_grid", {128, 256, 512, 1024}}, {"band", {0.57, 0.77}}, {"replicas", 2000}}, run_cube_root},
        {"compare-stationary", "point-to-point against stationary passage on shared points",
         {{"t_grid", {125, 512, 1000}}, {"replicas", 300}}, run_compare_stationary},
        {"oracle", "passage routines against exhaustive enumeration",
         {{"instances", 10000}, {"max_points", 12}, {"max_atoms", 8}}, run_oracle},
    };
    return r;
}

inline const Experiment* find(const std::string& name) {
    for (const auto& e : registry())
        if (e.name == name) return &e;
    return nullptr;
}

// Overrides must name known parameters and keep their JSON type (integers may
// stand in for reals).
inline json resolve(const Experiment& e, const json& overrides) {
    json p = e.defaults;
    if (overrides.is_null()) return p;
    if (!overrides.is_object()) throw std::invalid_argument("parameters must be a JSON object");
    for (auto it = overrides.begin(); it != overrides.end(); ++it) {
        if (!p.contains(it.key())) throw std::invalid_argument("unknown parameter '" + it.key() + "' for " + e.name);
        const json& d = p[it.key()];
        const json& v = it.value();
        const bool same = (d.is_number() && v.is_number()) || (d.is_string() && v.is_string()) ||
                          (d.is_array() && v.is_array()) || (d.is_boolean() && v.is_boolean());
        if (!same) throw std::invalid_argument("parameter '" + it.key() + "' has the wrong type");
        if (d.is_number_integer() && !v.is_number_integer())
            throw std::invalid_argument("parameter '" + it.key() + "' must be an integer");
        p[it.key()] = v;
    }
    return p;
}

struct Report {
    json doc;
    bool pass = false;
    std::map<std::string, std::string> csv;
};

// Threads and output locations are not part of the report.
inline Report run(const std::string& name, const json& overrides, std::uint64_t seed, unsigned threads = 1) {
    const Experiment* e = find(name);
    if (!e) throw std::invalid_argument("unknown experiment '" + name + "'");
    Context c{resolve(*e, overrides), seed, std::max(1u, threads)};
    Outcome o = e->run(c);
    Report r;
    json params = c.params;
    params["seed"] = seed;
    r.pass = o.pass();
    r.doc = {{"experiment", name},
             {"version", version()},
             {"parameters", params},
             {"estimates", o.estimates},
             {"ci", o.ci},
             {"verdict", {{"pass", r.pass}, {"checks", o.checks}}}};
    r.csv = std::move(o.csv);
    return r;
}

inline std::string canonical(const json& doc) { return doc.dump(2) + "\n"; }

}  // namespace hammersley::experiments
