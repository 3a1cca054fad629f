#pragma once

// Second-class particle through the exit point: {X(t) <= x} = {Z(x,t) >= 0},
// and the limiting speed laws of the rarefaction fan.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>

#include "lpp.hpp"
#include "parallel.hpp"
#include "points.hpp"
#include "rng.hpp"

namespace hammersley {

struct SecondClassPosition {
    double t = 0;
    double x = 0;
    bool saturated = false;  // particle beyond x_max, or the decisive exit touched z_min
};

// X(t) = inf{x >= 0 : L_{nu+}(x, t) >= L_{nu-}(x, t)} on the window
// [z_min, x_max] x [0, t_max], nu+ carrying the mass on [0, inf). This is
// Z(x, t) >= 0 except when the only maximizers left of 0 accumulate at 0-.
// Both sides are right-continuous steps with jumps at atoms and point
// abscissae, so the infimum is found by bisection over those candidates.
// L_nu = max(L_{nu+}, L_{nu-}), hence the test L_{nu+} >= L_nu. The measure
// and the points must outlive the tracker.
class SecondClassTracker {
public:
    SecondClassTracker(const AtomicMeasure& nu, const WeightedPointSet& points, double z_min, double x_max,
                       double t_max)
        : nu_(&nu), z_min_(z_min), x_max_(x_max), t_max_(t_max), field_(nu, points, z_min, x_max, t_max),
          plus_(nu, points, 0.0, x_max, t_max) {
        if (!(z_min <= 0.0 && x_max > 0.0 && t_max >= 0.0)) throw std::invalid_argument("window must contain 0");
        const std::size_t k = nu.count_below(z_min);
        edge_ = std::max(z_min, k < nu.size() ? nu.atoms()[k].pos : z_min);
    }

    SecondClassPosition position(double t) const {
        if (!(t >= 0.0) || t > t_max_) throw std::invalid_argument("time outside the window");
        SecondClassPosition out{t, 0.0, false};
        if (t == 0.0) return out;
        const auto slice = field_.slice(t);
        const auto plus = plus_.slice(t);
        std::vector<double> cand{0.0};
        for (const auto& a : nu_->atoms())
            if (a.pos > 0.0 && a.pos <= x_max_) cand.push_back(a.pos);
        for (double x : field_.point_xs(t))
            if (x > 0.0) cand.push_back(x);
        std::sort(cand.begin(), cand.end());
        cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

        auto holds = [&](double x) { return plus.at(x).value >= slice.at(x).value; };
        std::size_t lo = 0, hi = cand.size();  // first index with holds() lies in [lo, hi]
        while (lo < hi) {
            const std::size_t mid = lo + (hi - lo) / 2;
            if (holds(cand[mid]))
                hi = mid;
            else
                lo = mid + 1;
        }
        if (lo == cand.size()) {
            out.x = x_max_;
            out.saturated = true;
            return out;
        }
        out.x = cand[lo];
        // The comparison just left of X picks the left side; it is trustworthy only
        // if its maximizers stay off the truncation edge.
        if (lo > 0 && slice.at(cand[lo - 1]).low <= edge_) out.saturated = true;
        return out;
    }

    std::vector<SecondClassPosition> trajectory(const std::vector<double>& times) const {
        for (std::size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1])) throw std::invalid_argument("times must be increasing");
        std::vector<SecondClassPosition> out;
        for (double t : times) out.push_back(position(t));
        return out;
    }

private:
    const AtomicMeasure* nu_;
    double z_min_, x_max_, t_max_, edge_;
    PassageField field_;
    PassageField plus_;
};

inline SecondClassPosition second_class_position(const AtomicMeasure& nu, const WeightedPointSet& points, double t,
                                                 double z_min, double x_max) {
    return SecondClassTracker(nu, points, z_min, x_max, t).position(t);
}

inline std::vector<SecondClassPosition> trajectory(const AtomicMeasure& nu, const WeightedPointSet& points,
                                                   const std::vector<double>& times, double z_min, double x_max) {
    if (times.empty()) return {};
    return SecondClassTracker(nu, points, z_min, x_max, times.back()).trajectory(times);
}

// Poisson data of intensity lambda right of 0 and mu left of 0:
// P(V >= v) = (1/sqrt(v) - lambda)/(mu - lambda) on (1/mu^2, 1/lambda^2).
inline double rarefaction_tail_poisson(double lambda, double mu, double v) {
    if (!(lambda > 0.0) || !(mu > lambda)) throw std::invalid_argument("need mu > lambda > 0");
    if (!(v > 0.0)) throw std::invalid_argument("v must be positive");
    if (v >= 1.0 / (lambda * lambda)) return 0.0;
    if (v <= 1.0 / (mu * mu)) return 1.0;
    return (1.0 / std::sqrt(v) - lambda) / (mu - lambda);
}

inline double rarefaction_cdf_poisson(double lambda, double mu, double v) {
    return 1.0 - rarefaction_tail_poisson(lambda, mu, v);
}

// Positive root of p = 1 - exp(-p rho / lambda).
inline double solve_p_plus(double lambda, double rho) {
    if (!(lambda > 0.0) || !(rho > lambda)) throw std::invalid_argument("need rho > lambda > 0");
    const double c = rho / lambda;
    auto g = [c](double p) { return -std::expm1(-c * p) - p; };
    // 1 - e^{-cp} >= cp - c^2 p^2 / 2, so g > 0 below 2(c-1)/c^2.
    double lo = (c - 1.0) / (c * c);
    if (!(g(lo) > 0.0)) {
        while (lo > 0.0 && !(g(lo) > 0.0)) lo *= 0.5;
        if (!(lo > 0.0)) return 0.0;
    }
    const double hi = 1.0;
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(g, lo, hi, g(lo), g(hi),
                                               boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (r.first + r.second);
}

namespace detail {

template <unsigned Digits>
double s_minus_cdf_mp(double rho, double mu, std::size_t k) {
    using Real = boost::multiprecision::number<boost::multiprecision::cpp_dec_float<Digits>>;
    const Real r = Real(rho) / Real(mu);
    Real sum = 0, fact = 1;
    for (std::size_t i = 0; i <= k; ++i) {
        if (i > 0) fact *= Real(static_cast<unsigned long>(i));
        const Real base = Real(static_cast<unsigned long>(k - i));
        Real term = boost::multiprecision::pow(base, static_cast<unsigned long>(i)) * exp(r * base) / fact;
        if (i % 2) term = -term;
        sum += term * boost::multiprecision::pow(r, static_cast<unsigned long>(i));
    }
    return static_cast<double>((1 - r) * sum);
}

// log10 of the largest term of the alternating sum.
inline double s_minus_log10_max_term(double rho, double mu, std::size_t k) {
    const double r = rho / mu;
    double best = 0.0;
    for (std::size_t i = 0; i <= k; ++i) {
        const double b = static_cast<double>(k - i);
        const double lt = static_cast<double>(i) * std::log(r) + (i ? static_cast<double>(i) * std::log(b) : 0.0) +
                          r * b - std::lgamma(static_cast<double>(i) + 1.0);
        if (b > 0.0 || i == 0) best = std::max(best, lt / std::log(10.0));
    }
    return best;
}

}  // namespace detail

// P(S- <= k) = (1 - r) sum_{i=0}^k (-r)^i (k-i)^i / i! e^{r(k-i)}, r = rho/mu.
// The alternating sum cancels heavily, so it is evaluated in decimal
// multiprecision sized to the largest term.
inline double s_minus_cdf(double rho, double mu, std::size_t k) {
    if (!(rho > 0.0) || !(mu > rho)) throw std::invalid_argument("need mu > rho > 0");
    const double mag = detail::s_minus_log10_max_term(rho, mu, k);
    double v;
    if (mag < 25.0)
        v = detail::s_minus_cdf_mp<50>(rho, mu, k);
    else if (mag < 170.0)
        v = detail::s_minus_cdf_mp<200>(rho, mu, k);
    else if (mag < 970.0)
        v = detail::s_minus_cdf_mp<1000>(rho, mu, k);
    else
        throw std::domain_error("series too long for the supported precision");
    return std::clamp(v, 0.0, 1.0);
}

struct PeriodicSeries {
    double value = 0;  // P(S+ >= S-)
    double p_plus = 0;
    std::size_t k_max = 0;
};

// Periodic data of density lambda right of 0 and mu left of 0 against a
// Poisson(rho) equilibrium: P(S+ >= S-) = sum_k P(S- <= k) p+ (1 - p+)^k,
// truncated where (1 - p+)^k < 1e-10.
inline PeriodicSeries rarefaction_cdf_periodic(double lambda, double mu, double rho) {
    if (!(lambda > 0.0 && lambda < rho && rho < mu)) throw std::invalid_argument("need lambda < rho < mu");
    PeriodicSeries s;
    s.p_plus = solve_p_plus(lambda, rho);
    const double q = 1.0 - s.p_plus;
    s.k_max = static_cast<std::size_t>(std::ceil(std::log(1e-10) / std::log(q)));
    double weight = s.p_plus;
    for (std::size_t k = 0; k <= s.k_max; ++k) {
        s.value += s_minus_cdf(rho, mu, k) * weight;
        weight *= q;
    }
    return s;
}

// lambda -> infinity: S+ = 0 and the answer is P(S- = 0).
inline double rarefaction_periodic_large_lambda(double rho, double mu) {
    if (!(rho > 0.0) || !(mu > rho)) throw std::invalid_argument("need mu > rho > 0");
    return 1.0 - rho / mu;
}

enum class LawKind { Poisson, Periodic };

struct Law {
    LawKind kind = LawKind::Poisson;
    double density = 1;
};

struct RarefactionConfig {
    Law right{LawKind::Poisson, 1.0};  // on (0, inf)
    Law left{LawKind::Poisson, 2.0};   // on (-inf, 0)

    void validate() const {
        if (!(right.density > 0.0) || !(left.density > right.density))
            throw std::invalid_argument("rarefaction needs left density > right density > 0");
    }
    double v_min() const { return 1.0 / (left.density * left.density); }
    double v_max() const { return 1.0 / (right.density * right.density); }
};

// Initial measure on [z_min, x_max] with unit atoms.
inline AtomicMeasure initial_measure(const Law& left, const Law& right, double z_min, double x_max,
                                     std::uint64_t seed) {
    std::vector<Atom> atoms;
    auto side = [&](const Law& law, double a, double b, Side s, std::uint64_t tag) {
        if (!(b > a)) return;
        AtomicMeasure m = law.kind == LawKind::Periodic
                              ? periodic_measure(a, b, law.density, s)
                              : sample_atomic_poisson(a, b, law.density, WeightDistribution::dirac1(),
                                                      derive_seed(seed, tag));
        for (const auto& at : m.atoms())
            if ((s == Side::Right && at.pos > 0.0) || (s == Side::Left && at.pos < 0.0)) atoms.push_back(at);
    };
    side(right, 0.0, x_max, Side::Right, stream::sources);
    side(left, z_min, 0.0, Side::Left, stream::left_sources);
    return AtomicMeasure(std::move(atoms));
}

struct SpeedCdf {
    std::vector<double> v;
    std::vector<double> cdf;
    std::vector<double> speeds;  // X(T)/T per replica
    std::size_t saturated = 0;

    // Empirical P(V <= v) from the stored speeds.
    double at(double x) const {
        if (speeds.empty()) return 0.0;
        std::vector<double> s = speeds;
        std::sort(s.begin(), s.end());
        return static_cast<double>(std::upper_bound(s.begin(), s.end(), x) - s.begin()) /
               static_cast<double>(s.size());
    }

    void write_csv(std::ostream& os) const {
        os << "v,cdf\n";
        os.precision(17);
        for (std::size_t i = 0; i < v.size(); ++i) os << v[i] << ',' << cdf[i] << '\n';
    }
};

struct SpeedWindow {
    double z_min, x_max;
};

// Truncation window for X(T): exits stay within a few T^{2/3} of the origin
// on the dense side, and X/T stays below v_max.
inline SpeedWindow speed_window(const RarefactionConfig& c, double T) {
    const double spread = 6.0 * std::pow(T, 2.0 / 3.0) + 20.0;
    return {-spread, 1.25 * c.v_max() * T + spread};
}

inline SpeedCdf empirical_speed_distribution(const RarefactionConfig& config, double T, std::size_t replicas,
                                             const std::vector<double>& v_grid, std::uint64_t seed,
                                             unsigned threads = 1) {
    config.validate();
    if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
    const SpeedWindow w = speed_window(config, T);
    auto one = [&](std::size_t i) {
        const std::uint64_t s = derive_seed(seed, stream::replica, i);
        AtomicMeasure nu = initial_measure(config.left, config.right, w.z_min, w.x_max, s);
        auto pts = sample_point_set({w.z_min, w.x_max, 0.0, T}, 1.0, WeightDistribution::dirac1(),
                                    derive_seed(s, stream::points));
        return second_class_position(nu, pts, T, w.z_min, w.x_max);
    };
    auto res = parallel_map(replicas, threads, one);
    SpeedCdf out;
    out.v = v_grid;
    for (const auto& r : res) {
        out.speeds.push_back(r.x / T);
        if (r.saturated) ++out.saturated;
    }
    for (double v : v_grid) out.cdf.push_back(out.at(v));
    return out;
}

// Independent samplers of the two suprema in the speed law, used to check
// the closed forms.
namespace mc {

// sup_{z>=0} {floor(lambda z) - N(z)} for N Poisson(rho), rho > lambda; the
// supremum is attained at some k / lambda.
inline int periodic_s_plus(double lambda, double rho, Rng& rng) {
    std::exponential_distribution<double> gap(rho);
    const double z_end = 200.0 / (rho - lambda) + 100.0 / lambda;
    double next = gap(rng);
    long n = 0;
    int best = 0;
    for (long k = 1; k / lambda <= z_end; ++k) {
        const double z = static_cast<double>(k) / lambda;
        while (next <= z) {
            ++n;
            next += gap(rng);
        }
        best = std::max<long>(best, k - n);
    }
    return best;
}

// sup_{z>=0} {N(z) - floor(mu z)} for N Poisson(rho), rho < mu; the supremum
// is attained at an arrival.
inline int periodic_s_minus(double mu, double rho, Rng& rng) {
    std::exponential_distribution<double> gap(rho);
    const double z_end = 200.0 / (mu - rho) + 100.0 / rho;
    double z = 0.0;
    int best = 0;
    for (long j = 1;; ++j) {
        z += gap(rng);
        if (z > z_end) break;
        best = std::max<long>(best, j - static_cast<long>(std::floor(mu * z)));
    }
    return best;
}

// sup_{z>=0} {A(z) - B(z)} for independent Poisson A (rate a) and B (rate b > a).
inline int poisson_sup(double a, double b, Rng& rng) {
    std::bernoulli_distribution up(a / (a + b));
    const long steps = static_cast<long>(400.0 * (a + b) / (b - a)) + 400;
    long w = 0, best = 0;
    for (long i = 0; i < steps; ++i) {
        w += up(rng) ? 1 : -1;
        best = std::max(best, w);
    }
    return static_cast<int>(best);
}

}  // namespace mc

}  // namespace hammersley
