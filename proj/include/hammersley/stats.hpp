#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/poisson.hpp>

namespace hammersley {

struct TestResult {
    double statistic = 0;
    double p_value = 1;
    std::size_t n = 0;
    bool rejects(double level = 0.01) const { return p_value < level; }
};

// P(K > lambda) for the Kolmogorov distribution.
inline double kolmogorov_survival(double lambda) {
    if (!(lambda > 0.0)) return 1.0;
    const double pi = 3.14159265358979323846;
    if (lambda < 1.18) {
        // Theta-function form, fast for small arguments.
        double s = 0.0;
        const double c = pi * pi / (8.0 * lambda * lambda);
        for (int k = 1; k <= 50; k += 2) s += std::exp(-static_cast<double>(k * k) * c);
        return std::clamp(1.0 - std::sqrt(2.0 * pi) / lambda * s, 0.0, 1.0);
    }
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 ? 2.0 : -2.0) * term;
        if (term < 1e-18) break;
    }
    return std::clamp(s, 0.0, 1.0);
}

struct ExponentialRef {
    double rate = 1;
};
struct NormalRef {
    double mean = 0, sd = 1;
};
struct EmpiricalRef {
    std::vector<double> sample;
};
using KsReference = std::variant<ExponentialRef, NormalRef, EmpiricalRef>;

namespace detail {
template <class Cdf>
double ks_one_sample_statistic(std::vector<double> xs, Cdf cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double f = cdf(xs[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

inline double ks_two_sample_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

// Stephens' finite-n correction to the asymptotic Kolmogorov law.
inline double ks_p_value(double d, double n_eff) {
    const double s = std::sqrt(n_eff);
    return kolmogorov_survival((s + 0.12 + 0.11 / s) * d);
}
}  // namespace detail

inline TestResult ks_test(const std::vector<double>& sample, const KsReference& ref) {
    if (sample.size() < 20) throw std::invalid_argument("ks_test needs at least 20 observations");
    const double n = static_cast<double>(sample.size());
    if (const auto* e = std::get_if<ExponentialRef>(&ref)) {
        if (!(e->rate > 0)) throw std::invalid_argument("exponential rate must be positive");
        double d = detail::ks_one_sample_statistic(sample, [r = e->rate](double x) {
            return x <= 0.0 ? 0.0 : -std::expm1(-r * x);
        });
        return {d, detail::ks_p_value(d, n), sample.size()};
    }
    if (const auto* z = std::get_if<NormalRef>(&ref)) {
        if (!(z->sd > 0)) throw std::invalid_argument("normal sd must be positive");
        boost::math::normal_distribution<double> nd(z->mean, z->sd);
        double d = detail::ks_one_sample_statistic(sample, [&](double x) { return boost::math::cdf(nd, x); });
        return {d, detail::ks_p_value(d, n), sample.size()};
    }
    const auto& emp = std::get<EmpiricalRef>(ref).sample;
    if (emp.size() < 20) throw std::invalid_argument("empirical reference needs at least 20 observations");
    double d = detail::ks_two_sample_statistic(sample, emp);
    const double m = static_cast<double>(emp.size());
    return {d, detail::ks_p_value(d, n * m / (n + m)), sample.size()};
}

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double variance_of(const std::vector<double>& v) {
    if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

inline double covariance_of(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("covariance needs paired samples");
    const double ma = mean_of(a), mb = mean_of(b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
    return s / static_cast<double>(a.size() - 1);
}

// Pearson correlation with a Fisher-z p-value.
inline TestResult independence_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("independence_test needs paired samples");
    if (a.size() < 30) throw std::invalid_argument("independence_test needs at least 30 pairs");
    const double va = variance_of(a), vb = variance_of(b);
    if (!(va > 0.0) || !(vb > 0.0)) throw std::invalid_argument("independence_test input has zero variance");
    const double r = std::clamp(covariance_of(a, b) / std::sqrt(va * vb), -1.0, 1.0);
    const double n = static_cast<double>(a.size());
    if (std::abs(r) >= 1.0) return {r, 0.0, a.size()};
    const double z = std::atanh(r) * std::sqrt(n - 3.0);
    boost::math::normal_distribution<double> nd;
    return {r, std::clamp(2.0 * boost::math::cdf(boost::math::complement(nd, std::abs(z))), 0.0, 1.0), a.size()};
}

// Chi-square goodness of fit of nonnegative integer counts against
// Poisson(mean). Cells are merged until each expected count is at least 5.
inline TestResult chi_square_poisson_test(const std::vector<long long>& counts, double mean) {
    if (counts.size() < 20) throw std::invalid_argument("chi-square test needs at least 20 counts");
    if (!(mean > 0.0)) throw std::invalid_argument("poisson mean must be positive");
    const double n = static_cast<double>(counts.size());
    boost::math::poisson_distribution<double> pd(mean);
    long long kmax = *std::max_element(counts.begin(), counts.end());
    std::vector<double> observed(static_cast<std::size_t>(kmax) + 1, 0.0);
    for (auto c : counts) {
        if (c < 0) throw std::invalid_argument("counts must be nonnegative");
        observed[static_cast<std::size_t>(c)] += 1.0;
    }
    std::vector<std::pair<double, double>> cells;  // (observed, expected)
    double obs = 0.0, expct = 0.0;
    double used = 0.0;
    for (long long k = 0; k <= kmax; ++k) {
        obs += observed[static_cast<std::size_t>(k)];
        expct += n * boost::math::pdf(pd, static_cast<double>(k));
        if (expct >= 5.0) {
            cells.push_back({obs, expct});
            used += expct;
            obs = expct = 0.0;
        }
    }
    // Leftover observations and the whole upper tail form the final cell.
    expct = n - used;
    if (!cells.empty() && expct < 5.0) {
        cells.back().first += obs;
        cells.back().second += expct;
    } else {
        cells.push_back({obs, expct});
    }
    if (cells.size() < 2) throw std::invalid_argument("too few cells for chi-square test");
    double stat = 0.0;
    for (const auto& [o, e] : cells) stat += (o - e) * (o - e) / e;
    boost::math::chi_squared_distribution<double> chi(static_cast<double>(cells.size() - 1));
    return {stat, std::clamp(boost::math::cdf(boost::math::complement(chi, stat)), 0.0, 1.0), counts.size()};
}

struct ExponentFit {
    double slope = 0, intercept = 0, stderr_slope = 0, r_squared = 0;
    std::vector<std::pair<double, double>> design;  // (log t, log y)
};

inline ExponentFit loglog_fit(const std::vector<std::pair<double, double>>& pts) {
    if (pts.size() < 3) throw std::invalid_argument("loglog_fit needs at least 3 points");
    ExponentFit f;
    for (const auto& [t, y] : pts) {
        if (!(t > 0.0) || !(y > 0.0)) throw std::invalid_argument("loglog_fit needs positive values");
        f.design.push_back({std::log(t), std::log(y)});
    }
    const double n = static_cast<double>(pts.size());
    double mx = 0, my = 0;
    for (const auto& [x, y] : f.design) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& [x, y] : f.design) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("loglog_fit needs distinct abscissae");
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0.0;
    for (const auto& [x, y] : f.design) {
        double r = y - (f.intercept + f.slope * x);
        sse += r * r;
    }
    f.stderr_slope = pts.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
    f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    return f;
}

struct MomentSummary {
    std::size_t n = 0;
    double mean = 0, variance = 0;
    std::optional<double> covariance;
    double ci95_mean = 0;
    double ci95_variance = 0;
    std::optional<double> ci95_covariance;
};

inline constexpr double z95 = 1.959963984540054;

// Moments of a sample; the variance halfwidth uses the influence function
// (x - mean)^2.
inline MomentSummary summarize(const std::vector<double>& xs) {
    if (xs.size() < 2) throw std::invalid_argument("summary needs at least 2 observations");
    MomentSummary s;
    s.n = xs.size();
    s.mean = mean_of(xs);
    s.variance = variance_of(xs);
    const double rn = std::sqrt(static_cast<double>(s.n));
    s.ci95_mean = z95 * std::sqrt(s.variance) / rn;
    std::vector<double> infl(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) infl[i] = (xs[i] - s.mean) * (xs[i] - s.mean);
    s.ci95_variance = z95 * std::sqrt(variance_of(infl)) / rn;
    return s;
}

inline MomentSummary summarize(const std::vector<double>& xs, const std::vector<double>& ys) {
    MomentSummary s = summarize(xs);
    s.covariance = covariance_of(xs, ys);
    const double my = mean_of(ys);
    std::vector<double> infl(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) infl[i] = (xs[i] - s.mean) * (ys[i] - my);
    s.ci95_covariance = z95 * std::sqrt(variance_of(infl)) / std::sqrt(static_cast<double>(xs.size()));
    return s;
}

// Linear statistic with influence values psi_i: estimate, halfwidth at the
// given two-sided confidence.
struct IdentityCheck {
    double estimate = 0, target = 0, halfwidth = 0;
    bool holds() const { return std::abs(estimate - target) <= halfwidth; }
};

inline double normal_quantile_two_sided(double confidence) {
    boost::math::normal_distribution<double> nd;
    return boost::math::quantile(nd, 0.5 + confidence / 2.0);
}

// Var(a) - c * mean(b) against target; influence (a_i - a_bar)^2 - c b_i.
inline IdentityCheck variance_identity(const std::vector<double>& a, const std::vector<double>& b, double c,
                                       double target, double confidence = 0.95) {
    if (a.size() != b.size() || a.size() < 3) throw std::invalid_argument("identity needs paired samples");
    const double ma = mean_of(a);
    std::vector<double> psi(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) psi[i] = (a[i] - ma) * (a[i] - ma) - c * b[i];
    IdentityCheck r;
    r.estimate = variance_of(a) - c * mean_of(b);
    r.target = target;
    r.halfwidth =
        normal_quantile_two_sided(confidence) * std::sqrt(variance_of(psi) / static_cast<double>(a.size()));
    return r;
}

// Cov(a, b) - c * mean(d) against target; influence (a_i - a_bar)(b_i - b_bar) - c d_i.
inline IdentityCheck covariance_identity(const std::vector<double>& a, const std::vector<double>& b,
                                         const std::vector<double>& d, double c, double target,
                                         double confidence = 0.95) {
    if (a.size() != b.size() || a.size() != d.size() || a.size() < 3)
        throw std::invalid_argument("identity needs paired samples");
    const double ma = mean_of(a), mb = mean_of(b);
    std::vector<double> psi(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) psi[i] = (a[i] - ma) * (b[i] - mb) - c * d[i];
    IdentityCheck r;
    r.estimate = covariance_of(a, b) - c * mean_of(d);
    r.target = target;
    r.halfwidth =
        normal_quantile_two_sided(confidence) * std::sqrt(variance_of(psi) / static_cast<double>(a.size()));
    return r;
}

// Spacings x_1 - origin, x_2 - x_1, ... of sorted positions, at most max_count.
inline std::vector<double> spacings(const std::vector<double>& sorted, double origin, std::size_t max_count) {
    std::vector<double> out;
    double prev = origin;
    for (double x : sorted) {
        if (out.size() >= max_count) break;
        out.push_back(x - prev);
        prev = x;
    }
    return out;
}

}  // namespace hammersley
