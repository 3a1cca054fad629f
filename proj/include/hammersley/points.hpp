#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rng.hpp"

namespace hammersley {

class WeightDistribution {
public:
    enum class Kind { Dirac, Exponential, BoundedDiscrete };

    static WeightDistribution dirac1() { return WeightDistribution(Kind::Dirac); }

    static WeightDistribution exponential(double rate) {
        if (!(rate > 0.0) || !std::isfinite(rate))
            throw std::invalid_argument("exponential rate must be positive");
        WeightDistribution d(Kind::Exponential);
        d.rate_ = rate;
        return d;
    }

    static WeightDistribution bounded_discrete(std::vector<double> values, std::vector<double> probs) {
        if (values.empty() || values.size() != probs.size())
            throw std::invalid_argument("bounded discrete law needs matching values and probabilities");
        std::vector<std::size_t> order(values.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
        WeightDistribution d(Kind::BoundedDiscrete);
        double total = 0.0;
        for (auto i : order) {
            if (!(values[i] > 0.0) || !std::isfinite(values[i]))
                throw std::invalid_argument("weights must be strictly positive");
            if (!(probs[i] >= 0.0)) throw std::invalid_argument("probabilities must be nonnegative");
            if (probs[i] == 0.0) continue;
            if (!d.values_.empty() && d.values_.back() == values[i]) {
                d.probs_.back() += probs[i];
            } else {
                d.values_.push_back(values[i]);
                d.probs_.push_back(probs[i]);
            }
            total += probs[i];
        }
        if (!(total > 0.0)) throw std::invalid_argument("probabilities sum to zero");
        double acc = 0.0;
        for (auto& p : d.probs_) {
            p /= total;
            acc += p;
            d.cdf_.push_back(acc);
        }
        d.cdf_.back() = 1.0;
        return d;
    }

    Kind kind() const { return kind_; }
    double rate() const { return rate_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& probabilities() const { return probs_; }

    // Every weight equals one: the classical Hammersley model.
    bool classical() const {
        return kind_ == Kind::Dirac || (kind_ == Kind::BoundedDiscrete && values_.size() == 1 && values_[0] == 1.0);
    }

    double mean() const {
        switch (kind_) {
            case Kind::Dirac: return 1.0;
            case Kind::Exponential: return 1.0 / rate_;
            case Kind::BoundedDiscrete: {
                double m = 0.0;
                for (std::size_t i = 0; i < values_.size(); ++i) m += values_[i] * probs_[i];
                return m;
            }
        }
        return 0.0;
    }

    template <class URNG>
    double sample(URNG& rng) const {
        switch (kind_) {
            case Kind::Dirac: return 1.0;
            case Kind::Exponential: {
                // Draws of exactly zero are remapped so weights stay positive.
                double w = std::exponential_distribution<double>(rate_)(rng);
                return w > 0.0 ? w : std::numeric_limits<double>::min();
            }
            case Kind::BoundedDiscrete: {
                if (values_.size() == 1) return values_[0];
                double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
                auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
                if (it == cdf_.end()) --it;
                return values_[static_cast<std::size_t>(it - cdf_.begin())];
            }
        }
        return 1.0;
    }

    std::string name() const {
        std::ostringstream os;
        switch (kind_) {
            case Kind::Dirac: os << "dirac1"; break;
            case Kind::Exponential: os << "exponential(" << rate_ << ")"; break;
            case Kind::BoundedDiscrete: {
                os << "discrete{";
                for (std::size_t i = 0; i < values_.size(); ++i)
                    os << (i ? "," : "") << values_[i] << ":" << probs_[i];
                os << "}";
                break;
            }
        }
        return os.str();
    }

private:
    explicit WeightDistribution(Kind k) : kind_(k) {}
    Kind kind_;
    double rate_ = 1.0;
    std::vector<double> values_, probs_, cdf_;
};

// ∫_0^∞ sqrt(1 - F(x)) dx in closed form.
inline double sqrt_tail_integral(const WeightDistribution& dist) {
    switch (dist.kind()) {
        case WeightDistribution::Kind::Dirac: return 1.0;
        case WeightDistribution::Kind::Exponential: return 2.0 / dist.rate();
        case WeightDistribution::Kind::BoundedDiscrete: {
            // 1 - F is constant on [v_{j-1}, v_j), equal to P(W >= v_j).
            const auto& v = dist.values();
            const auto& p = dist.probabilities();
            double tail = 1.0, prev = 0.0, sum = 0.0;
            for (std::size_t j = 0; j < v.size(); ++j) {
                sum += (v[j] - prev) * std::sqrt(std::max(tail, 0.0));
                tail -= p[j];
                prev = v[j];
            }
            return sum;
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

struct Rect {
    double x0 = 0, x1 = 0, t0 = 0, t1 = 0;
    double width() const { return x1 - x0; }
    double height() const { return t1 - t0; }
    double area() const { return width() * height(); }
    bool contains(double x, double t) const { return x >= x0 && x <= x1 && t >= t0 && t <= t1; }
};

struct WeightedPoint {
    double x = 0, t = 0, w = 1;
    friend bool operator==(const WeightedPoint&, const WeightedPoint&) = default;
};

struct WeightedPointSet {
    Rect rect;
    // Sorted by x, x-ties broken by t.
    std::vector<WeightedPoint> points;
    std::uint64_t seed = 0;
    // Either empty or the dense rank of each point's t among all points.
    std::vector<std::uint32_t> t_rank;

    std::size_t size() const { return points.size(); }
};

inline bool x_then_t(const WeightedPoint& a, const WeightedPoint& b) {
    return a.x < b.x || (a.x == b.x && a.t < b.t);
}

// Dense ranks of t, computed by sorting.
inline std::vector<std::uint32_t> dense_t_ranks(const std::vector<WeightedPoint>& pts) {
    std::vector<std::uint32_t> idx(pts.size());
    std::iota(idx.begin(), idx.end(), 0u);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return pts[a].t < pts[b].t; });
    std::vector<std::uint32_t> rank(pts.size());
    std::uint32_t r = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (k > 0 && pts[idx[k]].t != pts[idx[k - 1]].t) ++r;
        rank[idx[k]] = r;
    }
    return rank;
}

inline void validate_rect(const Rect& r) {
    if (!(r.x1 > r.x0) || !(r.t1 > r.t0) || !std::isfinite(r.area()))
        throw std::invalid_argument("rectangle must be nondegenerate with x0 < x1 and t0 < t1");
}

// Builds a point set from hand-made points; sorts and validates them.
inline WeightedPointSet make_point_set(const Rect& rect, std::vector<WeightedPoint> pts, std::uint64_t seed = 0) {
    validate_rect(rect);
    for (const auto& p : pts) {
        if (!rect.contains(p.x, p.t)) throw std::invalid_argument("point outside rectangle");
        if (!(p.w > 0.0)) throw std::invalid_argument("weights must be strictly positive");
    }
    std::sort(pts.begin(), pts.end(), x_then_t);
    WeightedPointSet s{rect, std::move(pts), seed, {}};
    s.t_rank = dense_t_ranks(s.points);
    return s;
}

namespace detail {

// n sorted uniforms on (a, b) from normalized exponential spacings.
inline void sorted_uniforms(Rng& rng, std::size_t n, double a, double b, std::vector<double>& out) {
    out.resize(n);
    if (n == 0) return;
    std::exponential_distribution<double> e(1.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += e(rng);
        out[i] = acc;
    }
    acc += e(rng);
    const double scale = (b - a) / acc;
    for (auto& v : out) v = a + v * scale;
}

inline std::size_t poisson_count(Rng& rng, double mean) {
    if (mean <= 0.0) return 0;
    return static_cast<std::size_t>(std::poisson_distribution<long long>(mean)(rng));
}

}  // namespace detail

// Compound Poisson process of the given intensity in rect, sorted by x. The
// count is Poisson(area * intensity); conditioned on the count, x and t
// coordinates are independent sorted uniform samples paired by a uniform
// random permutation, so the t-ranks come for free.
inline WeightedPointSet sample_point_set(const Rect& rect, double intensity, const WeightDistribution& dist,
                                         std::uint64_t seed) {
    validate_rect(rect);
    if (!(intensity > 0.0) || !std::isfinite(intensity)) throw std::invalid_argument("intensity must be positive");
    Rng rng = make_rng(seed);
    const std::size_t n = detail::poisson_count(rng, rect.area() * intensity);
    if (n > std::numeric_limits<std::uint32_t>::max()) throw std::length_error("point count overflow");
    std::vector<double> xs, ts;
    detail::sorted_uniforms(rng, n, rect.x0, rect.x1, xs);
    detail::sorted_uniforms(rng, n, rect.t0, rect.t1, ts);
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), rng);

    WeightedPointSet s;
    s.rect = rect;
    s.seed = seed;
    s.points.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.points[i] = {xs[i], ts[perm[i]], dist.sample(rng)};

    bool distinct = true;
    for (std::size_t i = 1; i < n && distinct; ++i) distinct = xs[i] > xs[i - 1] && ts[i] > ts[i - 1];
    if (distinct) {
        s.t_rank = std::move(perm);
    } else {
        std::stable_sort(s.points.begin(), s.points.end(), x_then_t);
        s.t_rank = dense_t_ranks(s.points);
    }
    return s;
}

struct Atom {
    double pos = 0, mass = 0;
    friend bool operator==(const Atom&, const Atom&) = default;
};

// Locally finite atomic measure with the signed cumulative process
// nu(x) = nu((0,x]) for x >= 0 and -nu((x,0]) for x < 0.
class AtomicMeasure {
public:
    AtomicMeasure() = default;

    // Atoms at equal positions are merged.
    explicit AtomicMeasure(std::vector<Atom> atoms) {
        for (const auto& a : atoms)
            if (!(a.mass > 0.0) || !std::isfinite(a.pos) || !std::isfinite(a.mass))
                throw std::invalid_argument("atoms need finite position and positive mass");
        std::stable_sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.pos < b.pos; });
        for (const auto& a : atoms) {
            if (!atoms_.empty() && atoms_.back().pos == a.pos)
                atoms_.back().mass += a.mass;
            else
                atoms_.push_back(a);
        }
        prefix_.resize(atoms_.size() + 1, 0.0);
        for (std::size_t i = 0; i < atoms_.size(); ++i) prefix_[i + 1] = prefix_[i] + atoms_[i].mass;
        origin_ = below_or_at(0.0);
    }

    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    bool empty() const { return atoms_.empty(); }
    double total_mass() const { return prefix_.empty() ? 0.0 : prefix_.back(); }

    // Number of atoms at positions <= x.
    std::size_t count_at_or_below(double x) const {
        return static_cast<std::size_t>(
            std::upper_bound(atoms_.begin(), atoms_.end(), x, [](double v, const Atom& a) { return v < a.pos; }) -
            atoms_.begin());
    }
    // Number of atoms at positions < x.
    std::size_t count_below(double x) const {
        return static_cast<std::size_t>(
            std::lower_bound(atoms_.begin(), atoms_.end(), x, [](const Atom& a, double v) { return a.pos < v; }) -
            atoms_.begin());
    }

    double cumulative(double x) const { return below_or_at(x) - origin_; }
    // Left limit nu(x-).
    double left_limit(double x) const { return prefix_.empty() ? 0.0 : prefix_[count_below(x)] - origin_; }
    // nu((a, b]).
    double mass(double a, double b) const { return b <= a ? 0.0 : below_or_at(b) - below_or_at(a); }

    // Cumulative process built from prefix sums with exact subtraction when
    // masses are integers.
    double prefix(std::size_t k) const { return prefix_.empty() ? 0.0 : prefix_[k]; }
    double origin_offset() const { return origin_; }

    AtomicMeasure restricted(double lo, double hi) const {
        std::vector<Atom> out;
        for (const auto& a : atoms_)
            if (a.pos >= lo && a.pos <= hi) out.push_back(a);
        return AtomicMeasure(std::move(out));
    }

    friend bool operator==(const AtomicMeasure& a, const AtomicMeasure& b) { return a.atoms_ == b.atoms_; }

private:
    double below_or_at(double x) const { return prefix_.empty() ? 0.0 : prefix_[count_at_or_below(x)]; }

    std::vector<Atom> atoms_;
    std::vector<double> prefix_;
    double origin_ = 0.0;
};

// Atoms at Poisson(intensity) positions in [a, b] with iid masses.
inline AtomicMeasure sample_atomic_poisson(double a, double b, double intensity, const WeightDistribution& mass_dist,
                                           std::uint64_t seed) {
    if (!(a < b)) throw std::invalid_argument("interval must satisfy a < b");
    if (!(intensity > 0.0)) throw std::invalid_argument("intensity must be positive");
    Rng rng = make_rng(seed);
    const std::size_t n = detail::poisson_count(rng, (b - a) * intensity);
    std::vector<double> pos;
    detail::sorted_uniforms(rng, n, a, b, pos);
    std::vector<Atom> atoms(n);
    for (std::size_t i = 0; i < n; ++i) atoms[i] = {pos[i], mass_dist.sample(rng)};
    return AtomicMeasure(std::move(atoms));
}

enum class Side { Left, Right };

// Unit atoms at k / density inside [lo, hi], with k >= 1 (right) or k <= -1 (left).
inline AtomicMeasure periodic_measure(double lo, double hi, double density, Side side) {
    if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw std::invalid_argument("invalid interval");
    if (!(density > 0.0)) throw std::invalid_argument("density must be positive");
    std::vector<Atom> atoms;
    if (side == Side::Right) {
        long long k = std::max<long long>(1, static_cast<long long>(std::floor(lo * density)) - 1);
        for (;; ++k) {
            double p = static_cast<double>(k) / density;
            if (p > hi) break;
            if (p >= lo) atoms.push_back({p, 1.0});
        }
    } else {
        long long k = std::min<long long>(-1, static_cast<long long>(std::ceil(hi * density)) + 1);
        for (;; --k) {
            double p = static_cast<double>(k) / density;
            if (p < lo) break;
            if (p <= hi) atoms.push_back({p, 1.0});
        }
    }
    return AtomicMeasure(std::move(atoms));
}

// ---- CSV ---------------------------------------------------------------

inline void write_points_csv(std::ostream& os, const std::vector<WeightedPoint>& pts) {
    os << "x,t,w\n" << std::setprecision(17);
    for (const auto& p : pts) os << p.x << ',' << p.t << ',' << p.w << '\n';
}

inline void write_measure_csv(std::ostream& os, const AtomicMeasure& m) {
    os << "pos,mass\n" << std::setprecision(17);
    for (const auto& a : m.atoms()) os << a.pos << ',' << a.mass << '\n';
}

namespace detail {
inline std::vector<std::vector<double>> read_csv_rows(std::istream& is, const std::string& header, std::size_t cols) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("empty csv");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header) throw std::runtime_error("expected csv header '" + header + "'");
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != cols) throw std::runtime_error("bad csv row: " + line);
        rows.push_back(std::move(row));
    }
    return rows;
}
}  // namespace detail

inline std::vector<WeightedPoint> read_points_csv(std::istream& is) {
    std::vector<WeightedPoint> out;
    for (const auto& r : detail::read_csv_rows(is, "x,t,w", 3)) out.push_back({r[0], r[1], r[2]});
    return out;
}

inline AtomicMeasure read_measure_csv(std::istream& is) {
    std::vector<Atom> out;
    for (const auto& r : detail::read_csv_rows(is, "pos,mass", 2)) out.push_back({r[0], r[1]});
    return AtomicMeasure(std::move(out));
}

}  // namespace hammersley
