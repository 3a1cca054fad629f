#pragma once

// Busemann functions B_alpha(x, y) = L(z, y) - L(z, x) with z far out in
// direction (cos alpha, sin alpha), alpha in (pi, 3pi/2). Anchors sit at radii
// r_k along the direction; a value is accepted once two consecutive radii
// give the same answer.

#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lpp.hpp"
#include "points.hpp"
#include "rng.hpp"

namespace hammersley {

class DirectionAngle {
public:
    explicit DirectionAngle(double alpha) : alpha_(alpha) {
        if (!(alpha > std::numbers::pi && alpha < 1.5 * std::numbers::pi))
            throw std::invalid_argument("alpha must lie in (pi, 3pi/2)");
    }
    static DirectionAngle from_tan(double tan_alpha) {
        if (!(tan_alpha > 0.0) || !std::isfinite(tan_alpha)) throw std::invalid_argument("tan alpha must be positive");
        return DirectionAngle(std::numbers::pi + std::atan(tan_alpha));
    }

    double alpha() const { return alpha_; }
    double tan() const { return std::tan(alpha_); }
    // Classical equilibrium intensity.
    double rho() const { return std::sqrt(tan()); }
    double phi() const { return 1.0 / tan(); }
    double lambda(double gamma = 2.0) const { return gamma / 2.0 * rho(); }
    double psi(double gamma = 2.0) const { return gamma * gamma / (2.0 * lambda(gamma)); }
    Point2 at_radius(double r) const { return {r * std::cos(alpha_), r * std::sin(alpha_)}; }

    friend bool operator<(const DirectionAngle& a, const DirectionAngle& b) { return a.alpha_ < b.alpha_; }

private:
    double alpha_;
};

// L(z, q) for every q northeast of z, from one sweep over the points.
class PointPassage {
public:
    PointPassage(const WeightedPointSet& points, Point2 z, double x_max, double t_max) {
        sub_ = detail::select_points(points, z.x, x_max, z.t, t_max);
        val_ = detail::chain_values(sub_.pts(), sub_.rank());
    }

    double at(Point2 q) const {
        double best = 0.0;
        const auto& pts = sub_.pts();
        for (std::size_t k = 0; k < pts.size() && pts[k].x <= q.x; ++k)
            if (pts[k].t <= q.t) best = std::max(best, val_[k]);
        return best;
    }

    // L(z, (x, t)) for each x of an increasing list.
    std::vector<double> row(double t, const std::vector<double>& xs) const {
        std::vector<double> out;
        out.reserve(xs.size());
        const auto& pts = sub_.pts();
        std::size_t k = 0;
        double best = 0.0;
        for (double x : xs) {
            for (; k < pts.size() && pts[k].x <= x; ++k)
                if (pts[k].t <= t) best = std::max(best, val_[k]);
            out.push_back(best);
        }
        return out;
    }

    // L(z, (x, t)) for each t of an increasing list.
    std::vector<double> column(double x, const std::vector<double>& ts) const {
        std::vector<std::pair<double, double>> tv;
        const auto& pts = sub_.pts();
        for (std::size_t k = 0; k < pts.size() && pts[k].x <= x; ++k) tv.emplace_back(pts[k].t, val_[k]);
        std::sort(tv.begin(), tv.end());
        std::vector<double> out;
        out.reserve(ts.size());
        std::size_t k = 0;
        double best = 0.0;
        for (double t : ts) {
            for (; k < tv.size() && tv[k].first <= t; ++k) best = std::max(best, tv[k].second);
            out.push_back(best);
        }
        return out;
    }

    const std::vector<WeightedPoint>& points() const { return sub_.pts(); }

private:
    detail::Subset sub_;
    std::vector<double> val_;
};

// Point sets covering [min_a r_k cos a, x_hi] x [min_a r_k sin a, t_hi] for a
// radius schedule r_k. A sampled region is grown one annulus at a time, each
// annulus from its own seed stream, so the points in any rectangle do not
// depend on how far the schedule was followed.
class GrowingRegion {
public:
    GrowingRegion(std::vector<DirectionAngle> dirs, std::vector<double> radii, double x_hi, double t_hi,
                  double intensity, WeightDistribution dist, std::uint64_t seed)
        : dirs_(std::move(dirs)), radii_(std::move(radii)), x_hi_(x_hi), t_hi_(t_hi), intensity_(intensity),
          dist_(std::move(dist)), seed_(seed) {
        validate();
    }

    // A fixed, already sampled region; it must cover the largest radius.
    GrowingRegion(std::vector<DirectionAngle> dirs, std::vector<double> radii, double x_hi, double t_hi,
                  WeightedPointSet fixed)
        : dirs_(std::move(dirs)), radii_(std::move(radii)), x_hi_(x_hi), t_hi_(t_hi) {
        validate();
        const Rect need = rect(radii_.size() - 1);
        const Rect& have = fixed.rect;
        if (have.x0 > need.x0 || have.x1 < need.x1 || have.t0 > need.t0 || have.t1 < need.t1)
            throw std::invalid_argument("region too small for the radius schedule");
        fixed_ = std::make_shared<WeightedPointSet>(std::move(fixed));
    }

    std::size_t size() const { return radii_.size(); }
    double radius(std::size_t k) const { return radii_.at(k); }
    const std::vector<DirectionAngle>& directions() const { return dirs_; }
    double x_hi() const { return x_hi_; }
    double t_hi() const { return t_hi_; }

    Rect rect(std::size_t k) const {
        double x0 = std::min(0.0, x_hi_ - 1.0), t0 = std::min(0.0, t_hi_ - 1.0);
        for (const auto& d : dirs_) {
            Point2 z = d.at_radius(radii_.at(k));
            x0 = std::min(x0, z.x);
            t0 = std::min(t0, z.t);
        }
        return {x0, x_hi_, t0, t_hi_};
    }

    // Points covering rect(k).
    const WeightedPointSet& points(std::size_t k) {
        if (fixed_) return *fixed_;
        while (grown_ <= k) grow();
        return current_;
    }

private:
    void validate() const {
        if (dirs_.empty() || radii_.empty()) throw std::invalid_argument("need directions and radii");
        for (std::size_t i = 0; i < radii_.size(); ++i)
            if (!(radii_[i] > 0.0) || (i && !(radii_[i] > radii_[i - 1])))
                throw std::invalid_argument("radii must be positive and increasing");
    }

    void grow() {
        const std::size_t k = grown_;
        const Rect r = rect(k);
        std::vector<WeightedPoint> pts = current_.points;
        auto add = [&](const Rect& part, std::uint64_t index) {
            if (!(part.x1 > part.x0) || !(part.t1 > part.t0)) return;
            auto s = sample_point_set(part, intensity_, dist_, derive_seed(seed_, stream::region, index));
            pts.insert(pts.end(), s.points.begin(), s.points.end());
        };
        if (k == 0) {
            add(r, 0);
        } else {
            const Rect p = rect(k - 1);
            add({r.x0, p.x0, r.t0, r.t1}, 2 * k);
            add({p.x0, r.x1, r.t0, p.t0}, 2 * k + 1);
        }
        current_ = make_point_set(r, std::move(pts), seed_);
        ++grown_;
    }

    std::vector<DirectionAngle> dirs_;
    std::vector<double> radii_;
    double x_hi_ = 0, t_hi_ = 0, intensity_ = 1;
    WeightDistribution dist_ = WeightDistribution::dirac1();
    std::uint64_t seed_ = 0;
    std::shared_ptr<const WeightedPointSet> fixed_;
    WeightedPointSet current_;
    std::size_t grown_ = 0;
};

// r_k = r0 2^k, k = 0..count-1.
inline std::vector<double> geometric_radii(double r0, std::size_t count) {
    std::vector<double> r;
    for (std::size_t k = 0; k < count; ++k) r.push_back(r0 * std::ldexp(1.0, static_cast<int>(k)));
    return r;
}

struct BusemannEstimate {
    double value = 0;
    double stabilized_at = 0;  // radius of the second of the two agreeing anchors
    bool converged = false;
};

inline BusemannEstimate estimate_busemann(GrowingRegion& region, const DirectionAngle& alpha, Point2 x, Point2 y) {
    if (std::max(x.x, y.x) > region.x_hi() || std::max(x.t, y.t) > region.t_hi())
        throw std::invalid_argument("region does not contain x and y");
    BusemannEstimate e;
    std::optional<double> prev;
    for (std::size_t k = 0; k < region.size(); ++k) {
        const Point2 z = alpha.at_radius(region.radius(k));
        if (!(z.x < std::min(x.x, y.x) && z.t < std::min(x.t, y.t)))
            throw std::invalid_argument("anchor does not lie southwest of x and y");
        PointPassage pp(region.points(k), z, region.x_hi(), region.t_hi());
        const double v = pp.at(y) - pp.at(x);
        e.value = v;
        e.stabilized_at = region.radius(k);
        if (prev && *prev == v) {
            e.converged = true;
            return e;
        }
        prev = v;
    }
    return e;
}

namespace detail {

// Jumps of an increasing step function sampled at its candidate jump
// positions; values[0] belongs to the base position.
inline AtomicMeasure increments(const std::vector<double>& pos, const std::vector<double>& values) {
    std::vector<Atom> atoms;
    for (std::size_t i = 1; i < pos.size(); ++i)
        if (values[i] > values[i - 1]) atoms.push_back({pos[i], values[i] - values[i - 1]});
    return AtomicMeasure(std::move(atoms));
}

// nu((0, x]) = B((0,0), (x,0)) on [0, h] and nu*((0, s]) = B((0,0), (0,s)) on [0, h].
struct AxisProfiles {
    AtomicMeasure nu, nu_star;
};

inline AxisProfiles axis_profiles(const WeightedPointSet& points, Point2 z, double h, bool row, bool col,
                                  double x_hi, double t_hi) {
    PointPassage pp(points, z, x_hi, t_hi);
    AxisProfiles out;
    if (row) {
        std::vector<double> xs{0.0};
        for (const auto& p : pp.points())
            if (p.x > 0.0 && p.x <= h && p.t <= 0.0) xs.push_back(p.x);
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        out.nu = increments(xs, pp.row(0.0, xs));
    }
    if (col) {
        std::vector<double> ts{0.0};
        for (const auto& p : pp.points())
            if (p.t > 0.0 && p.t <= h && p.x <= 0.0) ts.push_back(p.t);
        std::sort(ts.begin(), ts.end());
        ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
        out.nu_star = increments(ts, pp.column(0.0, ts));
    }
    return out;
}

}  // namespace detail

struct NuSample {
    AtomicMeasure nu;       // nu_alpha on [0, h]
    AtomicMeasure nu_star;  // nu*_alpha on [0, h], when requested
    double stabilized_at = 0;
    bool converged = false;
};

// nu_alpha((0, x]) = B_alpha((0,0), (x,0)) on [0, h], and optionally
// nu*_alpha((0, s]) = B_alpha((0,0), (0,s)). Both must repeat at two
// consecutive radii. The region must reach x_hi >= h (and t_hi >= h for nu*).
inline NuSample sample_nu_alpha(GrowingRegion& region, const DirectionAngle& alpha, double h, bool with_star = false) {
    if (!(h > 0.0)) throw std::invalid_argument("h must be positive");
    if (region.x_hi() < h || (with_star && region.t_hi() < h))
        throw std::invalid_argument("region does not cover the sampling interval");
    NuSample s;
    std::optional<detail::AxisProfiles> prev;
    for (std::size_t k = 0; k < region.size(); ++k) {
        auto cur = detail::axis_profiles(region.points(k), alpha.at_radius(region.radius(k)), h, true, with_star,
                                         region.x_hi(), region.t_hi());
        s.nu = cur.nu;
        s.nu_star = cur.nu_star;
        s.stabilized_at = region.radius(k);
        if (prev && prev->nu == cur.nu && prev->nu_star == cur.nu_star) {
            s.converged = true;
            return s;
        }
        prev = std::move(cur);
    }
    return s;
}

struct MultiClassSample {
    std::vector<AtomicMeasure> measures;  // one per angle, in angle order
    double stabilized_at = 0;
    bool converged = false;
};

// nu_alpha on [0, h] for several angles on one point realization, all read at
// a common anchor radius.
inline MultiClassSample multi_class_sample(GrowingRegion& region, const std::vector<DirectionAngle>& angles, double h) {
    if (angles.empty()) throw std::invalid_argument("need at least one angle");
    for (std::size_t i = 1; i < angles.size(); ++i)
        if (!(angles[i - 1] < angles[i])) throw std::invalid_argument("angles must be strictly increasing");
    if (region.x_hi() < h) throw std::invalid_argument("region does not cover the sampling interval");
    MultiClassSample s;
    std::vector<AtomicMeasure> prev;
    for (std::size_t k = 0; k < region.size(); ++k) {
        std::vector<AtomicMeasure> cur;
        for (const auto& a : angles)
            cur.push_back(detail::axis_profiles(region.points(k), a.at_radius(region.radius(k)), h, true, false,
                                                region.x_hi(), region.t_hi())
                              .nu);
        s.measures = cur;
        s.stabilized_at = region.radius(k);
        if (k > 0 && prev == cur) {
            s.converged = true;
            return s;
        }
        prev = std::move(cur);
    }
    return s;
}

// True when a((p, q]) >= b((p, q]) for all mesh pairs p < q.
inline bool dominates_on_mesh(const AtomicMeasure& a, const AtomicMeasure& b, const std::vector<double>& mesh) {
    for (std::size_t i = 0; i < mesh.size(); ++i)
        for (std::size_t j = i + 1; j < mesh.size(); ++j)
            if (a.mass(mesh[i], mesh[j]) < b.mass(mesh[i], mesh[j])) return false;
    return true;
}

}  // namespace hammersley
