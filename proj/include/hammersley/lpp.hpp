#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "points.hpp"

namespace hammersley {

struct Point2 {
    double x = 0, t = 0;
};

struct PassagePath {
    std::vector<WeightedPoint> points;  // strictly increasing in both coordinates
    double value = 0;
};

struct PassageResult {
    double value = 0;
    PassagePath geodesic;
    std::optional<double> exit;      // rightmost maximizer
    std::optional<double> exit_sup;  // rightmost maximizer
    std::optional<double> exit_inf;  // leftmost maximizer
    bool saturated = false;          // leftmost maximizer sits at the truncation edge
};

struct SourcesSinks {
    AtomicMeasure sources;  // on [0, x_max]
    AtomicMeasure sinks;    // on (0, t_max]
};

inline void write_path_csv(std::ostream& os, const PassagePath& path) { write_points_csv(os, path.points); }

namespace detail {

inline constexpr double inf = std::numeric_limits<double>::infinity();

// Best entry into a point: passage value plus the sup and inf of the
// maximizing exit set.
struct ExitNode {
    double value = -inf, sup = -inf, low = inf;

    void absorb(const ExitNode& o) {
        if (o.value > value) {
            *this = o;
        } else if (o.value == value) {
            sup = std::max(sup, o.sup);
            low = std::min(low, o.low);
        }
    }
    static ExitNode as_predecessor(const ExitNode& n, std::size_t, const WeightedPoint&) { return n; }
};

inline constexpr std::int64_t from_source = -1;
inline constexpr std::int64_t from_sink = -2;

// ExitNode plus the predecessor used by the lowest geodesic. Among equal
// values the predecessor with the smaller t (then larger x) wins; source
// entries rank below every point, sink entries above.
struct PathNode {
    double value = -inf, sup = -inf, low = inf;
    double key_t = inf, key_x = -inf;
    std::int64_t pred = from_source;

    bool lower_than(const PathNode& o) const { return key_t < o.key_t || (key_t == o.key_t && key_x > o.key_x); }

    void absorb(const PathNode& o) {
        if (o.value > value) {
            *this = o;
        } else if (o.value == value) {
            sup = std::max(sup, o.sup);
            low = std::min(low, o.low);
            if (o.lower_than(*this)) {
                key_t = o.key_t;
                key_x = o.key_x;
                pred = o.pred;
            }
        }
    }
    static PathNode as_predecessor(PathNode n, std::size_t i, const WeightedPoint& p) {
        n.key_t = p.t;
        n.key_x = p.x;
        n.pred = static_cast<std::int64_t>(i);
        return n;
    }
};

template <class Node>
class PrefixMax {
public:
    explicit PrefixMax(std::size_t n) : tree_(n) {}
    void update(std::size_t rank, const Node& v) {
        for (std::size_t i = rank + 1; i <= tree_.size(); i += i & (~i + 1)) tree_[i - 1].absorb(v);
    }
    // Best over ranks [0, count).
    Node query(std::size_t count) const {
        Node r;
        for (std::size_t i = count; i > 0; i -= i & (~i + 1)) r.absorb(tree_[i - 1]);
        return r;
    }

private:
    std::vector<Node> tree_;
};

// Chain DP over points sorted by (x, t) with dense t-ranks. entry(i) is the
// best way to start a chain at point i; visit(i, node) receives the value of
// the best chain ending at i. Predecessors need strictly smaller x and t.
template <class Node, class Entry, class Visit>
void chain_sweep(const std::vector<WeightedPoint>& pts, const std::vector<std::uint32_t>& rank, Entry&& entry,
                 Visit&& visit) {
    const std::size_t n = pts.size();
    std::uint32_t nranks = 0;
    for (auto r : rank) nranks = std::max(nranks, r + 1);
    PrefixMax<Node> fen(nranks);
    std::vector<Node> group;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && pts[j].x == pts[i].x) ++j;
        group.clear();
        for (std::size_t k = i; k < j; ++k) {
            Node best = entry(k);
            best.absorb(fen.query(rank[k]));
            best.value += pts[k].w;
            visit(k, best);
            group.push_back(best);
        }
        for (std::size_t k = i; k < j; ++k) fen.update(rank[k], Node::as_predecessor(group[k - i], k, pts[k]));
        i = j;
    }
}

// Value-only chain DP.
struct ValueNode {
    double value = -inf;
    void absorb(const ValueNode& o) { value = std::max(value, o.value); }
    static ValueNode as_predecessor(const ValueNode& n, std::size_t, const WeightedPoint&) { return n; }
};

inline double max_chain_weight(const std::vector<WeightedPoint>& pts, const std::vector<std::uint32_t>& rank) {
    bool unit = true;
    for (const auto& p : pts) unit = unit && p.w == 1.0;
    double best = 0.0;
    if (unit) {
        // Patience sorting: tops[k] is the least t-rank ending a chain of length k + 1.
        std::vector<std::uint32_t> tops;
        std::vector<std::size_t> pos;
        std::size_t i = 0;
        while (i < pts.size()) {
            std::size_t j = i;
            while (j < pts.size() && pts[j].x == pts[i].x) ++j;
            pos.clear();
            for (std::size_t k = i; k < j; ++k)
                pos.push_back(static_cast<std::size_t>(std::lower_bound(tops.begin(), tops.end(), rank[k]) -
                                                       tops.begin()));
            for (std::size_t k = i; k < j; ++k) {
                std::size_t p = pos[k - i];
                if (p == tops.size())
                    tops.push_back(rank[k]);
                else
                    tops[p] = std::min(tops[p], rank[k]);
            }
            i = j;
        }
        return static_cast<double>(tops.size());
    }
    chain_sweep<ValueNode>(
        pts, rank, [](std::size_t) { return ValueNode{0.0}; },
        [&](std::size_t, const ValueNode& v) { best = std::max(best, v.value); });
    return best;
}

// Best weight of a chain ending at each point.
inline std::vector<double> chain_values(const std::vector<WeightedPoint>& pts, const std::vector<std::uint32_t>& rank) {
    std::vector<double> out(pts.size());
    bool unit = true;
    for (const auto& p : pts) unit = unit && p.w == 1.0;
    if (unit) {
        std::vector<std::uint32_t> tops;
        std::size_t i = 0;
        while (i < pts.size()) {
            std::size_t j = i;
            while (j < pts.size() && pts[j].x == pts[i].x) ++j;
            for (std::size_t k = i; k < j; ++k)
                out[k] = static_cast<double>(std::lower_bound(tops.begin(), tops.end(), rank[k]) - tops.begin()) + 1.0;
            for (std::size_t k = i; k < j; ++k) {
                const std::size_t p = static_cast<std::size_t>(out[k]) - 1;
                if (p == tops.size())
                    tops.push_back(rank[k]);
                else
                    tops[p] = std::min(tops[p], rank[k]);
            }
            i = j;
        }
        return out;
    }
    chain_sweep<ValueNode>(
        pts, rank, [](std::size_t) { return ValueNode{0.0}; },
        [&](std::size_t k, const ValueNode& v) { out[k] = v.value; });
    return out;
}

// Points of a set inside a window. When every point qualifies the subset
// views the original storage, which must then outlive it.
struct Subset {
    const std::vector<WeightedPoint>* view = nullptr;
    const std::vector<std::uint32_t>* view_rank = nullptr;
    std::vector<WeightedPoint> own_pts;
    std::vector<std::uint32_t> own_rank;

    const std::vector<WeightedPoint>& pts() const { return view ? *view : own_pts; }
    const std::vector<std::uint32_t>& rank() const { return view ? *view_rank : own_rank; }
};

// Points with lo_x < x <= hi_x and lo_t < t <= hi_t, with dense t-ranks.
inline Subset select_points(const WeightedPointSet& s, double lo_x, double hi_x, double lo_t, double hi_t) {
    Subset out;
    const bool ranked = s.t_rank.size() == s.points.size();
    if (ranked && !s.points.empty()) {
        double tmin = inf, tmax = -inf;
        for (const auto& p : s.points) {
            tmin = std::min(tmin, p.t);
            tmax = std::max(tmax, p.t);
        }
        if (s.points.front().x > lo_x && s.points.back().x <= hi_x && tmin > lo_t && tmax <= hi_t) {
            out.view = &s.points;
            out.view_rank = &s.t_rank;
            return out;
        }
    }
    auto first = std::upper_bound(s.points.begin(), s.points.end(), lo_x,
                                  [](double v, const WeightedPoint& p) { return v < p.x; });
    for (auto it = first; it != s.points.end() && it->x <= hi_x; ++it)
        if (it->t > lo_t && it->t <= hi_t) out.own_pts.push_back(*it);
    out.own_rank = dense_t_ranks(out.own_pts);
    return out;
}

inline void check_order(Point2 p, Point2 q) {
    if (!(p.x <= q.x && p.t <= q.t) || (p.x == q.x && p.t == q.t))
        throw std::invalid_argument("passage needs p < q coordinatewise");
}

// Position of the last atom at or below x (strict: below x), or -inf.
inline double last_atom(const AtomicMeasure& m, double x, bool strict) {
    std::size_t k = strict ? m.count_below(x) : m.count_at_or_below(x);
    return k == 0 ? -inf : m.atoms()[k - 1].pos;
}

// Boundary data for chains started on the x-axis (nu restricted to
// [z_min, .)) and optionally on the t-axis (sinks, exit coordinate -s).
struct Boundary {
    const AtomicMeasure* nu = nullptr;
    const AtomicMeasure* sinks = nullptr;
    double z_min = 0;

    // Entries into the points of a subset from the axes, visited in x order.
    // Values exclude the point's weight and equal nu(p.x-) and sinks(p.t-).
    template <class Node>
    class Entries {
    public:
        Entries(const Boundary& b, const Subset& sub) : b_(b), pts_(sub.pts()) {
            if (!b.sinks) return;
            const auto& rank = sub.rank();
            std::uint32_t nranks = 0;
            for (auto r : rank) nranks = std::max(nranks, r + 1);
            std::vector<double> t_of_rank(nranks);
            for (std::size_t k = 0; k < pts_.size(); ++k) t_of_rank[rank[k]] = pts_[k].t;
            sinks_below_.resize(nranks);
            const auto& atoms = b.sinks->atoms();
            std::uint32_t j = 0;
            for (std::uint32_t r = 0; r < nranks; ++r) {
                while (j < atoms.size() && atoms[j].pos < t_of_rank[r]) ++j;
                sinks_below_[r] = j;
            }
            rank_ = &rank;
        }

        Node operator()(std::size_t k) {
            const WeightedPoint& p = pts_[k];
            Node n;
            if (b_.nu) {
                const auto& atoms = b_.nu->atoms();
                if (k < last_k_) src_ = 0;
                last_k_ = k;
                while (src_ < atoms.size() && atoms[src_].pos < p.x) ++src_;
                Node s;
                s.value = b_.nu->prefix(src_) - b_.nu->origin_offset();
                s.sup = p.x;
                s.low = std::max(b_.z_min, src_ ? atoms[src_ - 1].pos : -inf);
                if constexpr (std::is_same_v<Node, PathNode>) {
                    s.key_t = -inf;
                    s.key_x = inf;
                    s.pred = from_source;
                }
                n.absorb(s);
            }
            if (b_.sinks) {
                const std::uint32_t j = sinks_below_[(*rank_)[k]];
                Node s;
                s.value = b_.sinks->prefix(j) - b_.sinks->origin_offset();
                s.sup = -std::max(0.0, j ? b_.sinks->atoms()[j - 1].pos : -inf);
                s.low = -p.t;
                if constexpr (std::is_same_v<Node, PathNode>) {
                    s.key_t = inf;
                    s.key_x = -inf;
                    s.pred = from_sink;
                }
                n.absorb(s);
            }
            return n;
        }

    private:
        const Boundary& b_;
        const std::vector<WeightedPoint>& pts_;
        const std::vector<std::uint32_t>* rank_ = nullptr;
        std::vector<std::uint32_t> sinks_below_;
        std::size_t src_ = 0, last_k_ = 0;
    };

    // Chains with no interior point.
    template <class Node = ExitNode>
    Node empty(double x, double t) const {
        Node n;
        if (nu) {
            Node s;
            s.value = nu->cumulative(x);
            s.sup = x;
            s.low = std::max(z_min, last_atom(*nu, x, false));
            if constexpr (std::is_same_v<Node, PathNode>) {
                s.key_t = -inf;
                s.key_x = inf;
                s.pred = from_source;
            }
            n.absorb(s);
        }
        if (sinks) {
            Node s;
            s.value = sinks->cumulative(t);
            s.sup = -std::max(0.0, last_atom(*sinks, t, false));
            s.low = -t;
            if constexpr (std::is_same_v<Node, PathNode>) {
                s.key_t = inf;
                s.key_x = -inf;
                s.pred = from_sink;
            }
            n.absorb(s);
        }
        return n;
    }
};

inline PassagePath trace_path(const std::vector<WeightedPoint>& pts, const std::vector<std::int64_t>& pred,
                              std::int64_t last) {
    PassagePath path;
    for (std::int64_t k = last; k >= 0; k = pred[static_cast<std::size_t>(k)])
        path.points.push_back(pts[static_cast<std::size_t>(k)]);
    std::reverse(path.points.begin(), path.points.end());
    for (const auto& p : path.points) path.value += p.w;
    return path;
}

inline PassageResult boundary_passage(const Boundary& b, const WeightedPointSet& points, double x, double t,
                                      bool with_path) {
    Subset sub = select_points(points, b.z_min, x, 0.0, t);
    PassageResult r;
    if (with_path) {
        std::vector<std::int64_t> pred(sub.pts().size());
        PathNode best = b.empty<PathNode>(x, t);
        chain_sweep<PathNode>(
            sub.pts(), sub.rank(), Boundary::Entries<PathNode>(b, sub),
            [&](std::size_t k, const PathNode& n) {
                pred[k] = n.pred;
                best.absorb(PathNode::as_predecessor(n, k, sub.pts()[k]));
            });
        r.value = best.value;
        r.exit_sup = best.sup;
        r.exit_inf = best.low;
        if (best.pred >= 0) r.geodesic = trace_path(sub.pts(), pred, best.pred);
    } else {
        ExitNode best = b.empty(x, t);
        chain_sweep<ExitNode>(
            sub.pts(), sub.rank(), Boundary::Entries<ExitNode>(b, sub),
            [&](std::size_t, const ExitNode& n) { best.absorb(n); });
        r.value = best.value;
        r.exit_sup = best.sup;
        r.exit_inf = best.low;
    }
    r.exit = r.exit_sup;
    return r;
}

}  // namespace detail

// Maximal weight of an increasing chain of points in (p, q]; points sharing a
// coordinate with p are excluded.
inline double last_passage(const WeightedPointSet& points, Point2 p, Point2 q) {
    detail::check_order(p, q);
    auto sub = detail::select_points(points, p.x, q.x, p.t, q.t);
    return detail::max_chain_weight(sub.pts(), sub.rank());
}

// Maximizing chain from p to q that is pointwise lowest among maximizers.
inline PassagePath lowest_geodesic(const WeightedPointSet& points, Point2 p, Point2 q) {
    detail::check_order(p, q);
    auto sub = detail::select_points(points, p.x, q.x, p.t, q.t);
    std::vector<std::int64_t> pred(sub.pts().size());
    detail::PathNode best;
    best.value = 0.0;
    best.key_t = -detail::inf;
    best.key_x = detail::inf;
    best.pred = detail::from_source;
    detail::chain_sweep<detail::PathNode>(
        sub.pts(), sub.rank(),
        [](std::size_t) {
            detail::PathNode s;
            s.value = 0.0;
            s.key_t = -detail::inf;
            s.key_x = detail::inf;
            return s;
        },
        [&](std::size_t k, const detail::PathNode& n) {
            pred[k] = n.pred;
            best.absorb(detail::PathNode::as_predecessor(n, k, sub.pts()[k]));
        });
    if (best.pred < 0) return {};
    return detail::trace_path(sub.pts(), pred, best.pred);
}

// L_nu(x, t) = sup_{z_min <= z <= x} nu(z) + L((z,0),(x,t)), with the measure
// treated as -infinity left of z_min.
inline PassageResult boundary_last_passage(const AtomicMeasure& nu, const WeightedPointSet& points, double x,
                                           double t, double z_min, bool with_path = true) {
    if (!(z_min <= x) || !std::isfinite(z_min) || !std::isfinite(x)) throw std::invalid_argument("empty window");
    if (!(t >= 0.0)) throw std::invalid_argument("t must be nonnegative");
    const Rect& rc = points.rect;
    if (!points.points.empty() && (rc.x0 > z_min || rc.x1 < x || rc.t0 > 0.0 || rc.t1 < t))
        throw std::invalid_argument("point set does not cover the passage window");
    detail::Boundary b{&nu, nullptr, z_min};
    PassageResult r = detail::boundary_passage(b, points, x, t, with_path);
    const std::size_t k = nu.count_below(z_min);
    const double first = k < nu.size() ? nu.atoms()[k].pos : z_min;
    r.saturated = *r.exit_inf <= std::max(first, z_min);
    return r;
}

// Passage with sources on the x-axis and sinks on the t-axis; sink exits are
// reported at z = -(sink time).
inline PassageResult sources_sinks_passage(const SourcesSinks& ss, const WeightedPointSet& points, double x, double t,
                                           bool with_path = true) {
    if (!(x >= 0.0) || !(t >= 0.0)) throw std::invalid_argument("x and t must be nonnegative");
    detail::Boundary b{&ss.sources, &ss.sinks, 0.0};
    return detail::boundary_passage(b, points, x, t, with_path);
}

// Increments of s -> L(0, s) over the grid, as atoms at grid times.
template <class PassageAtZero>
AtomicMeasure flux_from(PassageAtZero&& l0, const std::vector<double>& time_grid) {
    double prev_t = 0.0;
    double prev = l0(0.0);
    std::vector<Atom> atoms;
    for (double s : time_grid) {
        if (!(s >= prev_t)) throw std::invalid_argument("time grid must be nonnegative and increasing");
        double v = l0(s);
        if (v > prev) atoms.push_back({s, v - prev});
        prev = v;
        prev_t = s;
    }
    return AtomicMeasure(std::move(atoms));
}

inline AtomicMeasure flux_measure(const SourcesSinks& ss, const WeightedPointSet& points,
                                  const std::vector<double>& time_grid) {
    return flux_from([&](double s) { return sources_sinks_passage(ss, points, 0.0, s, false).value; }, time_grid);
}

// Flux through the origin when mass sits left of 0 on [z_min, 0].
inline AtomicMeasure flux_measure(const AtomicMeasure& nu, const WeightedPointSet& points,
                                  const std::vector<double>& time_grid, double z_min) {
    return flux_from([&](double s) { return boundary_last_passage(nu, points, 0.0, s, z_min, false).value; },
                     time_grid);
}

// Passage field from a boundary: one DP over all points in the window, then
// L_nu(x, t) for any x at a fixed time through a slice. The measures and the
// point set must outlive the field.
class PassageField {
public:
    struct Value {
        double value, sup, low;
    };

    class Slice {
    public:
        Value at(double x) const {
            detail::ExitNode n = field_->boundary_.empty(x, t_);
            auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
            if (it != xs_.begin()) n.absorb(prefix_[static_cast<std::size_t>(it - xs_.begin()) - 1]);
            return {n.value, n.sup, n.low};
        }
        double time() const { return t_; }

    private:
        friend class PassageField;
        const PassageField* field_ = nullptr;
        double t_ = 0;
        std::vector<double> xs_;
        std::vector<detail::ExitNode> prefix_;
    };

    PassageField(const AtomicMeasure& nu, const WeightedPointSet& points, double z_min, double x_max, double t_max,
                 const AtomicMeasure* sinks = nullptr)
        : boundary_{&nu, sinks, z_min} {
        sub_ = detail::select_points(points, z_min, x_max, 0.0, t_max);
        nodes_.resize(sub_.pts().size());
        detail::chain_sweep<detail::ExitNode>(
            sub_.pts(), sub_.rank(), detail::Boundary::Entries<detail::ExitNode>(boundary_, sub_),
            [&](std::size_t k, const detail::ExitNode& n) { nodes_[k] = n; });
    }

    Slice slice(double t) const {
        Slice s;
        s.field_ = this;
        s.t_ = t;
        detail::ExitNode run;
        for (std::size_t k = 0; k < sub_.pts().size(); ++k) {
            if (sub_.pts()[k].t > t) continue;
            run.absorb(nodes_[k]);
            if (!s.xs_.empty() && s.xs_.back() == sub_.pts()[k].x) {
                s.prefix_.back() = run;
            } else {
                s.xs_.push_back(sub_.pts()[k].x);
                s.prefix_.push_back(run);
            }
        }
        return s;
    }

    // Sorted x-coordinates of points with time at most t.
    std::vector<double> point_xs(double t) const {
        std::vector<double> out;
        for (const auto& p : sub_.pts())
            if (p.t <= t) out.push_back(p.x);
        return out;
    }

private:
    detail::Boundary boundary_;
    detail::Subset sub_;
    std::vector<detail::ExitNode> nodes_;
};

inline double shape_function(double x, double t, double gamma) {
    if (!(x > 0.0) || !(t > 0.0) || !(gamma > 0.0)) throw std::invalid_argument("shape function needs positive input");
    return gamma * std::sqrt(x * t);
}

// f(t+s,t) - f(t,t) <= gamma s/2 - gamma s^2/(32 t) for s <= 8t, and
// <= gamma s / sqrt(8) for s >= 8t.
inline bool curvature_bound_holds(double s, double t, double gamma) {
    if (!(s >= 0.0) || !(t > 0.0) || !(gamma > 0.0)) throw std::invalid_argument("curvature check needs s>=0, t>0");
    const double lhs = gamma * std::sqrt((t + s) * t) - gamma * t;
    const double tol = 1e-12 * gamma * (t + s);
    bool ok = true;
    if (s <= 8.0 * t) ok = ok && lhs <= gamma * s / 2.0 - gamma * s * s / (32.0 * t) + tol;
    if (s >= 8.0 * t) ok = ok && lhs <= gamma * s / std::sqrt(8.0) + tol;
    return ok;
}

}  // namespace hammersley
