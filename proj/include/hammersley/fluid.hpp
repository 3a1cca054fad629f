#pragma once

// Hammersley interacting fluid on a spatial window [lo, hi]. A point (x0, t)
// of weight w removes the first w of fluid in [x0, hi] and deposits w at x0;
// mass missing inside the window enters through the east edge hi. A sink of
// weight w removes the first w in (lo, hi] and sends it out through the west
// side. An atom sitting exactly at x0 is taken first, which matches the
// passage representation when coordinates tie.

#include <algorithm>
#include <cmath>
#include <functional>
#include <iterator>
#include <map>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "points.hpp"

namespace hammersley {

struct LedgerEntry {
    double time = 0, mass = 0;
    friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

struct Corner {
    double x = 0, t = 0;
    friend bool operator==(const Corner&, const Corner&) = default;
};

enum class EventKind { Point, Sink, East, Exit };

inline const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::Point: return "point";
        case EventKind::Sink: return "sink";
        case EventKind::East: return "east";
        case EventKind::Exit: return "exit";
    }
    return "?";
}

struct FluidEvent {
    double time = 0;
    EventKind kind = EventKind::Point;
    double x = 0, mass = 0;
};

class FluidState {
public:
    // Remainders below this fraction of the moved mass count as exhausted.
    static constexpr double mass_tolerance = 1e-9;

    FluidState() = default;
    FluidState(const AtomicMeasure& initial, double lo, double hi, double time = 0.0)
        : lo_(lo), hi_(hi), time_(time) {
        if (!(lo < hi)) throw std::invalid_argument("fluid window must satisfy lo < hi");
        for (const auto& a : initial.atoms()) {
            if (a.pos < lo || a.pos > hi) throw std::invalid_argument("initial measure leaves the window");
            atoms_[a.pos] += a.mass;
            initial_mass_ += a.mass;
        }
    }

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double time() const { return time_; }

    AtomicMeasure measure() const {
        std::vector<Atom> out;
        out.reserve(atoms_.size());
        for (const auto& [pos, mass] : atoms_) out.push_back({pos, mass});
        return AtomicMeasure(std::move(out));
    }
    double total_mass() const {
        double m = 0.0;
        for (const auto& a : atoms_) m += a.second;
        return m;
    }
    double initial_mass() const { return initial_mass_; }
    double entered_mass() const { return sum(east_ledger_); }
    double exited_mass() const { return sum(left_ledger_); }

    // West exits through sinks, time ordered.
    const std::vector<LedgerEntry>& left_ledger() const { return left_ledger_; }
    // East entries, time ordered.
    const std::vector<LedgerEntry>& east_ledger() const { return east_ledger_; }
    // Position and time of every removal of fluid from inside the window.
    const std::vector<Corner>& corner_log() const { return corners_; }
    const std::vector<FluidEvent>& events() const { return events_; }

    void apply_point(double t, double x0, double omega) {
        check_event(t, omega);
        if (!(x0 > lo_ && x0 <= hi_)) throw std::invalid_argument("point outside the fluid window");
        events_.push_back({t, EventKind::Point, x0, omega});
        take(atoms_.lower_bound(x0), x0, omega);
        atoms_[x0] += omega;
    }

    void apply_sink(double t, double omega) {
        check_event(t, omega);
        events_.push_back({t, EventKind::Sink, lo_, omega});
        take(atoms_.upper_bound(lo_), lo_, omega);
        left_ledger_.push_back({t, omega});
        events_.push_back({t, EventKind::Exit, lo_, omega});
    }

    void write_event_csv(std::ostream& os) const {
        os << "time,kind,x,mass\n";
        os.precision(17);
        for (const auto& e : events_) os << e.time << ',' << to_string(e.kind) << ',' << e.x << ',' << e.mass << '\n';
    }

private:
    static double sum(const std::vector<LedgerEntry>& l) {
        double m = 0.0;
        for (const auto& e : l) m += e.mass;
        return m;
    }

    void check_event(double t, double omega) {
        if (!(omega > 0.0)) throw std::invalid_argument("event weight must be positive");
        if (!(t >= time_)) throw std::invalid_argument("events must be applied in time order");
        time_ = t;
    }

    // Corners are logged only for mass taken strictly right of x0.
    void take(std::map<double, double>::iterator it, double x0, double omega) {
        double need = omega;
        const double eps = mass_tolerance * omega;
        while (need > 0.0 && it != atoms_.end()) {
            if (it->first > x0) corners_.push_back({it->first, time_});
            if (it->second > need + eps) {
                it->second -= need;
                need = 0.0;
            } else {
                need -= it->second;
                it = atoms_.erase(it);
            }
        }
        if (need > eps) {
            east_ledger_.push_back({time_, need});
            events_.push_back({time_, EventKind::East, hi_, need});
        }
    }

    std::map<double, double> atoms_;
    double lo_ = 0, hi_ = 0, time_ = 0, initial_mass_ = 0;
    std::vector<LedgerEntry> left_ledger_, east_ledger_;
    std::vector<Corner> corners_;
    std::vector<FluidEvent> events_;
};

namespace detail {

struct TimedEvent {
    double t, x, w;
    bool sink;
};

// At equal times points go before sinks and run right to left, so no two
// events at one time feed each other; this keeps the state equal to the
// passage increments, whose chains increase strictly in t.
inline void sort_events(std::vector<TimedEvent>& ev) {
    std::sort(ev.begin(), ev.end(), [](const TimedEvent& a, const TimedEvent& b) {
        if (a.t != b.t) return a.t < b.t;
        if (a.sink != b.sink) return b.sink;
        return a.x > b.x;
    });
}

inline std::vector<TimedEvent> point_events(const WeightedPointSet& points, double lo, double hi, double T) {
    std::vector<TimedEvent> ev;
    for (const auto& p : points.points) {
        // The initial line t = 0 and the west edge x = lo are left out.
        if (p.t > T || p.t <= 0.0 || p.x == lo) continue;
        if (!(p.x > lo && p.x <= hi)) throw std::invalid_argument("point outside the fluid window");
        ev.push_back({p.t, p.x, p.w, false});
    }
    return ev;
}

inline void run_events(FluidState& s, const std::vector<TimedEvent>& ev) {
    for (const auto& e : ev) {
        if (e.sink)
            s.apply_sink(e.t, e.w);
        else
            s.apply_point(e.t, e.x, e.w);
    }
}

}  // namespace detail

// M^T from initial measure nu on [lo, hi], driven by the points with 0 < t <= T.
inline FluidState evolve(const AtomicMeasure& nu, const WeightedPointSet& points, double T, double lo, double hi) {
    if (!(T >= 0.0)) throw std::invalid_argument("T must be nonnegative");
    FluidState s(nu, lo, hi);
    auto ev = detail::point_events(points, lo, hi, T);
    detail::sort_events(ev);
    detail::run_events(s, ev);
    return s;
}

// Window taken from the point set's rectangle.
inline FluidState evolve(const AtomicMeasure& nu, const WeightedPointSet& points, double T) {
    return evolve(nu, points, T, points.rect.x0, points.rect.x1);
}

// Box (0, R] x (0, T] with sources on the bottom and sinks on the left.
inline FluidState evolve_box(const AtomicMeasure& sources, const AtomicMeasure& sinks,
                             const WeightedPointSet& points, double R, double T) {
    if (!(R > 0.0) || !(T > 0.0)) throw std::invalid_argument("box needs R > 0 and T > 0");
    if (!sources.empty() && !(sources.atoms().front().pos > 0.0 && sources.atoms().back().pos <= R))
        throw std::invalid_argument("sources must lie in (0, R]");
    FluidState s(sources, 0.0, R);
    std::vector<detail::TimedEvent> ev;
    for (const auto& p : points.points)
        if (p.t > 0.0 && p.t <= T && p.x > 0.0 && p.x <= R) ev.push_back({p.t, p.x, p.w, false});
    for (const auto& a : sinks.atoms()) {
        if (!(a.pos > 0.0)) throw std::invalid_argument("sinks must lie in (0, T]");
        if (a.pos <= T) ev.push_back({a.pos, 0.0, a.mass, true});
    }
    detail::sort_events(ev);
    detail::run_events(s, ev);
    return s;
}

// True when a - b is a nonnegative measure, up to the fluid mass tolerance.
inline bool dominates(const AtomicMeasure& a, const AtomicMeasure& b) {
    std::map<double, double> diff;
    for (const auto& x : a.atoms()) diff[x.pos] += x.mass;
    for (const auto& x : b.atoms()) diff[x.pos] -= x.mass;
    for (const auto& [pos, m] : diff)
        if (m < -FluidState::mass_tolerance * std::max(1.0, std::abs(m))) return false;
    return true;
}

// Basic coupling: both systems see the same events. The observer, if given,
// is called with (low, high) after every event.
inline std::pair<FluidState, FluidState> couple_evolve(
    const AtomicMeasure& nu_low, const AtomicMeasure& nu_high, const WeightedPointSet& points, double T, double lo,
    double hi, const std::function<void(const FluidState&, const FluidState&)>& observer = {}) {
    if (!dominates(nu_high, nu_low)) throw std::invalid_argument("nu_high must dominate nu_low");
    FluidState low(nu_low, lo, hi), high(nu_high, lo, hi);
    auto ev = detail::point_events(points, lo, hi, T);
    detail::sort_events(ev);
    for (const auto& e : ev) {
        low.apply_point(e.t, e.x, e.w);
        high.apply_point(e.t, e.x, e.w);
        if (observer) observer(low, high);
    }
    return {std::move(low), std::move(high)};
}

}  // namespace hammersley
