// Guided tour on small data: the integer box, passage values and geodesics,
// a random box in equilibrium, a second-class particle and nu_alpha.

#include <iomanip>
#include <iostream>

#include "hammersley/hammersley.hpp"

using namespace hammersley;

namespace {

void show(const char* label, const AtomicMeasure& m) {
    std::cout << "  " << label << ":";
    for (const auto& a : m.atoms()) std::cout << " (" << a.pos << ", " << a.mass << ")";
    std::cout << '\n';
}

}  // namespace

int main() {
    std::cout << std::setprecision(4);

    std::cout << "1. Integer box [0,10]^2\n";
    experiments::Figure21 f;
    show("sources", f.sources);
    show("sinks", f.sinks);
    for (double t : {5.0, 10.0}) {
        const FluidState s = evolve_box(f.sources, f.sinks, f.points, f.R, t);
        std::cout << "  t = " << t << '\n';
        show("  fluid", s.measure());
        std::cout << "    exited " << s.exited_mass() << ", entered " << s.entered_mass() << '\n';
    }
    const FluidState full = evolve_box(f.sources, f.sinks, f.points, f.R, f.T);
    std::cout << "  events:\n";
    for (const auto& e : full.events())
        std::cout << "    t=" << e.time << ' ' << to_string(e.kind) << " x=" << e.x << " mass=" << e.mass << '\n';
    const SourcesSinks ss{f.sources, f.sinks};
    for (double x : {2.0, 6.0, 10.0}) {
        const auto r = sources_sinks_passage(ss, f.points, x, f.T);
        std::cout << "  L(" << x << ", 10) = " << r.value << ", exit " << *r.exit << '\n';
    }

    std::cout << "\n2. Point-to-point passage, 400 Poisson points in [0,20]^2\n";
    const auto pts = sample_point_set({0, 20, 0, 20}, 1.0, WeightDistribution::dirac1(), 7);
    const auto g = lowest_geodesic(pts, {0, 0}, {20, 20});
    std::cout << "  L = " << last_passage(pts, {0, 0}, {20, 20}) << " (2t = 40), lowest geodesic:";
    for (const auto& p : g.points) std::cout << " (" << p.x << "," << p.t << ")";
    std::cout << '\n';

    std::cout << "\n3. Equilibrium box, lambda = 1, width = t = 100\n";
    const auto box = equilibrium_box(1.0, 100, 100, 11);
    const auto e = sample_from_box(box, 100, 100);
    std::cout << "  L = " << e.value << " (mean 200), Z+ = " << e.z_plus << ", nu(x) = " << e.nu_x << '\n';

    std::cout << "\n4. Second-class particle, Poisson(1) on both sides\n";
    const double z_min = -80, x_max = 160;
    const auto nu = initial_measure({LawKind::Poisson, 1.0}, {LawKind::Poisson, 1.0}, z_min, x_max, 3);
    const auto cloud = sample_point_set({z_min, x_max, 0, 100}, 1.0, WeightDistribution::dirac1(), 4);
    for (const auto& p : trajectory(nu, cloud, {25, 50, 75, 100}, z_min, x_max))
        std::cout << "  X(" << p.t << ") = " << p.x << (p.saturated ? " (window edge)" : "") << '\n';

    std::cout << "\n5. nu_alpha on [0, 2] for tan alpha = 1 and 4, one realization\n";
    const auto a1 = DirectionAngle::from_tan(1.0), a4 = DirectionAngle::from_tan(4.0);
    GrowingRegion region({a1, a4}, geometric_radii(64, 4), 2, 2, 1.0, WeightDistribution::dirac1(), 5);
    const auto mc = multi_class_sample(region, {a1, a4}, 2.0);
    show("tan 1", mc.measures[0]);
    show("tan 4", mc.measures[1]);
    std::cout << "  stable from radius " << mc.stabilized_at << (mc.converged ? "" : " (not converged)") << '\n';
}
