#include <gtest/gtest.h>

#include <numbers>

#include "hammersley/busemann.hpp"
#include "hammersley/testing/enumeration.hpp"
#include "hammersley/testing/instances.hpp"

using namespace hammersley;
namespace ht = hammersley::testing;

namespace {

GrowingRegion small_region(double tan_alpha, std::uint64_t seed, double r0 = 8, std::size_t count = 4,
                           double h = 2) {
    return GrowingRegion({DirectionAngle::from_tan(tan_alpha)}, geometric_radii(r0, count), h, h, 1.0,
                         WeightDistribution::dirac1(), seed);
}

}  // namespace

TEST(DirectionAngle, DerivedQuantities) {
    auto a = DirectionAngle::from_tan(4.0);
    EXPECT_NEAR(a.tan(), 4.0, 1e-12);
    EXPECT_NEAR(a.rho(), 2.0, 1e-12);
    EXPECT_NEAR(a.phi(), 0.25, 1e-12);
    EXPECT_NEAR(a.lambda(), 2.0, 1e-12);
    EXPECT_NEAR(a.psi(), 1.0, 1e-12);
    EXPECT_NEAR(DirectionAngle::from_tan(1.0).alpha(), 1.25 * std::numbers::pi, 1e-15);
    auto z = DirectionAngle::from_tan(1.0).at_radius(std::sqrt(2.0));
    EXPECT_NEAR(z.x, -1.0, 1e-12);
    EXPECT_NEAR(z.t, -1.0, 1e-12);
    EXPECT_THROW(DirectionAngle(std::numbers::pi), std::invalid_argument);
    EXPECT_THROW(DirectionAngle(1.5 * std::numbers::pi), std::invalid_argument);
    EXPECT_THROW(DirectionAngle::from_tan(0.0), std::invalid_argument);
    EXPECT_TRUE(DirectionAngle::from_tan(1.0) < DirectionAngle::from_tan(4.0));
}

TEST(PointPassage, MatchesEnumeration) {
    Rng rng = make_rng(61);
    for (int rep = 0; rep < 1000; ++rep) {
        auto inst = ht::random_instance(rng, 12, 0);
        const auto chains = ht::all_chains(inst.points.points);
        const Point2 z{inst.z_min + 1.0, 1.0};
        PointPassage pp(inst.points, z, 10.0, 10.0);
        std::vector<double> xs;
        for (double x = z.x; x <= 10.0; x += 0.5) xs.push_back(x);
        auto row = pp.row(inst.t, xs);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double want = ht::brute_last_passage(chains, z, {xs[i], inst.t});
            ASSERT_EQ(row[i], want) << rep;
            ASSERT_EQ(pp.at({xs[i], inst.t}), want) << rep;
        }
        std::vector<double> ts;
        for (double t = z.t; t <= 10.0; t += 0.5) ts.push_back(t);
        auto col = pp.column(inst.x, ts);
        for (std::size_t i = 0; i < ts.size(); ++i)
            ASSERT_EQ(col[i], ht::brute_last_passage(chains, z, {inst.x, ts[i]})) << rep;
    }
}

TEST(Busemann, VanishesOnTheDiagonal) {
    auto region = small_region(1.0, 3);
    auto e = estimate_busemann(region, DirectionAngle::from_tan(1.0), {0.5, 0.5}, {0.5, 0.5});
    EXPECT_EQ(e.value, 0.0);
    EXPECT_TRUE(e.converged);
}

TEST(Busemann, NonnegativeNortheastAndAntisymmetric) {
    const auto a = DirectionAngle::from_tan(2.0);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto region = small_region(2.0, seed);
        Point2 x{0.2, 0.3}, y{1.7, 1.1}, w{0.9, 1.9};
        auto xy = estimate_busemann(region, a, x, y);
        auto yx = estimate_busemann(region, a, y, x);
        EXPECT_GE(xy.value, 0.0);
        EXPECT_EQ(xy.value, -yx.value);
        if (!xy.converged) continue;
        auto xw = estimate_busemann(region, a, x, w);
        auto yw = estimate_busemann(region, a, y, w);
        if (xw.converged && yw.converged && xw.stabilized_at == yw.stabilized_at &&
            xy.stabilized_at == xw.stabilized_at)
            EXPECT_EQ(xy.value + yw.value, xw.value);
    }
}

TEST(Busemann, AdditiveAtEveryAnchor) {
    auto region = small_region(1.0, 7, 8, 3);
    const auto a = DirectionAngle::from_tan(1.0);
    const auto& pts = region.points(2);
    for (std::size_t k = 0; k < region.size(); ++k) {
        PointPassage pp(pts, a.at_radius(region.radius(k)), 2, 2);
        Point2 x{0, 0}, y{1, 0.5}, w{2, 2};
        const double bxy = pp.at(y) - pp.at(x), byw = pp.at(w) - pp.at(y), bxw = pp.at(w) - pp.at(x);
        EXPECT_EQ(bxy + byw, bxw);
    }
}

TEST(Busemann, RejectsAnchorsOutsideTheRegion) {
    auto region = small_region(1.0, 1, 0.5, 2);
    EXPECT_THROW(estimate_busemann(region, DirectionAngle::from_tan(1.0), {-1, 0}, {1, 1}), std::invalid_argument);
    auto big = small_region(1.0, 1);
    EXPECT_THROW(estimate_busemann(big, DirectionAngle::from_tan(1.0), {0, 0}, {3, 1}), std::invalid_argument);
    EXPECT_THROW(GrowingRegion({DirectionAngle::from_tan(1.0)}, {2.0, 1.0}, 1, 1, 1.0, WeightDistribution::dirac1(), 0),
                 std::invalid_argument);
}

TEST(GrowingRegion, NestedRectanglesKeepTheirPoints) {
    auto region = small_region(1.0, 5, 4, 4);
    auto inner = region.points(1).points;
    auto outer = region.points(3).points;
    const Rect r1 = region.rect(1);
    std::vector<WeightedPoint> restricted;
    for (const auto& p : outer)
        if (p.x >= r1.x0 && p.x <= r1.x1 && p.t >= r1.t0 && p.t <= r1.t1) restricted.push_back(p);
    auto key = [](const WeightedPoint& a, const WeightedPoint& b) { return std::tie(a.x, a.t) < std::tie(b.x, b.t); };
    std::sort(inner.begin(), inner.end(), key);
    std::sort(restricted.begin(), restricted.end(), key);
    ASSERT_EQ(inner.size(), restricted.size());
    for (std::size_t i = 0; i < inner.size(); ++i) EXPECT_EQ(inner[i].x, restricted[i].x);
}

TEST(NuAlpha, EmptyAtOriginAndSupportedOnInterval) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto region = small_region(1.0, seed);
        auto s = sample_nu_alpha(region, DirectionAngle::from_tan(1.0), 2.0, true);
        EXPECT_EQ(s.nu.cumulative(0.0), 0.0);
        for (const auto& a : s.nu.atoms()) {
            EXPECT_GT(a.pos, 0.0);
            EXPECT_LE(a.pos, 2.0);
            EXPECT_EQ(a.mass, 1.0);
        }
        for (const auto& a : s.nu_star.atoms()) {
            EXPECT_GT(a.pos, 0.0);
            EXPECT_LE(a.pos, 2.0);
        }
    }
}

TEST(NuAlpha, IntensityRoughlyRho) {
    // Coarse check; the acceptance run uses far larger radii.
    for (double tan_alpha : {1.0, 4.0}) {
        const auto a = DirectionAngle::from_tan(tan_alpha);
        double sum = 0;
        int n = 0;
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            GrowingRegion region({a}, geometric_radii(32, 4), 1, 1, 1.0, WeightDistribution::dirac1(), seed);
            auto s = sample_nu_alpha(region, a, 1.0);
            if (!s.converged) continue;
            sum += s.nu.total_mass();
            ++n;
        }
        EXPECT_GT(n, 190);
        EXPECT_NEAR(sum / n, a.rho(), 0.25 * a.rho()) << tan_alpha;
    }
}

TEST(MultiClass, SteeperAngleDominates) {
    std::vector<DirectionAngle> angles{DirectionAngle::from_tan(0.5), DirectionAngle::from_tan(1.0),
                                       DirectionAngle::from_tan(2.0)};
    int violations = 0, converged = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        GrowingRegion region(angles, geometric_radii(16, 4), 3, 3, 1.0, WeightDistribution::dirac1(), seed);
        auto s = multi_class_sample(region, angles, 3.0);
        converged += s.converged;
        std::vector<double> mesh{0.0, 3.0};
        for (const auto& m : s.measures)
            for (const auto& at : m.atoms()) mesh.push_back(at.pos);
        std::sort(mesh.begin(), mesh.end());
        for (std::size_t i = 1; i < s.measures.size(); ++i)
            violations += !dominates_on_mesh(s.measures[i], s.measures[i - 1], mesh);
    }
    EXPECT_EQ(violations, 0);
    EXPECT_GT(converged, 30);
}

TEST(MultiClass, RejectsUnsortedAngles) {
    std::vector<DirectionAngle> angles{DirectionAngle::from_tan(2.0), DirectionAngle::from_tan(1.0)};
    GrowingRegion region(angles, geometric_radii(4, 2), 1, 1, 1.0, WeightDistribution::dirac1(), 0);
    EXPECT_THROW(multi_class_sample(region, angles, 1.0), std::invalid_argument);
}

TEST(DominatesOnMesh, ComparesIntervalMasses) {
    AtomicMeasure a({{0.5, 1}, {1.5, 1}}), b({{0.5, 1}});
    EXPECT_TRUE(dominates_on_mesh(a, b, {0, 1, 2}));
    EXPECT_FALSE(dominates_on_mesh(b, a, {0, 1, 2}));
}
