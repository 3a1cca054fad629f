#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hammersley/lpp.hpp"
#include "hammersley/testing/enumeration.hpp"
#include "hammersley/testing/instances.hpp"

using namespace hammersley;
namespace ht = hammersley::testing;

namespace {

WeightedPointSet box10(std::vector<WeightedPoint> pts) { return make_point_set({0, 10, 0, 10}, std::move(pts)); }

WeightedPointSet random_box(Rng& rng, double side, int n, bool grid) {
    std::uniform_real_distribution<double> u(0.0, side);
    std::uniform_int_distribution<int> g(0, static_cast<int>(side));
    std::uniform_int_distribution<int> w(1, 16);
    std::vector<WeightedPoint> pts;
    for (int i = 0; i < n; ++i) {
        if (grid)
            pts.push_back({static_cast<double>(g(rng)), static_cast<double>(g(rng)), w(rng) / 8.0});
        else
            pts.push_back({u(rng), u(rng), w(rng) / 8.0});
    }
    return make_point_set({0, side, 0, side}, pts);
}

}  // namespace

TEST(LastPassage, EmptySetIsZero) { EXPECT_EQ(last_passage(box10({}), {0, 0}, {10, 10}), 0.0); }

TEST(LastPassage, ChainOfTwoFigurePoints) {
    auto s = box10({{4, 3, 4}, {6, 8, 7}});
    EXPECT_EQ(last_passage(s, {0, 0}, {10, 10}), 11.0);
}

TEST(LastPassage, AntichainTakesBestSinglePoint) {
    auto s = make_point_set({0, 3, 0, 3}, {{1, 2, 3}, {2, 1, 5}});
    EXPECT_EQ(last_passage(s, {0, 0}, {3, 3}), 5.0);
}

TEST(LastPassage, SouthWestExcludedNorthEastIncluded) {
    auto s = box10({{2, 5, 1}, {5, 2, 1}, {10, 10, 1}, {6, 6, 1}});
    // From (2,2): (2,5) and (5,2) share a coordinate with p; (6,6) and (10,10) count.
    EXPECT_EQ(last_passage(s, {2, 2}, {10, 10}), 2.0);
    EXPECT_EQ(last_passage(s, {0, 0}, {10, 10}), 3.0);
}

TEST(LastPassage, RejectsUnorderedEndpoints) {
    auto s = box10({});
    EXPECT_THROW(last_passage(s, {5, 5}, {4, 6}), std::invalid_argument);
    EXPECT_THROW(last_passage(s, {5, 5}, {5, 5}), std::invalid_argument);
}

TEST(LastPassage, MatchesEnumerationOnRandomInstances) {
    Rng rng(101);
    for (int rep = 0; rep < 300; ++rep) {
        auto s = random_box(rng, 10, 12, rep % 2 == 0);
        auto chains = ht::all_chains(s.points);
        std::uniform_real_distribution<double> u(0.0, 5.0);
        Point2 p{std::floor(u(rng)), std::floor(u(rng))};
        Point2 q{10 - std::floor(u(rng)), 10 - std::floor(u(rng))};
        ASSERT_EQ(last_passage(s, p, q), ht::brute_last_passage(chains, p, q)) << "instance " << rep;
    }
}

TEST(LastPassage, UnitWeightFastPathMatchesGeneralDp) {
    Rng rng(7);
    for (int rep = 0; rep < 50; ++rep) {
        auto s = random_box(rng, 20, 200, rep % 2 == 0);
        for (auto& p : s.points) p.w = 1.0;
        double fast = last_passage(s, {0, 0}, {20, 20});
        auto g = lowest_geodesic(s, {0, 0}, {20, 20});
        EXPECT_EQ(fast, g.value);
    }
}

TEST(LowestGeodesic, SingleChain) {
    auto s = box10({{1, 1, 1}, {2, 3, 1}, {5, 7, 1}});
    auto g = lowest_geodesic(s, {0, 0}, {10, 10});
    ASSERT_EQ(g.points.size(), 3u);
    EXPECT_EQ(g.value, 3.0);
    EXPECT_EQ(g.points[1], (WeightedPoint{2, 3, 1}));
}

TEST(LowestGeodesic, PicksLowerOfTwoDisjointMaximizers) {
    // Upper chain (1,4),(2,5),(3,6); lower chain (4,1),(5,2),(6,3).
    std::vector<WeightedPoint> pts{{1, 4, 1}, {2, 5, 1}, {3, 6, 1}, {4, 1, 1}, {5, 2, 1}, {6, 3, 1}};
    auto s = box10(pts);
    auto g = lowest_geodesic(s, {0, 0}, {10, 10});
    ASSERT_EQ(g.points.size(), 3u);
    EXPECT_EQ(g.points[0], (WeightedPoint{4, 1, 1}));
    EXPECT_EQ(g.points[2], (WeightedPoint{6, 3, 1}));
    auto chains = ht::all_chains(s.points);
    EXPECT_EQ(ht::maximizing_chains(chains, {0, 0}, {10, 10}).size(), 2u);
    EXPECT_TRUE(ht::is_lowest_maximizer(chains, g.points, {0, 0}, {10, 10}, {1, 2, 3, 4, 5, 6, 10}));
}

TEST(LowestGeodesic, CrossingMaximizersGiveStripwiseMinimum) {
    // Two maximizers cross; the lowest path mixes their pieces.
    std::vector<WeightedPoint> pts{{1, 1, 1}, {2, 5, 1}, {3, 6, 1}, {4, 2, 1}, {5, 7, 1}, {6, 8, 1}};
    auto s = box10(pts);
    auto g = lowest_geodesic(s, {0, 0}, {10, 10});
    auto chains = ht::all_chains(s.points);
    EXPECT_TRUE(ht::is_lowest_maximizer(chains, g.points, {0, 0}, {10, 10}, {1, 2, 3, 4, 5, 6, 10}));
}

TEST(LowestGeodesic, MatchesEnumerationDefinition) {
    Rng rng(202);
    for (int rep = 0; rep < 500; ++rep) {
        auto s = random_box(rng, 6, 10, true);
        for (auto& p : s.points) p.w = (rep % 3 == 0) ? p.w : 1.0;
        auto chains = ht::all_chains(s.points);
        auto g = lowest_geodesic(s, {0, 0}, {6, 6});
        std::vector<double> probe{0, 1, 2, 3, 4, 5, 6};
        ASSERT_TRUE(ht::is_lowest_maximizer(chains, g.points, {0, 0}, {6, 6}, probe)) << "instance " << rep;
    }
}

TEST(LowestGeodesic, ValueEqualsLastPassage) {
    Rng rng(303);
    for (int rep = 0; rep < 1000; ++rep) {
        auto s = random_box(rng, 10, 30, rep % 2 == 0);
        auto g = lowest_geodesic(s, {0, 0}, {10, 10});
        ASSERT_EQ(g.value, last_passage(s, {0, 0}, {10, 10}));
        for (std::size_t i = 1; i < g.points.size(); ++i) {
            ASSERT_LT(g.points[i - 1].x, g.points[i].x);
            ASSERT_LT(g.points[i - 1].t, g.points[i].t);
        }
    }
}

TEST(LowestGeodesic, CsvExportInPathOrder) {
    auto s = box10({{1, 1, 2}, {3, 4, 1}});
    std::ostringstream os;
    write_path_csv(os, lowest_geodesic(s, {0, 0}, {10, 10}));
    EXPECT_EQ(os.str(), "x,t,w\n1,1,2\n3,4,1\n");
}

TEST(BoundaryPassage, DominantAtomAtTarget) {
    AtomicMeasure nu({{1, 1}, {7, 1e6}});
    auto s = box10({{2, 2, 1}, {3, 3, 1}, {5, 6, 1}});
    auto r = boundary_last_passage(nu, s, 7, 10, 0);
    EXPECT_EQ(*r.exit, 7.0);
    EXPECT_GE(r.value, 1e6);
}

TEST(BoundaryPassage, NoPointsGivesMeasureAtTarget) {
    AtomicMeasure nu({{1, 2}, {3, 1}, {8, 4}});
    auto r = boundary_last_passage(nu, box10({}), 6, 5, 0);
    EXPECT_EQ(r.value, 3.0);
    EXPECT_EQ(*r.exit, 6.0);
    EXPECT_EQ(*r.exit_inf, 3.0);
    EXPECT_TRUE(r.geodesic.points.empty());
}

TEST(BoundaryPassage, EmptyWindowRejected) {
    AtomicMeasure nu({{1, 1}});
    EXPECT_THROW(boundary_last_passage(nu, box10({}), 2, 5, 3), std::invalid_argument);
}

TEST(BoundaryPassage, SaturationFlagAtWindowEdge) {
    // The best chain starts left of every atom, so a wider window could matter.
    AtomicMeasure nu({{5, 1}});
    auto s = box10({{1, 1, 1}, {2, 2, 1}, {3, 3, 1}});
    auto r = boundary_last_passage(nu, s, 10, 10, 0);
    EXPECT_TRUE(r.saturated);
    auto r2 = boundary_last_passage(AtomicMeasure({{0.5, 1}, {5, 1}}), box10({{6, 6, 1}}), 10, 10, 0);
    EXPECT_FALSE(r2.saturated);
}

TEST(BoundaryPassage, MatchesEnumeration) {
    Rng rng(404);
    for (int rep = 0; rep < 1000; ++rep) {
        auto inst = ht::random_instance(rng, 8, 8);
        if (inst.x < inst.z_min) continue;
        auto r = boundary_last_passage(inst.nu, inst.points, inst.x, inst.t, inst.z_min);
        auto o = ht::brute_boundary(inst.nu, inst.points.points, inst.x, inst.t, inst.z_min);
        ASSERT_EQ(r.value, o.value) << rep;
        ASSERT_EQ(*r.exit_sup, o.sup) << rep;
        ASSERT_EQ(*r.exit_inf, o.inf) << rep;
        if (!r.geodesic.points.empty()) {
            double start = inst.nu.left_limit(r.geodesic.points.front().x);
            ASSERT_EQ(ht::chain_value(r.geodesic.points, start), r.value) << rep;
        }
    }
}

TEST(SourcesSinks, SourcesOnlyRightmostMaximizerAfterLastAtom) {
    SourcesSinks ss{AtomicMeasure({{4, 5}}), AtomicMeasure()};
    auto r = sources_sinks_passage(ss, box10({}), 8, 6);
    EXPECT_EQ(r.value, 5.0);
    EXPECT_EQ(*r.exit_sup, 8.0);
    EXPECT_EQ(*r.exit_inf, 4.0);
}

TEST(SourcesSinks, NegativeCoordinatesRejected) {
    SourcesSinks ss;
    EXPECT_THROW(sources_sinks_passage(ss, box10({}), -1, 2), std::invalid_argument);
}

TEST(SourcesSinks, MatchesEnumeration) {
    Rng rng(505);
    for (int rep = 0; rep < 1000; ++rep) {
        auto inst = ht::random_instance(rng, 10, 6);
        auto r = sources_sinks_passage(inst.ss, inst.points, inst.x, inst.t);
        auto o = ht::brute_sources_sinks(inst.ss, inst.points.points, inst.x, inst.t);
        ASSERT_EQ(r.value, o.value) << rep;
        ASSERT_EQ(*r.exit_sup, o.sup) << rep;
        ASSERT_EQ(*r.exit_inf, o.inf) << rep;
        ASSERT_LE(*r.exit_inf, *r.exit_sup);
    }
}

TEST(SourcesSinks, ReflectionSymmetryIsExact) {
    Rng rng(606);
    for (int rep = 0; rep < 500; ++rep) {
        auto inst = ht::random_instance(rng, 12, 8);
        std::vector<WeightedPoint> mirrored;
        for (const auto& p : inst.points.points)
            if (p.x >= 0) mirrored.push_back({p.t, p.x, p.w});
        auto ms = make_point_set({0, 10, 0, 10}, mirrored);
        SourcesSinks flipped{inst.ss.sinks, inst.ss.sources};
        auto a = sources_sinks_passage(inst.ss, inst.points, inst.x, inst.t);
        auto b = sources_sinks_passage(flipped, ms, inst.t, inst.x);
        ASSERT_EQ(a.value, b.value);
        ASSERT_EQ(*a.exit_sup, -*b.exit_inf);
        ASSERT_EQ(*a.exit_inf, -*b.exit_sup);
    }
}

TEST(Flux, FigureConfiguration) {
    SourcesSinks ss{AtomicMeasure({{2, 5}, {5, 3}, {8, 7}}), AtomicMeasure({{1.5, 4}, {6, 6}})};
    auto s = box10({{4, 3, 4}, {6, 8, 7}});
    auto flux = flux_measure(ss, s, {5, 10});
    EXPECT_EQ(flux.mass(0, 5), 4.0);
    EXPECT_EQ(flux.mass(0, 10), 10.0);
    EXPECT_EQ(sources_sinks_passage(ss, s, 10, 10).value, 17.0);
}

TEST(Flux, NoMassLeftOfOriginNoSinks) {
    SourcesSinks ss{AtomicMeasure({{1, 1}, {3, 2}}), AtomicMeasure()};
    auto s = box10({{2, 2, 1}, {4, 5, 1}});
    EXPECT_EQ(flux_measure(ss, s, {1, 2, 5, 10}).total_mass(), 0.0);
}

TEST(Flux, NondecreasingWithMassLeftOfOrigin) {
    Rng rng(707);
    for (int rep = 0; rep < 100; ++rep) {
        auto nu = sample_atomic_poisson(-10, 10, 1.0, WeightDistribution::dirac1(), rng());
        auto s = sample_point_set({-10, 10, 0, 10}, 1.0, WeightDistribution::exponential(1.0), rng());
        std::vector<double> grid;
        for (int k = 0; k <= 20; ++k) grid.push_back(0.5 * k);
        double prev = boundary_last_passage(nu, s, 0, 0, -10, false).value;
        for (double g : grid) {
            double v = boundary_last_passage(nu, s, 0, g, -10, false).value;
            ASSERT_GE(v, prev);
            prev = v;
        }
        auto flux = flux_measure(nu, s, grid, -10);
        EXPECT_NEAR(flux.total_mass(), prev - boundary_last_passage(nu, s, 0, 0, -10, false).value, 1e-9);
        EXPECT_THROW(flux_measure(nu, s, {2, 1}, -10), std::invalid_argument);
    }
}

TEST(ShapeFunction, Values) {
    EXPECT_EQ(shape_function(1, 1, 2), 2.0);
    EXPECT_EQ(shape_function(4, 1, 2), 4.0);
    EXPECT_THROW(shape_function(0, 1, 2), std::invalid_argument);
}

TEST(ShapeFunction, CurvatureBoundBothBranches) {
    Rng rng(808);
    std::uniform_real_distribution<double> ut(0.01, 100.0), uf(0.0, 1.0);
    for (int rep = 0; rep < 10000; ++rep) {
        double t = ut(rng);
        double s = rep % 2 ? 8.0 * t * uf(rng) : 8.0 * t * (1.0 + 50.0 * uf(rng));
        ASSERT_TRUE(curvature_bound_holds(s, t, 2.0)) << s << " " << t;
    }
}

TEST(Properties, SuperadditivityAndMonotonicity) {
    Rng rng(909);
    std::uniform_real_distribution<double> u(0, 1);
    for (int rep = 0; rep < 200; ++rep) {
        auto s = sample_point_set({0, 20, 0, 20}, 1.0, WeightDistribution::exponential(1.0), rng());
        Point2 p{2 * u(rng), 2 * u(rng)};
        Point2 z{5 + 5 * u(rng), 5 + 5 * u(rng)};
        Point2 q{15 + 5 * u(rng), 15 + 5 * u(rng)};
        double lpq = last_passage(s, p, q);
        ASSERT_GE(lpq + 1e-12, last_passage(s, p, z) + last_passage(s, z, q));
        ASSERT_GE(last_passage(s, p, {q.x, 20}), lpq);
        ASSERT_GE(last_passage(s, p, {20, q.t}), lpq);
        ASSERT_LE(last_passage(s, {p.x + 1, p.t}, q), lpq);
    }
}

TEST(Properties, ExitOrdering) {
    Rng rng(1010);
    for (int rep = 0; rep < 100; ++rep) {
        auto nu = sample_atomic_poisson(-20, 20, 1.0, WeightDistribution::dirac1(), rng());
        auto s = sample_point_set({-20, 20, 0, 20}, 1.0, WeightDistribution::dirac1(), rng());
        std::uniform_real_distribution<double> u(0, 10);
        double x = u(rng), y = x + u(rng), t = 5 + u(rng), sm = t - u(rng) / 2;
        auto zxt = boundary_last_passage(nu, s, x, t, -20, false);
        auto zys = boundary_last_passage(nu, s, y, std::max(sm, 0.0), -20, false);
        ASSERT_GE(*zys.exit, *zxt.exit);
    }
}

TEST(Properties, LocalComparison) {
    Rng rng(1111);
    int tested = 0;
    for (int rep = 0; rep < 300; ++rep) {
        auto nu = sample_atomic_poisson(-20, 20, 1.0, WeightDistribution::dirac1(), rng());
        auto s = sample_point_set({-20, 20, 0, 20}, 1.0, WeightDistribution::dirac1(), rng());
        std::uniform_real_distribution<double> u(0.5, 10);
        double x = u(rng), y = x + u(rng), t = u(rng);
        auto lx = boundary_last_passage(nu, s, x, t, -20, false);
        auto ly = boundary_last_passage(nu, s, y, t, -20, false);
        double dx = last_passage(s, {0, 0}, {x, t}), dy = last_passage(s, {0, 0}, {y, t});
        if (*ly.exit <= 0) {
            ++tested;
            ASSERT_LE(ly.value - lx.value, dy - dx);
        }
        if (*lx.exit >= 0) {
            ++tested;
            ASSERT_GE(ly.value - lx.value, dy - dx);
        }
    }
    EXPECT_GT(tested, 50);
}

TEST(Properties, VolumePreservingMapKeepsValues) {
    Rng rng(1212);
    for (double lambda : {0.5, 2.0, 4.0}) {
        auto s = sample_point_set({0, 20, 0, 20}, 1.0, WeightDistribution::exponential(1.0), rng());
        std::vector<WeightedPoint> mapped;
        for (const auto& p : s.points) mapped.push_back({lambda * p.x, p.t / lambda, p.w});
        auto m = make_point_set({0, 20 * lambda, 0, 20 / lambda}, mapped);
        EXPECT_EQ(last_passage(s, {0, 0}, {20, 20}), last_passage(m, {0, 0}, {20 * lambda, 20 / lambda}));
        EXPECT_EQ(last_passage(s, {0, 0}, {10, 20}), last_passage(m, {0, 0}, {10 * lambda, 20 / lambda}));
    }
}

TEST(PassageFieldSlices, AgreeWithDirectBoundaryPassage) {
    Rng rng(1313);
    for (int rep = 0; rep < 30; ++rep) {
        auto nu = sample_atomic_poisson(-10, 10, 1.0, WeightDistribution::dirac1(), rng());
        auto s = sample_point_set({-10, 10, 0, 10}, 1.0, WeightDistribution::dirac1(), rng());
        PassageField field(nu, s, -10, 10, 10);
        for (double t : {0.0, 2.5, 10.0}) {
            auto slice = field.slice(t);
            for (double x = -9.5; x <= 10; x += 0.7) {
                auto direct = boundary_last_passage(nu, s, x, t, -10, false);
                auto v = slice.at(x);
                ASSERT_EQ(v.value, direct.value);
                ASSERT_EQ(v.sup, *direct.exit_sup);
                ASSERT_EQ(v.low, *direct.exit_inf);
            }
        }
    }
}
