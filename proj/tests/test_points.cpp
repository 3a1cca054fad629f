#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "hammersley/points.hpp"
#include "hammersley/stats.hpp"

using namespace hammersley;

namespace {

// Midpoint rule for the integral of sqrt(1 - F) on [0, hi].
template <class Tail>
double integrate_sqrt_tail(Tail tail, double hi, int steps) {
    const double h = hi / steps;
    double s = 0.0;
    for (int i = 0; i < steps; ++i) s += std::sqrt(tail((i + 0.5) * h));
    return s * h;
}

}  // namespace

TEST(Weights, RejectBadLaws) {
    EXPECT_THROW(WeightDistribution::exponential(0.0), std::invalid_argument);
    EXPECT_THROW(WeightDistribution::exponential(-1.0), std::invalid_argument);
    EXPECT_THROW(WeightDistribution::bounded_discrete({}, {}), std::invalid_argument);
    EXPECT_THROW(WeightDistribution::bounded_discrete({1.0, 0.0}, {0.5, 0.5}), std::invalid_argument);
    EXPECT_THROW(WeightDistribution::bounded_discrete({1.0}, {0.0}), std::invalid_argument);
    EXPECT_THROW(WeightDistribution::bounded_discrete({1.0, 2.0}, {1.0}), std::invalid_argument);
}

TEST(Weights, DiscreteIsSortedMergedAndNormalized) {
    auto d = WeightDistribution::bounded_discrete({3.0, 1.0, 3.0, 2.0}, {1.0, 2.0, 1.0, 0.0});
    EXPECT_EQ(d.values(), (std::vector<double>{1.0, 3.0}));
    EXPECT_DOUBLE_EQ(d.probabilities()[0], 0.5);
    EXPECT_DOUBLE_EQ(d.probabilities()[1], 0.5);
    EXPECT_DOUBLE_EQ(d.mean(), 2.0);
    EXPECT_FALSE(d.classical());
    EXPECT_TRUE(WeightDistribution::bounded_discrete({1.0}, {3.0}).classical());
    EXPECT_TRUE(WeightDistribution::dirac1().classical());
}

TEST(Weights, SampleFrequencies) {
    auto d = WeightDistribution::bounded_discrete({1.0, 2.0}, {0.25, 0.75});
    Rng rng = make_rng(5);
    int twos = 0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) twos += d.sample(rng) == 2.0;
    EXPECT_NEAR(twos / static_cast<double>(n), 0.75, 4 * std::sqrt(0.75 * 0.25 / n));

    auto e = WeightDistribution::exponential(2.0);
    std::vector<double> xs(2000);
    for (auto& x : xs) x = e.sample(rng);
    EXPECT_GT(ks_test(xs, ExponentialRef{2.0}).p_value, 0.01);
    for (double x : xs) EXPECT_GT(x, 0.0);
}

TEST(Weights, SqrtTailIntegralAgainstQuadrature) {
    EXPECT_DOUBLE_EQ(sqrt_tail_integral(WeightDistribution::dirac1()), 1.0);
    for (double rate : {0.5, 1.0, 3.0}) {
        const double q = integrate_sqrt_tail([&](double x) { return std::exp(-rate * x); }, 80.0 / rate, 200000);
        EXPECT_NEAR(sqrt_tail_integral(WeightDistribution::exponential(rate)), q, 1e-6) << rate;
    }
    auto d = WeightDistribution::bounded_discrete({0.5, 2.0, 3.0}, {0.2, 0.3, 0.5});
    const double q = integrate_sqrt_tail(
        [](double x) { return x < 0.5 ? 1.0 : x < 2.0 ? 0.8 : x < 3.0 ? 0.5 : 0.0; }, 4.0, 400000);
    EXPECT_NEAR(sqrt_tail_integral(d), q, 1e-5);
}

TEST(PointSet, HandMadePointsAreSortedAndRanked) {
    auto s = make_point_set({0, 10, 0, 10}, {{5, 2, 1}, {1, 7, 1}, {5, 1, 2}, {3, 7, 1}});
    ASSERT_EQ(s.size(), 4u);
    EXPECT_EQ(s.points[0].x, 1.0);
    EXPECT_EQ(s.points[1].x, 3.0);
    EXPECT_EQ(s.points[2].t, 1.0);
    EXPECT_EQ(s.points[3].t, 2.0);
    // Equal t share a rank.
    EXPECT_EQ(s.t_rank[0], s.t_rank[1]);
    EXPECT_LT(s.t_rank[2], s.t_rank[3]);
    EXPECT_LT(s.t_rank[3], s.t_rank[0]);
}

TEST(PointSet, RejectsBadInput) {
    EXPECT_THROW(make_point_set({0, 0, 0, 1}, {}), std::invalid_argument);
    EXPECT_THROW(make_point_set({0, 1, 0, 1}, {{2, 0.5, 1}}), std::invalid_argument);
    EXPECT_THROW(make_point_set({0, 1, 0, 1}, {{0.5, 0.5, 0}}), std::invalid_argument);
    EXPECT_THROW(sample_point_set({0, 1, 0, 1}, 0.0, WeightDistribution::dirac1(), 1), std::invalid_argument);
}

TEST(PointSet, SampledSetIsReproducibleAndInside) {
    const Rect r{-2, 8, 1, 6};
    auto a = sample_point_set(r, 1.5, WeightDistribution::exponential(1.0), 42);
    auto b = sample_point_set(r, 1.5, WeightDistribution::exponential(1.0), 42);
    auto c = sample_point_set(r, 1.5, WeightDistribution::exponential(1.0), 43);
    EXPECT_EQ(a.points, b.points);
    EXPECT_NE(a.points, c.points);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_TRUE(r.contains(a.points[i].x, a.points[i].t));
        if (i) EXPECT_TRUE(x_then_t(a.points[i - 1], a.points[i]));
    }
    EXPECT_EQ(a.t_rank, dense_t_ranks(a.points));
}

TEST(PointSet, CountsArePoisson) {
    std::vector<long long> counts;
    for (std::uint64_t s = 0; s < 400; ++s)
        counts.push_back(static_cast<long long>(sample_point_set({0, 4, 0, 5}, 0.5, WeightDistribution::dirac1(), s).size()));
    EXPECT_GT(chi_square_poisson_test(counts, 10.0).p_value, 0.001);
}

TEST(Measure, MergesAndAccumulates) {
    AtomicMeasure m({{2, 1}, {-1, 2}, {2, 3}, {5, 0.5}});
    ASSERT_EQ(m.size(), 3u);
    EXPECT_EQ(m.atoms()[1], (Atom{2, 4}));
    EXPECT_DOUBLE_EQ(m.total_mass(), 6.5);
    EXPECT_DOUBLE_EQ(m.cumulative(0), 0.0);
    EXPECT_DOUBLE_EQ(m.cumulative(-1), 0.0);
    EXPECT_DOUBLE_EQ(m.cumulative(-1.5), -2.0);
    EXPECT_DOUBLE_EQ(m.cumulative(2), 4.0);
    EXPECT_DOUBLE_EQ(m.left_limit(2), 0.0);
    EXPECT_DOUBLE_EQ(m.cumulative(10), 4.5);
    EXPECT_DOUBLE_EQ(m.mass(-1, 5), 4.5);
    EXPECT_DOUBLE_EQ(m.mass(-2, 5), 6.5);
    EXPECT_EQ(m.restricted(0, 4), AtomicMeasure({{2, 4}}));
    EXPECT_THROW(AtomicMeasure({{1, 0}}), std::invalid_argument);
    EXPECT_THROW(AtomicMeasure({{1, -1}}), std::invalid_argument);
}

TEST(Measure, PeriodicLattice) {
    auto r = periodic_measure(0.0, 2.0, 2.0, Side::Right);
    std::vector<double> pos;
    for (const auto& a : r.atoms()) pos.push_back(a.pos);
    EXPECT_EQ(pos, (std::vector<double>{0.5, 1.0, 1.5, 2.0}));
    auto l = periodic_measure(-1.0, 0.0, 3.0, Side::Left);
    EXPECT_EQ(l.size(), 3u);
    EXPECT_DOUBLE_EQ(l.atoms().front().pos, -1.0);
    EXPECT_LT(l.atoms().back().pos, 0.0);
}

TEST(Measure, PoissonAtomsSpacings) {
    auto m = sample_atomic_poisson(0, 3000, 0.8, WeightDistribution::dirac1(), 9);
    std::vector<double> pos;
    for (const auto& a : m.atoms()) pos.push_back(a.pos);
    EXPECT_GT(ks_test(spacings(pos, 0.0, pos.size()), ExponentialRef{0.8}).p_value, 0.01);
}

TEST(Csv, RoundTrip) {
    std::vector<WeightedPoint> pts{{0.1, 0.2, 1.0}, {1.0 / 3.0, 2.5, 0.75}};
    std::stringstream ss;
    write_points_csv(ss, pts);
    EXPECT_EQ(read_points_csv(ss), pts);

    AtomicMeasure m({{-0.25, 2}, {std::sqrt(2.0), 1}});
    std::stringstream ms;
    write_measure_csv(ms, m);
    EXPECT_EQ(read_measure_csv(ms), m);

    std::stringstream bad("x,y\n1,2\n");
    EXPECT_THROW(read_measure_csv(bad), std::runtime_error);
}

TEST(Seeds, DerivedStreamsAreDistinctAndStable) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t tag = 1; tag <= 7; ++tag)
        for (std::uint64_t i = 0; i < 100; ++i) seen.insert(derive_seed(123, tag, i));
    EXPECT_EQ(seen.size(), 700u);
    EXPECT_EQ(derive_seed(123, 2, 5), derive_seed(123, 2, 5));
    EXPECT_NE(derive_seed(123, 2, 5), derive_seed(124, 2, 5));
}
