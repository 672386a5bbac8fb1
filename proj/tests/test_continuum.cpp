#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"

using namespace dkgraph;
using namespace fixtures;

namespace {

SbTree random_sb(std::size_t n, Rng& rng, std::vector<double> extra = {}) {
    std::vector<double> y, z;
    double pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
        pos += 0.05 + rng.uniform();
        y.push_back(pos);
    }
    for (std::size_t i = 0; i + 1 < n; ++i) z.push_back(rng.uniform() * y[i]);
    return sb_build(y, z, extra);
}

// Three-case recursion on [0, y_i]: both points below y_{i-1}, both above,
// or one on each side (go through the anchor z_{i-1}).
double recursion_distance(const std::vector<double>& y, const std::vector<double>& z, std::size_t i, double a, double b) {
    if (i == 1) return std::abs(a - b);
    const double lo = y[i - 2];
    if (a <= lo && b <= lo) return recursion_distance(y, z, i - 1, a, b);
    if (a > lo && b > lo) return std::abs(a - b);
    if (a > lo) std::swap(a, b);
    return recursion_distance(y, z, i - 1, a, z[i - 2]) + (b - lo);
}

struct RandomSb {
    std::vector<double> y, z, extra;
    SbTree sb;
};

RandomSb random_sb_with_probes(std::size_t n, std::size_t probes, Rng& rng) {
    RandomSb out;
    double pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
        pos += 0.1 + rng.uniform();
        out.y.push_back(pos);
    }
    for (std::size_t i = 0; i + 1 < n; ++i) out.z.push_back(rng.uniform() * out.y[i]);
    for (std::size_t i = 0; i < probes; ++i) out.extra.push_back(rng.uniform() * pos);
    out.sb = sb_build(out.y, out.z, out.extra);
    return out;
}

} // namespace

TEST(Continuum, SbBuildExamples) {
    const std::vector<double> y1{1.0};
    const auto one = sb_build(y1, {});
    EXPECT_DOUBLE_EQ(one.tree.distance(0, one.cut_node[1]), 1.0);

    const std::vector<double> y2{1.0, 2.0};
    const std::vector<double> z2{0.5};
    const auto two = sb_build(y2, z2);
    EXPECT_DOUBLE_EQ(two.tree.distance(two.cut_node[1], two.cut_node[2]), 1.5);
    EXPECT_EQ(two.tree.mark_names(), (std::vector<std::string>{"Y1", "Y2"}));

    const std::vector<double> bad{1.0, 0.5};
    EXPECT_EQ(code_of([&] { sb_build(bad, z2); }), ErrorCode::CutsNotIncreasing);
    const std::vector<double> far{1.5};
    EXPECT_EQ(code_of([&] { sb_build(y2, far); }), ErrorCode::AnchorOutOfRange);
}

TEST(Continuum, SbDistancesFollowRecursion) {
    Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const auto r = random_sb_with_probes(8, 6, rng);
        std::vector<double> positions = r.y;
        positions.insert(positions.end(), r.extra.begin(), r.extra.end());
        for (double a : positions) {
            for (double b : positions) {
                EXPECT_NEAR(r.sb.tree.distance(r.sb.node_at(a), r.sb.node_at(b)),
                            recursion_distance(r.y, r.z, r.y.size(), a, b), 1e-12);
            }
        }
        const double p = r.y[2] + 0.25 * (r.y[3] - r.y[2]), q = r.y[2] + 0.75 * (r.y[3] - r.y[2]);
        const auto sb2 = sb_build(r.y, r.z, std::vector<double>{p, q});
        EXPECT_NEAR(sb2.tree.distance(sb2.node_at(p), sb2.node_at(q)), q - p, 1e-12);
    }
}

TEST(Continuum, FourPointOnSbTrees) {
    Rng rng(2);
    for (int trial = 0; trial < 30; ++trial) {
        const auto sb = random_sb(9, rng);
        EXPECT_TRUE(check_four_point(sb.tree.mark_distance_matrix(), 1e-9).ok);
    }
}

TEST(Continuum, BrownianFirstCut) {
    Rng rng(3);
    const auto theta = ThetaVector::make(1.0, {});
    std::vector<double> first;
    for (int i = 0; i < 20000; ++i) {
        const auto r = sample_icrt(theta, 3, rng);
        first.push_back(r.y[0]);
        for (std::size_t j = 0; j < r.y.size(); ++j) {
            ASSERT_LE(r.z[j], r.y[j]);
            if (j) {
                ASSERT_GT(r.y[j], r.y[j - 1]);
            }
        }
    }
    EXPECT_GT(ks_one_sample(first, [](double y) { return -std::expm1(-y * y / 2); }).p_value, 0.01);
}

TEST(Continuum, BrownianCutCount) {
    Rng rng(4);
    const auto theta = ThetaVector::make(1.0, {});
    const double y_max = 2.0;  // mean y^2 / 2 = 2
    std::vector<double> counts(8, 0.0);
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const auto r = sample_icrt_until(theta, y_max, rng);
        counts[std::min<std::size_t>(r.y.size(), 7)] += 1;
    }
    std::vector<double> probs(8, 0.0);
    double tail = 1;
    double p = std::exp(-2.0);
    for (int k = 0; k < 7; ++k) {
        probs[static_cast<std::size_t>(k)] = p;
        tail -= p;
        p *= 2.0 / (k + 1);
    }
    probs[7] = tail;
    EXPECT_GT(chi_square_gof(counts, probs).p_value, 0.01);
}

TEST(Continuum, SingleAtom) {
    Rng rng(5);
    const auto theta = ThetaVector::make(0.0, {1.0});
    EXPECT_FALSE(theta.mu_infinite());
    std::vector<double> xs;
    for (int i = 0; i < 5000; ++i) {
        const auto r = sample_icrt(theta, 4, rng);
        for (double z : r.z) ASSERT_EQ(z, r.X[0]);
        xs.push_back(r.X[0]);
    }
    EXPECT_GT(ks_one_sample(xs, [](double x) { return -std::expm1(-x); }).p_value, 0.01);
}

TEST(Continuum, MetricGlueExamples) {
    const std::vector<double> y{1.0};
    auto sb = sb_build(y, {}, std::vector<double>{0.2, 0.9});
    sb.tree.add_mark(0, "root");
    // Marks: Y1 (index 0) at 1, root (index 1) at 0.
    const auto g = metric_glue(sb.tree, {{1, 0}});
    EXPECT_NEAR(g.distance(sb.node_at(0.2), sb.node_at(0.9)), 0.3, 1e-15);
    EXPECT_EQ(code_of([&] { metric_glue(sb.tree, {{0, 5}}); }), ErrorCode::UnknownMark);

    // Gluing a point to a zero-distance twin changes nothing.
    MetricTree t;
    const int a = t.add_child(0, 1.0);
    const int b = t.add_child(a, 0.0);
    const int c = t.add_child(0, 2.0);
    t.add_mark(a);
    t.add_mark(b);
    const auto same = metric_glue(t, {{0, 1}});
    EXPECT_DOUBLE_EQ(same.distance(c, a), 3.0);
}

TEST(Continuum, GlueMatchesIteratedFormulaAndOrder) {
    Rng rng(6);
    for (int trial = 0; trial < 100; ++trial) {
        const auto r = random_sb_with_probes(6, 5, rng);
        const auto& sb = r.sb;
        std::vector<int> nodes(sb.tree.marks().begin(), sb.tree.marks().end());
        for (double e : r.extra) nodes.push_back(sb.node_at(e));
        const auto base = sb.tree.distance_matrix(nodes);
        const auto space = metric_glue(sb.tree, {{0, 1}, {2, 3}});
        const auto swapped = metric_glue(sb.tree, {{2, 3}, {0, 1}});
        const auto oracle = iterated_glue(base, {{0, 1}, {2, 3}});
        const auto oracle_rev = iterated_glue(base, {{2, 3}, {0, 1}});
        const auto m = sampled_distance_matrix(space, nodes);
        const auto ms = sampled_distance_matrix(swapped, nodes);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            for (std::size_t j = 0; j < nodes.size(); ++j) {
                EXPECT_NEAR(m[i][j], oracle[i][j], 1e-12);
                EXPECT_NEAR(m[i][j], ms[i][j], 1e-12);
                EXPECT_NEAR(oracle[i][j], oracle_rev[i][j], 1e-12);
                EXPECT_LE(m[i][j], base[i][j] + 1e-12);
                for (std::size_t k = 0; k < nodes.size(); ++k) EXPECT_LE(m[i][j], m[i][k] + m[k][j] + 1e-12);
            }
        }
    }
    MetricTree single;
    EXPECT_EQ(sampled_distance_matrix(GluedSpace(single, {}), {0}), (Matrix<double>{{0.0}}));
}

TEST(Continuum, CoreMeasureExamples) {
    MetricTree seg;
    const int end = seg.add_child(0, 5.0);
    seg.add_mark(0);
    seg.add_mark(end);
    EXPECT_DOUBLE_EQ(core_measure(seg, 1), 5.0);
    EXPECT_EQ(code_of([&] { core_measure(seg, 2); }), ErrorCode::InsufficientMarks);

    MetricTree two;
    const int hub = two.add_child(0, 1.0);
    const int a1 = two.add_child(hub, 2.0);
    const int a2 = two.add_child(hub, 3.0);
    const int b1 = two.add_child(0, 4.0);
    const int b2 = two.add_child(0, 1.5);
    for (int v : {a1, a2, b1, b2}) two.add_mark(v);
    const auto cm = core_measures(two, 2);
    EXPECT_DOUBLE_EQ(cm[0], 5.0);
    EXPECT_DOUBLE_EQ(cm[1] - cm[0], 5.5);
}

TEST(Continuum, CoreMeasureMonteCarlo) {
    Rng rng(7);
    const auto sb = random_sb(6, rng);
    const double exact = core_measure(sb.tree, 2);
    // Uniform points on the whole tree; a point counts when it lies on one of the two geodesics.
    const auto& t = sb.tree;
    const double total = t.total_length();
    std::vector<double> cum;
    double run = 0;
    for (std::size_t v = 0; v < t.node_count(); ++v) cum.push_back(run += t.length(static_cast<int>(v)));
    auto on_path = [&](int a, int b, int seg) {
        for (int s : t.path_segments(a, b)) {
            if (s == seg) return true;
        }
        return false;
    };
    long long hits = 0;
    const long long n = 4'000'000;
    for (long long i = 0; i < n; ++i) {
        const double u = rng.uniform() * total;
        const int seg = static_cast<int>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
        hits += on_path(t.mark_node(0), t.mark_node(1), seg) || on_path(t.mark_node(2), t.mark_node(3), seg);
    }
    EXPECT_NEAR(total * static_cast<double>(hits) / static_cast<double>(n) / exact, 1.0, 1e-3 * 3);
}

TEST(Continuum, CoreMeasureScaling) {
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        auto sb = random_sb(8, rng);
        const double before = core_measure(sb.tree, 3);
        sb.tree.scale(2.5);
        EXPECT_NEAR(core_measure(sb.tree, 3), 2.5 * before, 1e-12 * before);
    }
}

TEST(Continuum, WeightedIcrg) {
    Rng rng(9);
    const auto theta = ThetaVector::make(1.0, {});
    const auto plain = sample_icrg_weighted(theta, 0, 5, rng);
    EXPECT_EQ(plain.weight, 1.0);
    std::vector<double> weights;
    for (int i = 0; i < 2000; ++i) {
        const auto s = sample_icrg_weighted(theta, 1, 3, rng);
        ASSERT_TRUE(std::isfinite(s.weight));
        ASSERT_GT(s.weight, 0);
        ASSERT_NEAR(s.weight, 1.0 / s.squares[0], 1e-15);
        weights.push_back(s.weight);
    }
    double prev = truncation_mass(weights, 1.0);
    for (double m : {10.0, 100.0, 1000.0}) {
        const double cur = truncation_mass(weights, m);
        EXPECT_LE(cur, prev);
        prev = cur;
    }
    std::uint64_t iters = 0;
    const auto capped = sample_icrg_capped(theta, 1, 2, 5.0, rng, &iters);
    EXPECT_EQ(capped.weight, 1.0);
    EXPECT_GE(iters, 1u);
}

TEST(Continuum, RealizationJson) {
    Rng rng(10);
    const auto r = sample_icrt(ThetaVector::make(0.6, {0.8}), 4, rng);
    const auto j = to_json(r);
    EXPECT_EQ(j.at("cuts").size(), 4u);
    EXPECT_EQ(j.at("atoms").size(), 1u);
    EXPECT_TRUE(j.at("mu_infinite").get<bool>());
}
