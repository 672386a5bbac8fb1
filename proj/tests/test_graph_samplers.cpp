#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "fixtures.hpp"

using namespace dkgraph;
using namespace fixtures;

namespace {

double double_factorial_odd(int n) {
    double out = 1;
    for (int i = n; i > 1; i -= 2) out *= i;
    return out;
}

std::map<Multigraph, double> to_double(const std::map<Multigraph, Rational>& law) {
    std::map<Multigraph, double> out;
    for (const auto& [g, p] : law) out[g] = static_cast<double>(p);
    return out;
}

} // namespace

TEST(GraphSamplers, MatchingLawCountsAllMatchings) {
    for (const auto& raw : {as_ll({2, 2}), as_ll({3, 3}), as_ll({3, 2, 1}), as_ll({2, 2, 2, 2}), as_ll({4, 3, 2, 1, 1, 1})}) {
        const auto d = DegreeSequence::validate(raw, SequenceKind::half_edge);
        BigInt total = 0;
        for (const auto& [g, c] : cm_matching_law(d)) {
            total += c;
            for (int i = 1; i <= d.size(); ++i) EXPECT_EQ(g.degree(V(static_cast<std::uint32_t>(i))), d.degree(i));
        }
        EXPECT_EQ(static_cast<double>(total), double_factorial_odd(static_cast<int>(d.sum()) - 1));
    }
    const auto big = DegreeSequence::validate({8, 8}, SequenceKind::half_edge);
    EXPECT_EQ(code_of([&] { cm_matching_law(big); }), ErrorCode::TooLarge);
}

TEST(GraphSamplers, MatchingCountTimesCircIsConstant) {
    // Each labelled multigraph arises from prod d_i! / circ(G) matchings.
    const auto d = DegreeSequence::validate({3, 3, 2, 2}, SequenceKind::half_edge);
    for (const auto& [g, c] : cm_matching_law(d)) EXPECT_EQ(c * circ(g), BigInt(6 * 6 * 2 * 2));
    const auto law = cm_conditioned_oracle(d, 2);
    const Rational first = law.begin()->second;
    for (const auto& [g, p] : law) EXPECT_EQ(p, first);
}

TEST(GraphSamplers, ConfigurationModel) {
    Rng rng(2);
    const auto d = DegreeSequence::validate({3, 2, 1}, SequenceKind::half_edge);
    std::map<Multigraph, double> seen;
    for (int i = 0; i < 30000; ++i) seen[sample_configuration_model(d, rng)] += 1;
    std::map<Multigraph, double> exact;
    for (const auto& [g, c] : cm_matching_law(d)) exact[g] = static_cast<double>(c) / 15.0;
    EXPECT_LT(total_variation(seen, exact), 0.02);
    EXPECT_EQ(code_of([] {
                  Rng r(1);
                  sample_configuration_model(DegreeSequence::validate({1, 0, 0}, SequenceKind::tree), r);
              }),
              ErrorCode::OddSum);
}

TEST(GraphSamplers, DkSamplerSmallCases) {
    Rng rng(3);
    // Surplus-1 sequence (1,1): V1 and V2 joined by a double edge, nothing else.
    const auto pair = DegreeSequence::validate({1, 1}, SequenceKind::surplus, 1);
    DkSampler sampler(pair, 1);
    EXPECT_EQ(sampler.shift(), 1);
    for (int i = 0; i < 50; ++i) EXPECT_EQ(sampler.sample(rng), double_edge_fixture());
    EXPECT_LE(sampler.stats().max_bias, 4.0);

    const auto cherry = DegreeSequence::validate({1}, SequenceKind::surplus, 1);
    Multigraph loop;
    loop.add_edge(V(1), V(1));
    EXPECT_EQ(sample_dk_graph(cherry, 1, rng), loop);

    const auto small = DegreeSequence::validate({1, 1, 0, 0}, SequenceKind::tree);
    EXPECT_EQ(code_of([&] { DkSampler(small, 2); }), ErrorCode::InsufficientLeaves);
    EXPECT_EQ(code_of([&] { DkSampler(pair, 2); }), ErrorCode::SurplusMismatch);
}

TEST(GraphSamplers, DkSamplerIsUniform) {
    // Surplus-1 sequence with three stars kept: every output graph should be
    // equally likely.
    Rng rng(4);
    const auto d = DegreeSequence::validate({2, 1, 1, 0}, SequenceKind::surplus, 1);
    DkSampler sampler(d, 1);
    std::map<Multigraph, double> seen;
    const int n = 60000;
    for (int i = 0; i < n; ++i) {
        const auto g = sampler.sample(rng);
        ASSERT_EQ(g.surplus(), 1);
        ASSERT_EQ(g.degree(V(1)), 3);
        ASSERT_EQ(g.degree(V(2)), 2);
        ASSERT_EQ(g.degree(V(3)), 2);
        seen[g] += 1;
    }
    // Oracle: every connected multigraph with these degrees, found by
    // enumerating trees and gluing, each counted once.
    std::map<Multigraph, double> uniform;
    enumerate_d_trees(sampler.tree_sequence(), [&](const LabeledTree& t) { uniform[glue_leaves(t, sampler.pairs())] = 1; });
    for (auto& [g, p] : uniform) p = 1.0 / static_cast<double>(uniform.size());
    EXPECT_EQ(seen.size(), uniform.size());
    EXPECT_LT(total_variation(seen, uniform), 0.03);
}

TEST(GraphSamplers, HalfEdgeSamplerMatchesConditionedCm) {
    Rng rng(5);
    for (const auto& raw : {as_ll({3, 3}), as_ll({3, 2, 1}), as_ll({2, 2, 2}), as_ll({3, 3, 1, 1})}) {
        const auto d = DegreeSequence::validate(raw, SequenceKind::half_edge);
        const int k = d.half_edge_surplus();
        HalfEdgeDkSampler sampler(d);
        std::map<Multigraph, double> seen;
        for (int i = 0; i < 20000; ++i) seen[sampler.sample(rng)] += 1;
        EXPECT_LT(total_variation(seen, to_double(cm_conditioned_oracle(d, k))), 0.03) << raw.size();
    }
}

TEST(GraphSamplers, MultiplicativeMarginals) {
    Rng rng(6);
    const MultiplicativeParams w{2.0, {1.0, 0.5, 0.25}};
    int edge12 = 0, multi12 = 0;
    double loops1 = 0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
        const auto [simple, multi] = sample_multiplicative_coupled(w, rng);
        edge12 += simple.multiplicity(V(1), V(2));
        multi12 += multi.multiplicity(V(1), V(2));
        loops1 += multi.multiplicity(V(1), V(1));
        ASSERT_EQ(simple.multiplicity(V(2), V(3)) > 0, multi.multiplicity(V(2), V(3)) > 0);
    }
    const double p = -std::expm1(-1.0);
    EXPECT_NEAR(edge12 / double(n), p, 4 * std::sqrt(p * (1 - p) / n));
    EXPECT_NEAR(multi12 / double(n), 1.0, 4 * std::sqrt(1.0 / n));
    EXPECT_NEAR(loops1 / n, 1.0, 4 * std::sqrt(1.0 / n));

    int plain = 0;
    for (int i = 0; i < n; ++i) plain += sample_multiplicative_graph(w, rng).multiplicity(V(1), V(3));
    const double q = -std::expm1(-0.5);
    EXPECT_NEAR(plain / double(n), q, 4 * std::sqrt(q * (1 - q) / n));

    double mean13 = 0;
    for (int i = 0; i < n; ++i) mean13 += sample_multiplicative_multigraph(w, rng).multiplicity(V(1), V(3));
    EXPECT_NEAR(mean13 / n, 0.5, 4 * std::sqrt(0.5 / n));
    EXPECT_EQ(code_of([&] {
                  Rng r(1);
                  sample_multiplicative_graph({-1.0, {1.0}}, r);
              }),
              ErrorCode::InvalidParameter);
}

TEST(GraphSamplers, PkOracleTwoAtoms) {
    const auto p = PVector::make({0.7, 0.3}, 0.0);
    const auto law = pk_law_oracle(p, 1);
    ASSERT_EQ(law.size(), 3u);
    // Weights p1 p2 (double edge), p1^2 (loop at V1), p2^2 (loop at V2), each times p1 p2.
    const double z = 0.21 + 0.49 + 0.09;
    Multigraph dbl = double_edge_fixture();
    Multigraph l1;
    l1.add_edge(V(1), V(2));
    l1.add_edge(V(1), V(1));
    Multigraph l2;
    l2.add_edge(V(1), V(2));
    l2.add_edge(V(2), V(2));
    EXPECT_NEAR(law.at(dbl), 0.21 / z, 1e-12);
    EXPECT_NEAR(law.at(l1), 0.49 / z, 1e-12);
    EXPECT_NEAR(law.at(l2), 0.09 / z, 1e-12);
    EXPECT_EQ(code_of([] { pk_law_oracle(PVector::make({0.5}, 0.5), 1); }), ErrorCode::InvalidParameter);
}

TEST(GraphSamplers, PkSamplerMatchesOracle) {
    Rng rng(7);
    const auto p = PVector::make({0.7, 0.3}, 0.0);
    const auto law = pk_law_oracle(p, 1);
    std::map<Multigraph, double> seen;
    RejectionStats stats;
    for (int i = 0; i < 30000; ++i) seen[sample_pk_graph_prefix(p, 1, 40, rng, &stats)] += 1;
    EXPECT_LT(total_variation(seen, law), 0.03);
    EXPECT_LE(stats.max_bias, 4.0);
    EXPECT_GT(stats.accepted, 0u);
}

TEST(GraphSamplers, StarsToVertices) {
    Multigraph g;
    g.add_edge(V(1), S(0));
    g.add_edge(V(1), S(5));
    const auto h = stars_to_vertices(g, 2);
    EXPECT_EQ(h.multiplicity(V(1), V(2)), 1);
    EXPECT_EQ(h.multiplicity(V(1), V(3)), 1);
}

TEST(GraphSamplers, SpecSmallExamples) {
    Rng rng(8);
    const auto one_one = DegreeSequence::validate({1, 1}, SequenceKind::half_edge);
    Multigraph edge;
    edge.add_edge(V(1), V(2));
    EXPECT_EQ(cm_conditioned_oracle(one_one, 0).at(edge), 1);
    EXPECT_EQ(sample_configuration_model(one_one, rng), edge);
    Multigraph loop;
    loop.add_edge(V(1), V(1));
    EXPECT_EQ(sample_configuration_model(DegreeSequence::validate({2}, SequenceKind::half_edge), rng), loop);

    const auto two_two = DegreeSequence::validate({2, 2}, SequenceKind::half_edge);
    const auto matchings = cm_matching_law(two_two);
    EXPECT_EQ(matchings.at(double_edge_fixture()), 2);
    EXPECT_EQ(cm_conditioned_oracle(two_two, 1).size(), 1u);

    EXPECT_EQ(pk_law_oracle(PVector::make({1.0}, 0.0), 1).at(loop), 1.0);
    const auto sym = pk_law_oracle(PVector::make({0.5, 0.5}, 0.0), 1);
    Multigraph l1 = edge, l2 = edge;
    l1.add_edge(V(1), V(1));
    l2.add_edge(V(2), V(2));
    EXPECT_NEAR(sym.at(l1), sym.at(l2), 1e-15);
    const auto lop = pk_law_oracle(PVector::make({2.0 / 3, 1.0 / 3}, 0.0), 1);
    // Loop at V1 vs loop at V2 differ by (p1 p1) / (p2 p2) = 4.
    EXPECT_NEAR(lop.at(l1) / lop.at(l2), 4.0, 1e-12);

    for (int i = 0; i < 20; ++i) EXPECT_EQ(sample_pk_graph_prefix(PVector::make({1.0}, 0.0), 1, 5, rng), loop);
    const auto tree = sample_pk_graph_prefix(PVector::make({0.5, 0.5}, 0.0), 0, 10, rng);
    EXPECT_EQ(tree.surplus(), 0);

    EXPECT_EQ(sample_multiplicative_graph({0.0, {1.0, 1.0}}, rng).edge_count(), 0);
    EXPECT_EQ(sample_multiplicative_multigraph({0.0, {1.0, 1.0}}, rng).edge_count(), 0);
    int hits = 0;
    for (int i = 0; i < 40000; ++i) hits += sample_multiplicative_graph({std::log(4.0), {1.0, 1.0}}, rng).edge_count() > 0;
    EXPECT_NEAR(hits / 40000.0, 0.75, 4 * std::sqrt(0.75 * 0.25 / 40000));
}

TEST(GraphSamplers, DkOutputInvariants) {
    Rng rng(9);
    const auto d2 = DegreeSequence::validate({3, 2, 2, 1, 0, 0}, SequenceKind::surplus, 2);
    DkSampler sampler(d2, 2);
    for (int i = 0; i < 500; ++i) {
        const auto g = sampler.sample(rng);
        ASSERT_EQ(g.surplus(), 2);
        for (int v = 1; v <= 4; ++v) ASSERT_EQ(g.degree(V(static_cast<std::uint32_t>(v))), d2.degree(v) + 1);
        ASSERT_LE(sampler.last_bias().value(), 24.0);
    }
}

TEST(Edgepoints, Examples) {
    LabeledTree path;
    path.add_edge(S(0), V(1));
    path.add_edge(V(1), S(1));
    EXPECT_EQ(shortcut_edgepoints(path).key(), "S0-S1 ");
    const auto worked = example_tree();
    EXPECT_EQ(insert_edgepoints(worked, {}), worked);

    LabeledTree edge;
    edge.add_edge(S(0), S(1));
    EXPECT_EQ(insert_edgepoints(edge, {{V(1)}}), path);
    EXPECT_EQ(code_of([&] { insert_edgepoints(path, {{V(1)}, {}}); }), ErrorCode::VertexCollision);
    EXPECT_EQ(code_of([&] { insert_edgepoints(path, {{V(2)}}); }), ErrorCode::ShapeMismatch);

    Rng rng(1);
    const auto none = sample_ordered_partition(std::vector<int>{}, 3, rng);
    for (const auto& slot : none) EXPECT_TRUE(slot.empty());
    int first = 0;
    for (int i = 0; i < 10000; ++i) first += sample_ordered_partition(std::vector<int>{7}, 2, rng)[0].size();
    EXPECT_NEAR(first, 5000, 4 * 50);
}

TEST(Edgepoints, RoundTrip) {
    Rng rng(2);
    const auto d = DegreeSequence::validate({3, 2, 2, 0, 0, 0, 0, 0, 0}, SequenceKind::tree);
    for (int trial = 0; trial < 200; ++trial) {
        const auto t = sample_d_tree(d, rng);
        std::vector<VertexId> points;
        for (std::uint32_t i = 20; i < 20 + rng.below(6); ++i) points.push_back(V(i));
        const auto w = sample_ordered_partition(points, static_cast<int>(t.edge_count()), rng);
        EXPECT_EQ(shortcut_edgepoints(insert_edgepoints(t, w)), t);
    }
}

TEST(Edgepoints, CompositionLaw) {
    // 4 items in 3 slots: every composition (r1, r2, r3) has probability 1 / C(6, 2).
    Rng rng(3);
    std::map<std::vector<std::size_t>, double> seen;
    for (int i = 0; i < 60000; ++i) {
        const auto part = sample_ordered_partition(std::vector<int>{1, 2, 3, 4}, 3, rng);
        seen[{part[0].size(), part[1].size(), part[2].size()}] += 1;
    }
    std::vector<double> counts, probs;
    for (std::size_t a = 0; a <= 4; ++a) {
        for (std::size_t b = 0; a + b <= 4; ++b) {
            counts.push_back(seen[{a, b, 4 - a - b}]);
            probs.push_back(1.0 / 15);
        }
    }
    EXPECT_GT(chi_square_gof(counts, probs).p_value, 1e-3);
}

TEST(Edgepoints, ViaEdgepointsIsUniform) {
    Rng rng(4);
    const auto d = DegreeSequence::validate({1, 1, 0, 0}, SequenceKind::tree);
    std::map<std::string, double> seen;
    for (int i = 0; i < 40000; ++i) seen[sample_d_tree_via_edgepoints(d, rng).key()] += 1;
    std::map<std::string, double> exact;
    for (const auto& t : all_d_trees(d)) exact[t.key()] = 0.5;
    EXPECT_LT(total_variation(seen, exact), 0.02);
}
