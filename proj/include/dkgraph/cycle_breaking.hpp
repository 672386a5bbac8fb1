#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "dkgraph/discrete_trees.hpp"
#include "dkgraph/error.hpp"
#include "dkgraph/labeled_tree.hpp"
#include "dkgraph/multigraph.hpp"
#include "dkgraph/rng.hpp"

namespace dkgraph {

struct CycleBreakResult {
    LabeledTree tree;
    std::vector<Edge> removed;  // oriented (u, v), in removal order
};

/// Removes k uniform oriented removable edges one copy at a time. The i-th
/// removal (u, v) hangs S_{2k-2i+2} on u and S_{2k-2i+1} on v.
inline CycleBreakResult cycle_break(const Multigraph& g, int k, Rng& rng) {
    if (g.surplus() != k) fail(ErrorCode::SurplusMismatch, "surplus is " + std::to_string(g.surplus()));
    // Other stars (S0, S_{2k+1}, ...) may be present as leaves of G.
    for (VertexId v : g.vertices()) {
        if (v.is_star() && v.index >= 1 && v.index <= static_cast<std::uint32_t>(2 * k)) {
            fail(ErrorCode::InvalidParameter, "G already uses the label " + v.str());
        }
    }
    Multigraph cur = g;
    CycleBreakResult out;
    std::vector<std::pair<VertexId, VertexId>> pendant;
    for (int i = 1; i <= k; ++i) {
        const auto cyc = cyc_edges(cur);
        long long total = 0;
        for (const auto& [e, m] : cyc) total += m;
        auto pick = static_cast<long long>(rng.below(static_cast<std::uint64_t>(2 * total)));
        const bool flip = pick % 2 == 1;
        pick /= 2;
        Edge chosen{};
        for (const auto& [e, m] : cyc) {
            if (pick < m) {
                chosen = e;
                break;
            }
            pick -= m;
        }
        if (flip) std::swap(chosen.first, chosen.second);
        cur.remove_edge(chosen.first, chosen.second);
        out.removed.push_back(chosen);
        pendant.emplace_back(chosen.first, VertexId::star(static_cast<std::uint32_t>(2 * k - 2 * i + 2)));
        pendant.emplace_back(chosen.second, VertexId::star(static_cast<std::uint32_t>(2 * k - 2 * i + 1)));
    }
    for (VertexId v : cur.vertices()) out.tree.add_vertex(v);
    for (const auto& [e, m] : cur.multiplicities()) out.tree.add_edge(e.first, e.second);
    for (const auto& [v, star] : pendant) out.tree.add_edge(v, star);
    return out;
}

/// Checks that T has vertices V(G) u {S1..S2k}, keeps the degrees of G and
/// has the stars as leaves.
inline void require_cb_shape(const Multigraph& g, const LabeledTree& t, int k) {
    std::vector<VertexId> expected(g.vertices().begin(), g.vertices().end());
    for (int j = 1; j <= 2 * k; ++j) expected.push_back(VertexId::star(static_cast<std::uint32_t>(j)));
    std::sort(expected.begin(), expected.end());
    if (t.vertices() != expected) fail(ErrorCode::ShapeMismatch, "vertex sets differ");
    if (!t.is_tree()) fail(ErrorCode::ShapeMismatch, "not a tree");
    for (VertexId v : g.vertices()) {
        if (t.degree(v) != g.degree(v)) fail(ErrorCode::ShapeMismatch, "degree of " + v.str() + " differs");
    }
    for (int j = 1; j <= 2 * k; ++j) {
        if (t.degree(VertexId::star(static_cast<std::uint32_t>(j))) != 1) fail(ErrorCode::ShapeMismatch, "star is not a leaf");
    }
}

/// Exact P(CB(G) = T), obtained by replaying the removals that T encodes and
/// multiplying the per-step probabilities of picking that oriented edge.
inline Rational cb_probability(const Multigraph& g, const LabeledTree& t) {
    const long long k = g.surplus();
    require_cb_shape(g, t, static_cast<int>(k));
    if (glue_leaves(t, canonical_pairs(static_cast<int>(k))) != g) return 0;
    Multigraph cur = g;
    Rational prob = 1;
    for (long long i = 1; i <= k; ++i) {
        const VertexId u = t.father(VertexId::star(static_cast<std::uint32_t>(2 * k - 2 * i + 2)));
        const VertexId v = t.father(VertexId::star(static_cast<std::uint32_t>(2 * k - 2 * i + 1)));
        const auto cyc = cyc_edges(cur);
        long long total = 0;
        int m = 0;
        const Edge key = u < v ? Edge{u, v} : Edge{v, u};
        for (const auto& [e, mult] : cyc) {
            total += mult;
            if (e == key) m = mult;
        }
        if (m == 0) return 0;
        // A loop is hit by both orientations of any of its copies.
        prob *= Rational(u == v ? 2 * m : m, 2 * total);
        cur.remove_edge(u, v);
    }
    return prob;
}

/// The closed form circ(G) / (2^k prod_i square(G minus e_1..e_{i-1})).
inline Rational cb_probability_formula(const Multigraph& g, const std::vector<Edge>& removed) {
    Multigraph cur = g;
    BigInt den = 1;
    for (const auto& [u, v] : removed) {
        den *= 2 * square(cur);
        cur.remove_edge(u, v);
    }
    return Rational(circ(g), den);
}

/// square_i(T) for i = 1..k: removable-edge count after gluing the first i pairs.
inline std::vector<long long> glued_squares(const LabeledTree& t, int k) {
    std::vector<long long> out;
    Multigraph g = Multigraph::from_tree(t);
    for (int i = 1; i <= k; ++i) {
        g = glue_leaves(g, {{VertexId::star(static_cast<std::uint32_t>(2 * i - 1)),
                             VertexId::star(static_cast<std::uint32_t>(2 * i))}});
        out.push_back(square(g));
    }
    return out;
}

/// circ(fully glued graph) / prod_i square_i(T), by explicit gluing.
inline Rational bias(const LabeledTree& t, int k) {
    if (k == 0) return 1;
    for (int j = 1; j <= 2 * k; ++j) {
        const VertexId s = VertexId::star(static_cast<std::uint32_t>(j));
        if (!t.contains(s) || t.degree(s) != 1) fail(ErrorCode::NotALeaf, s.str());
    }
    BigInt den = 1;
    for (long long sq : glued_squares(t, k)) den *= sq;
    return Rational(circ(glue_leaves(t, canonical_pairs(k))), den);
}

inline std::uint64_t bias_bound(int k) {
    std::uint64_t b = 1;
    for (int i = 2; i <= k + 1; ++i) b *= static_cast<std::uint64_t>(i);
    return b << k;
}

struct BiasValue {
    std::uint64_t circ = 1;
    std::uint64_t square_product = 1;
    std::vector<int> squares;

    double value() const { return static_cast<double>(circ) / static_cast<double>(square_product); }
    Rational exact() const { return Rational(BigInt(circ), BigInt(square_product)); }
};

/// Bias from the parent array. The glued graph's removable edges are the new
/// edges plus the tree edges on the paths between glued fathers, so
/// square_i = |union of those paths| + i. Only new edges can create loops or
/// parallel copies (a new edge may double a tree edge).
class BiasEvaluator {
public:
    /// Pairs are (S_{2i-1-shift}, S_{2i-shift}); shift = 1 glues S0..S_{2k-1}.
    BiasValue evaluate(const CompactTree& t, int k, int shift = 0) {
        BiasValue out;
        if (k == 0) return out;
        if (t.star_count() < 2 * k + 1 - shift) fail(ErrorCode::InsufficientLeaves, "not enough stars to glue");
        on_path_.assign(t.size(), 0);
        int union_size = 0;
        std::vector<std::pair<int, int>> added;
        for (int i = 1; i <= k; ++i) {
            int a = father(t, 2 * i - 1 - shift);
            int b = father(t, 2 * i - shift);
            if (a > b) std::swap(a, b);
            added.emplace_back(a, b);
            int x = a;
            int y = b;
            while (x != y) {
                if (t.depth[static_cast<std::size_t>(x)] < t.depth[static_cast<std::size_t>(y)]) std::swap(x, y);
                if (!on_path_[static_cast<std::size_t>(x)]) {
                    on_path_[static_cast<std::size_t>(x)] = 1;
                    ++union_size;
                }
                x = t.parent[static_cast<std::size_t>(x)];
            }
            const int sq = union_size + i;
            out.squares.push_back(sq);
            out.square_product *= static_cast<std::uint64_t>(sq);
        }
        std::sort(added.begin(), added.end());
        for (std::size_t i = 0; i < added.size();) {
            std::size_t j = i;
            while (j < added.size() && added[j] == added[i]) ++j;
            const auto [a, b] = added[i];
            auto m = static_cast<int>(j - i);
            if (a == b) {
                out.circ <<= m;
            } else if (t.parent[static_cast<std::size_t>(a)] == b || t.parent[static_cast<std::size_t>(b)] == a) {
                ++m;
            }
            for (int f = 2; f <= m; ++f) out.circ *= static_cast<std::uint64_t>(f);
            i = j;
        }
        return out;
    }

private:
    // S0 is the root, so its father is its only child, node 1.
    static int father(const CompactTree& t, int star) {
        const int node = t.star_node[static_cast<std::size_t>(star)];
        return node == 0 ? 1 : t.parent[static_cast<std::size_t>(node)];
    }

    std::vector<char> on_path_;
};

inline BiasValue bias_fast(const CompactTree& t, int k) {
    BiasEvaluator ev;
    return ev.evaluate(t, k);
}

} // namespace dkgraph
