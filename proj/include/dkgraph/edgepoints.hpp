#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "dkgraph/discrete_trees.hpp"
#include "dkgraph/error.hpp"
#include "dkgraph/labeled_tree.hpp"
#include "dkgraph/params.hpp"
#include "dkgraph/rng.hpp"

namespace dkgraph {

/// Contracts every degree-2 vertex into the edge joining its two neighbours.
inline LabeledTree shortcut_edgepoints(LabeledTree t) {
    for (VertexId v : t.vertices()) {
        if (t.degree(v) != 2) continue;
        const VertexId a = t.neighbors(v)[0];
        const VertexId b = t.neighbors(v)[1];
        t.remove_vertex(v);
        t.add_edge(a, b);
    }
    return t;
}

/// T's edges oriented from the smaller to the larger label, in sorted order.
/// This is the slot order used by insert_edgepoints.
inline std::vector<Edge> canonical_oriented_edges(const LabeledTree& t) { return t.edges(); }

/// Subdivides the i-th canonical edge (u, v) into u - w_1 - ... - w_r - v.
inline LabeledTree insert_edgepoints(LabeledTree t, const std::vector<std::vector<VertexId>>& partition) {
    if (partition.empty()) return t;
    const auto edges = canonical_oriented_edges(t);
    if (partition.size() != edges.size()) fail(ErrorCode::ShapeMismatch, "one list per edge expected");
    std::set<VertexId> seen;
    for (const auto& list : partition) {
        for (VertexId w : list) {
            if (t.contains(w) || !seen.insert(w).second) fail(ErrorCode::VertexCollision, w.str());
        }
    }
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (partition[i].empty()) continue;
        const auto [u, v] = edges[i];
        t.remove_edge(u, v);
        VertexId prev = u;
        for (VertexId w : partition[i]) {
            t.add_edge(prev, w);
            prev = w;
        }
        t.add_edge(prev, v);
    }
    return t;
}

/// Uniform over all ways to place the items into n_slots ordered lists: a
/// uniform permutation cut by a uniform composition (stars and bars).
template <class T>
std::vector<std::vector<T>> sample_ordered_partition(std::vector<T> items, int n_slots, Rng& rng) {
    if (n_slots < 1) fail(ErrorCode::InvalidParameter, "n_slots must be at least 1");
    rng.shuffle(std::span<T>(items));
    const std::size_t m = items.size();
    const std::size_t positions = m + static_cast<std::size_t>(n_slots) - 1;
    // Choose n_slots-1 bar positions among m + n_slots - 1 by a partial shuffle.
    std::vector<std::size_t> idx(positions);
    for (std::size_t i = 0; i < positions; ++i) idx[i] = i;
    const auto bars = static_cast<std::size_t>(n_slots - 1);
    for (std::size_t i = 0; i < bars; ++i) std::swap(idx[i], idx[i + rng.below(positions - i)]);
    std::vector<char> is_bar(positions, 0);
    for (std::size_t i = 0; i < bars; ++i) is_bar[idx[i]] = 1;
    std::vector<std::vector<T>> out(static_cast<std::size_t>(n_slots));
    std::size_t slot = 0;
    std::size_t next = 0;
    for (std::size_t pos = 0; pos < positions; ++pos) {
        if (is_bar[pos]) {
            ++slot;
        } else {
            out[slot].push_back(items[next++]);
        }
    }
    return out;
}

/// D with its entries equal to 1 removed (those vertices are the edgepoints).
inline DegreeSequence nabla_sequence(const DegreeSequence& d) {
    require_tree_kind(d);
    std::vector<long long> raw;
    for (int x : d.degrees()) {
        if (x != 1) raw.push_back(x);
    }
    return DegreeSequence::validate(raw, SequenceKind::tree);
}

inline std::vector<VertexId> edgepoint_vertices(const DegreeSequence& d) {
    std::vector<VertexId> out;
    for (int i = 1; i <= d.size(); ++i) {
        if (d.degree(i) == 1) out.push_back(VertexId::internal(static_cast<std::uint32_t>(i)));
    }
    return out;
}

/// A D-tree obtained from a nabla-D-tree and a uniform ordered partition of
/// the edgepoints over its edges.
inline LabeledTree sample_d_tree_via_edgepoints(const DegreeSequence& d, Rng& rng) {
    const DegreeSequence nd = nabla_sequence(d);
    const LabeledTree base = sample_d_tree(nd, rng);
    const auto partition = sample_ordered_partition(edgepoint_vertices(d), nd.size() - 1, rng);
    return insert_edgepoints(base, partition);
}

} // namespace dkgraph
