#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "dkgraph/error.hpp"
#include "dkgraph/labeled_tree.hpp"
#include "dkgraph/multigraph.hpp"
#include "dkgraph/params.hpp"
#include "dkgraph/rng.hpp"
#include "dkgraph/vertex.hpp"

namespace dkgraph {

/// Parent-array form of a stick-breaking tree rooted at S0. Node 0 is S0.
struct CompactTree {
    std::vector<VertexId> label;
    std::vector<int> parent;  // -1 at the root
    std::vector<int> depth;
    std::vector<int> star_node;  // star j -> node

    std::size_t size() const { return label.size(); }
    int star_count() const { return static_cast<int>(star_node.size()); }

    LabeledTree to_labeled() const {
        LabeledTree t;
        t.add_vertex(label[0]);
        for (std::size_t v = 1; v < label.size(); ++v) {
            t.add_edge(label[static_cast<std::size_t>(parent[v])], label[v]);
        }
        return t;
    }

    int lca(int a, int b) const {
        while (depth[static_cast<std::size_t>(a)] > depth[static_cast<std::size_t>(b)]) a = parent[static_cast<std::size_t>(a)];
        while (depth[static_cast<std::size_t>(b)] > depth[static_cast<std::size_t>(a)]) b = parent[static_cast<std::size_t>(b)];
        while (a != b) {
            a = parent[static_cast<std::size_t>(a)];
            b = parent[static_cast<std::size_t>(b)];
        }
        return a;
    }

    int distance(int a, int b) const {
        return depth[static_cast<std::size_t>(a)] + depth[static_cast<std::size_t>(b)] -
               2 * depth[static_cast<std::size_t>(lca(a, b))];
    }
};

/// Incremental stick-breaking: push A_1, A_2, ... and the tree grows by one
/// edge per push. A vertex seen before triggers a new star on the previous
/// vertex instead. Buffers are reused across reset() calls.
class StickBreaker {
public:
    void reset() {
        tree_.label.assign(1, VertexId::star(0));
        tree_.parent.assign(1, -1);
        tree_.depth.assign(1, 0);
        tree_.star_node.assign(1, 0);
        for (int idx : touched_) internal_node_[static_cast<std::size_t>(idx)] = -1;
        touched_.clear();
        last_ = -1;
        steps_ = 0;
    }

    StickBreaker() { reset(); }

    void push(VertexId a) {
        ++steps_;
        if (last_ < 0) {
            last_ = add_node(a, 0);
            return;
        }
        const int existing = lookup(a);
        if (existing < 0) {
            last_ = add_node(a, last_);
        } else {
            add_star(last_);
            last_ = existing;
        }
    }

    /// Attaches the final star to the last vertex (or S1 to S0 for an empty tuple).
    void finish() { add_star(last_ < 0 ? 0 : last_); }

    const CompactTree& tree() const { return tree_; }
    CompactTree& tree() { return tree_; }
    int steps() const { return steps_; }

private:
    int lookup(VertexId a) const {
        if (!a.is_internal()) return -1;  // overflow vertices never repeat
        return a.index < internal_node_.size() ? internal_node_[a.index] : -1;
    }

    int add_node(VertexId a, int parent) {
        const int id = static_cast<int>(tree_.label.size());
        tree_.label.push_back(a);
        tree_.parent.push_back(parent);
        tree_.depth.push_back(tree_.depth[static_cast<std::size_t>(parent)] + 1);
        if (a.is_internal()) {
            if (a.index >= internal_node_.size()) internal_node_.resize(a.index + 1, -1);
            internal_node_[a.index] = id;
            touched_.push_back(static_cast<int>(a.index));
        }
        return id;
    }

    void add_star(int parent) {
        const auto j = static_cast<std::uint32_t>(tree_.star_node.size());
        const int id = static_cast<int>(tree_.label.size());
        tree_.label.push_back(VertexId::star(j));
        tree_.parent.push_back(parent);
        tree_.depth.push_back(tree_.depth[static_cast<std::size_t>(parent)] + 1);
        tree_.star_node.push_back(id);
    }

    CompactTree tree_;
    std::vector<int> internal_node_;
    std::vector<int> touched_;
    int last_ = -1;
    int steps_ = 0;
};

/// The multiset {V_i with multiplicity d_i}, in label order.
inline std::vector<VertexId> d_multiset(const DegreeSequence& d) {
    std::vector<VertexId> out;
    out.reserve(static_cast<std::size_t>(d.sum()));
    for (int i = 1; i <= d.size(); ++i) {
        out.insert(out.end(), static_cast<std::size_t>(d.degree(i)), VertexId::internal(static_cast<std::uint32_t>(i)));
    }
    return out;
}

inline void require_tree_kind(const DegreeSequence& d) {
    if (d.kind() != SequenceKind::tree) fail(ErrorCode::InvalidParameter, "expected a tree-kind degree sequence");
}

inline std::vector<VertexId> sample_d_tuple(const DegreeSequence& d, Rng& rng) {
    require_tree_kind(d);
    auto tuple = d_multiset(d);
    rng.shuffle(std::span<VertexId>(tuple));
    return tuple;
}

inline CompactTree stick_break_compact(const DegreeSequence& d, std::span<const VertexId> tuple) {
    require_tree_kind(d);
    std::vector<VertexId> sorted(tuple.begin(), tuple.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted != d_multiset(d)) fail(ErrorCode::TupleMismatch, "tuple multiplicities disagree with D");
    StickBreaker sb;
    for (VertexId a : tuple) sb.push(a);
    sb.finish();
    return sb.tree();
}

inline LabeledTree stick_break_tree(const DegreeSequence& d, std::span<const VertexId> tuple) {
    return stick_break_compact(d, tuple).to_labeled();
}

inline LabeledTree sample_d_tree(const DegreeSequence& d, Rng& rng) {
    const auto tuple = sample_d_tuple(d, rng);
    return stick_break_tree(d, tuple);
}

/// Number of labelled trees with the given vertex degrees: (n-2)! / prod (deg-1)!.
inline BigInt count_trees_with_degrees(const std::vector<std::pair<VertexId, int>>& degrees) {
    const auto n = static_cast<int>(degrees.size());
    if (n == 1) return degrees.front().second == 0 ? 1 : 0;
    long long code_len = 0;
    for (const auto& [v, deg] : degrees) {
        if (deg < 1) return 0;
        code_len += deg - 1;
    }
    if (code_len != n - 2) return 0;
    BigInt out = factorial(n - 2);
    for (const auto& [v, deg] : degrees) out /= factorial(deg - 1);
    return out;
}

inline BigInt count_d_trees(const DegreeSequence& d) {
    require_tree_kind(d);
    BigInt out = factorial(static_cast<int>(d.sum()));
    for (int x : d.degrees()) out /= factorial(x);
    return out;
}

/// Decodes a Pruefer code over the sorted vertex list `order`.
inline LabeledTree pruefer_decode(const std::vector<VertexId>& order, const std::vector<int>& code) {
    const std::size_t n = order.size();
    std::vector<int> remaining(n, 1);
    for (int c : code) ++remaining[static_cast<std::size_t>(c)];
    std::set<int> leaves;
    for (std::size_t v = 0; v < n; ++v) {
        if (remaining[v] == 1) leaves.insert(static_cast<int>(v));
    }
    LabeledTree t;
    for (VertexId v : order) t.add_vertex(v);
    for (int c : code) {
        const int leaf = *leaves.begin();
        leaves.erase(leaves.begin());
        t.add_edge(order[static_cast<std::size_t>(leaf)], order[static_cast<std::size_t>(c)]);
        if (--remaining[static_cast<std::size_t>(c)] == 1) leaves.insert(c);
    }
    if (n >= 2) {
        const int a = *leaves.begin();
        const int b = *std::next(leaves.begin());
        t.add_edge(order[static_cast<std::size_t>(a)], order[static_cast<std::size_t>(b)]);
    }
    return t;
}

inline constexpr std::uint64_t kDefaultEnumerationCap = 5'000'000;

/// Calls `visit` once per labelled tree on the given vertices with the given
/// degrees, via the Pruefer bijection (each vertex appears deg-1 times).
inline void enumerate_trees_with_degrees(std::vector<std::pair<VertexId, int>> degrees,
                                         const std::function<void(const LabeledTree&)>& visit,
                                         std::uint64_t cap = kDefaultEnumerationCap) {
    const BigInt count = count_trees_with_degrees(degrees);
    if (count > cap) fail(ErrorCode::TooLarge, "tree count exceeds enumeration cap");
    if (count == 0) return;
    std::sort(degrees.begin(), degrees.end());
    std::vector<VertexId> order;
    std::vector<int> code;
    for (std::size_t v = 0; v < degrees.size(); ++v) {
        order.push_back(degrees[v].first);
        code.insert(code.end(), static_cast<std::size_t>(degrees[v].second - 1), static_cast<int>(v));
    }
    do {
        visit(pruefer_decode(order, code));
    } while (std::next_permutation(code.begin(), code.end()));
}

/// V_i with degree d_i + 1 for d_i > 0, and stars S0..S_{N+1} as leaves.
inline std::vector<std::pair<VertexId, int>> d_tree_degrees(const DegreeSequence& d) {
    require_tree_kind(d);
    std::vector<std::pair<VertexId, int>> out;
    int stars = 0;
    for (int i = 1; i <= d.size(); ++i) {
        if (d.degree(i) > 0) {
            out.emplace_back(VertexId::internal(static_cast<std::uint32_t>(i)), d.degree(i) + 1);
        } else {
            out.emplace_back(VertexId::star(static_cast<std::uint32_t>(stars++)), 1);
        }
    }
    return out;
}

inline void enumerate_d_trees(const DegreeSequence& d, const std::function<void(const LabeledTree&)>& visit,
                              std::uint64_t cap = kDefaultEnumerationCap) {
    enumerate_trees_with_degrees(d_tree_degrees(d), visit, cap);
}

inline std::vector<LabeledTree> all_d_trees(const DegreeSequence& d, std::uint64_t cap = kDefaultEnumerationCap) {
    std::vector<LabeledTree> out;
    enumerate_d_trees(d, [&](const LabeledTree& t) { out.push_back(t); }, cap);
    return out;
}

/// Draws V_i with probability p_i, or V_{inf,step} from the remainder mass.
inline VertexId draw_p_vertex(const PVector& p, int step, Rng& rng) {
    double u = rng.uniform();
    const auto probs = p.p();
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (u < probs[i]) return VertexId::internal(static_cast<std::uint32_t>(i + 1));
        u -= probs[i];
    }
    if (p.p_inf() > 0) return VertexId::overflow(static_cast<std::uint32_t>(step));
    // Rounding left u past the last atom.
    return VertexId::internal(static_cast<std::uint32_t>(probs.size()));
}

struct PTreePrefix {
    LabeledTree tree;
    std::vector<VertexId> tuple;  // B_1 .. B_n
    CompactTree compact;
};

inline PTreePrefix sample_p_tree_prefix(const PVector& p, int n_steps, Rng& rng) {
    if (n_steps < 1) fail(ErrorCode::InvalidParameter, "n_steps must be at least 1");
    StickBreaker sb;
    PTreePrefix out;
    for (int i = 1; i <= n_steps; ++i) {
        const VertexId b = draw_p_vertex(p, i, rng);
        out.tuple.push_back(b);
        sb.push(b);
    }
    out.compact = sb.tree();
    out.tree = out.compact.to_labeled();
    return out;
}

} // namespace dkgraph
