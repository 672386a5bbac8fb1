#pragma once

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "json.hpp"

#include "dkgraph/error.hpp"
#include "dkgraph/labeled_tree.hpp"
#include "dkgraph/vertex.hpp"

namespace dkgraph {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Vertex set plus edge multiplicities #_{v,w}; keys are stored with v <= w,
/// and a loop is a key with v == w counted once per loop.
class Multigraph {
public:
    Multigraph() = default;

    static Multigraph from_tree(const LabeledTree& tree) {
        Multigraph g;
        for (VertexId v : tree.vertices()) g.add_vertex(v);
        for (const auto& [a, b] : tree.edges()) g.add_edge(a, b);
        return g;
    }

    void add_vertex(VertexId v) { vertices_.insert(v); }

    void add_edge(VertexId a, VertexId b, int count = 1) {
        if (count <= 0) return;
        vertices_.insert(a);
        vertices_.insert(b);
        mult_[ordered(a, b)] += count;
    }

    void remove_edge(VertexId a, VertexId b) {
        auto it = mult_.find(ordered(a, b));
        if (it == mult_.end()) fail(ErrorCode::UnknownVertex, "no edge " + a.str() + "-" + b.str());
        if (--it->second == 0) mult_.erase(it);
    }

    /// Drops v and every edge touching it.
    void remove_vertex(VertexId v) {
        vertices_.erase(v);
        std::erase_if(mult_, [&](const auto& kv) { return kv.first.first == v || kv.first.second == v; });
    }

    bool contains(VertexId v) const { return vertices_.count(v) != 0; }
    const std::set<VertexId>& vertices() const { return vertices_; }
    const std::map<Edge, int>& multiplicities() const { return mult_; }

    int multiplicity(VertexId a, VertexId b) const {
        auto it = mult_.find(ordered(a, b));
        return it == mult_.end() ? 0 : it->second;
    }

    long long edge_count() const {
        long long n = 0;
        for (const auto& [e, m] : mult_) n += m;
        return n;
    }

    /// Loops count twice.
    int degree(VertexId v) const {
        int d = 0;
        for (const auto& [e, m] : mult_) {
            if (e.first == v) d += m;
            if (e.second == v) d += m;
        }
        return d;
    }

    std::map<VertexId, std::vector<VertexId>> simple_adjacency() const {
        std::map<VertexId, std::vector<VertexId>> adj;
        for (VertexId v : vertices_) adj[v];
        for (const auto& [e, m] : mult_) {
            if (e.first == e.second) continue;
            adj[e.first].push_back(e.second);
            adj[e.second].push_back(e.first);
        }
        return adj;
    }

    bool is_connected() const {
        if (vertices_.empty()) return true;
        const auto adj = simple_adjacency();
        std::set<VertexId> seen{*vertices_.begin()};
        std::deque<VertexId> queue{*vertices_.begin()};
        while (!queue.empty()) {
            const VertexId v = queue.front();
            queue.pop_front();
            for (VertexId w : adj.at(v)) {
                if (seen.insert(w).second) queue.push_back(w);
            }
        }
        return seen.size() == vertices_.size();
    }

    /// |E| - |V| + 1.
    long long surplus() const {
        if (!is_connected()) fail(ErrorCode::Disconnected, "surplus of a disconnected multigraph");
        return edge_count() - static_cast<long long>(vertices_.size()) + 1;
    }

    std::string key() const {
        std::string out;
        for (VertexId v : vertices_) out += v.str() + ",";
        out += "|";
        for (const auto& [e, m] : mult_) {
            out += e.first.str() + "-" + e.second.str();
            if (m != 1) out += "x" + std::to_string(m);
            out += " ";
        }
        return out;
    }

    friend bool operator==(const Multigraph&, const Multigraph&) = default;
    friend bool operator<(const Multigraph& a, const Multigraph& b) {
        return std::tie(a.vertices_, a.mult_) < std::tie(b.vertices_, b.mult_);
    }

private:
    static Edge ordered(VertexId a, VertexId b) { return a < b ? Edge{a, b} : Edge{b, a}; }

    std::set<VertexId> vertices_;
    std::map<Edge, int> mult_;
};

/// Edge keys whose copies can be removed one at a time without disconnecting
/// G, together with their multiplicity. Loops and multi-edges always qualify;
/// a simple edge qualifies iff it is not a bridge.
inline std::vector<std::pair<Edge, int>> cyc_edges(const Multigraph& g) {
    if (!g.is_connected()) fail(ErrorCode::Disconnected, "cyc of a disconnected multigraph");
    std::map<VertexId, int> index;
    std::vector<VertexId> label;
    for (VertexId v : g.vertices()) {
        index.emplace(v, static_cast<int>(label.size()));
        label.push_back(v);
    }
    const int n = static_cast<int>(label.size());
    // Simple edges only, each stored once with an id so the DFS can skip the tree edge to its parent.
    std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(n));
    std::vector<Edge> simple;
    for (const auto& [e, m] : g.multiplicities()) {
        if (e.first == e.second || m >= 2) continue;
        const int id = static_cast<int>(simple.size());
        simple.push_back(e);
        adj[static_cast<std::size_t>(index[e.first])].emplace_back(index[e.second], id);
        adj[static_cast<std::size_t>(index[e.second])].emplace_back(index[e.first], id);
    }
    // Multi-edges also connect their endpoints for the bridge search.
    for (const auto& [e, m] : g.multiplicities()) {
        if (e.first == e.second || m < 2) continue;
        adj[static_cast<std::size_t>(index[e.first])].emplace_back(index[e.second], -1);
        adj[static_cast<std::size_t>(index[e.second])].emplace_back(index[e.first], -1);
    }
    std::vector<int> disc(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
    std::vector<char> bridge(simple.size(), 0);
    int timer = 0;
    // Iterative DFS: frame = (vertex, parent edge id, next adjacency slot).
    struct Frame { int v; int via; std::size_t next; };
    std::vector<Frame> stack;
    for (int root = 0; root < n; ++root) {
        if (disc[static_cast<std::size_t>(root)] >= 0) continue;
        disc[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = timer++;
        stack.push_back({root, -2, 0});
        while (!stack.empty()) {
            Frame& f = stack.back();
            const auto& nb = adj[static_cast<std::size_t>(f.v)];
            if (f.next < nb.size()) {
                const auto [w, id] = nb[f.next++];
                if (id >= 0 && id == f.via) continue;
                if (disc[static_cast<std::size_t>(w)] < 0) {
                    disc[static_cast<std::size_t>(w)] = low[static_cast<std::size_t>(w)] = timer++;
                    stack.push_back({w, id, 0});
                } else {
                    low[static_cast<std::size_t>(f.v)] = std::min(low[static_cast<std::size_t>(f.v)], disc[static_cast<std::size_t>(w)]);
                }
            } else {
                const Frame done = f;
                stack.pop_back();
                if (!stack.empty()) {
                    const int p = stack.back().v;
                    low[static_cast<std::size_t>(p)] = std::min(low[static_cast<std::size_t>(p)], low[static_cast<std::size_t>(done.v)]);
                    if (done.via >= 0 && low[static_cast<std::size_t>(done.v)] > disc[static_cast<std::size_t>(p)]) {
                        bridge[static_cast<std::size_t>(done.via)] = 1;
                    }
                }
            }
        }
    }
    std::set<Edge> bridges;
    for (std::size_t i = 0; i < simple.size(); ++i) {
        if (bridge[i]) bridges.insert(simple[i]);
    }
    std::vector<std::pair<Edge, int>> out;
    for (const auto& [e, m] : g.multiplicities()) {
        if (!bridges.count(e)) out.emplace_back(e, m);
    }
    return out;
}

/// Number of removable edges, counting multiplicity.
inline long long square(const Multigraph& g) {
    long long n = 0;
    for (const auto& [e, m] : cyc_edges(g)) n += m;
    return n;
}

inline BigInt factorial(int n) {
    BigInt f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

/// prod_v 2^{#_{v,v}} * prod_{v<=w} #_{v,w}!
inline BigInt circ(const Multigraph& g) {
    BigInt out = 1;
    for (const auto& [e, m] : g.multiplicities()) {
        out *= factorial(m);
        if (e.first == e.second) out <<= m;
    }
    return out;
}

/// Replaces the pendant edges of each leaf pair by one edge between their fathers.
inline Multigraph glue_leaves(Multigraph g, const std::vector<std::pair<VertexId, VertexId>>& pairs) {
    std::set<VertexId> seen;
    for (const auto& [a, b] : pairs) {
        if (!seen.insert(a).second) fail(ErrorCode::DuplicateLabel, a.str());
        if (!seen.insert(b).second) fail(ErrorCode::DuplicateLabel, b.str());
    }
    auto father = [&](VertexId leaf) {
        if (!g.contains(leaf)) fail(ErrorCode::NotALeaf, leaf.str() + " is not a vertex");
        VertexId f{};
        int found = 0;
        for (const auto& [e, m] : g.multiplicities()) {
            if (e.first == leaf || e.second == leaf) {
                if (e.first == e.second) fail(ErrorCode::NotALeaf, leaf.str() + " carries a loop");
                found += m;
                f = e.first == leaf ? e.second : e.first;
            }
        }
        if (found != 1) fail(ErrorCode::NotALeaf, leaf.str() + " has degree " + std::to_string(found));
        return f;
    };
    for (const auto& [a, b] : pairs) {
        const VertexId fa = father(a);
        const VertexId fb = father(b);
        if (fa == b) fail(ErrorCode::NotALeaf, a.str() + " and " + b.str() + " are adjacent");
        g.remove_vertex(a);
        g.remove_vertex(b);
        g.add_edge(fa, fb);
    }
    return g;
}

inline Multigraph glue_leaves(const LabeledTree& tree, const std::vector<std::pair<VertexId, VertexId>>& pairs) {
    return glue_leaves(Multigraph::from_tree(tree), pairs);
}

/// (S1,S2), ..., (S_{2k-1},S_{2k}).
inline std::vector<std::pair<VertexId, VertexId>> canonical_pairs(int k) {
    std::vector<std::pair<VertexId, VertexId>> out;
    for (int i = 1; i <= k; ++i) {
        out.emplace_back(VertexId::star(static_cast<std::uint32_t>(2 * i - 1)),
                         VertexId::star(static_cast<std::uint32_t>(2 * i)));
    }
    return out;
}

inline nlohmann::json to_json(const Multigraph& g) {
    nlohmann::json vertices = nlohmann::json::array();
    for (VertexId v : g.vertices()) vertices.push_back(v.str());
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [e, m] : g.multiplicities()) {
        edges.push_back({{"u", e.first.str()}, {"v", e.second.str()}, {"mult", m}});
    }
    return {{"vertices", vertices}, {"edges", edges}};
}

inline Multigraph multigraph_from_json(const nlohmann::json& j) {
    Multigraph g;
    try {
        for (const auto& v : j.at("vertices")) g.add_vertex(VertexId::parse(v.get<std::string>()));
        for (const auto& e : j.at("edges")) {
            g.add_edge(VertexId::parse(e.at("u").get<std::string>()),
                       VertexId::parse(e.at("v").get<std::string>()), e.value("mult", 1));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ParseError, e.what());
    }
    return g;
}

} // namespace dkgraph
