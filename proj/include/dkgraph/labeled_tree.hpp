#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dkgraph/error.hpp"
#include "dkgraph/vertex.hpp"

namespace dkgraph {

template <class T>
using Matrix = std::vector<std::vector<T>>;

using Edge = std::pair<VertexId, VertexId>;

/// Finite tree on labelled vertices. Neighbour lists are kept sorted so that
/// two trees with the same edge set compare equal.
class LabeledTree {
public:
    LabeledTree() = default;

    void add_vertex(VertexId v) { adj_.try_emplace(v); }

    void add_edge(VertexId a, VertexId b) {
        insert_sorted(adj_[a], b);
        insert_sorted(adj_[b], a);
    }

    void remove_edge(VertexId a, VertexId b) {
        erase_one(adj_.at(a), b);
        erase_one(adj_.at(b), a);
    }

    void remove_vertex(VertexId v) {
        auto it = adj_.find(v);
        if (it == adj_.end()) return;
        for (VertexId w : it->second) erase_one(adj_.at(w), v);
        adj_.erase(it);
    }

    bool contains(VertexId v) const { return adj_.count(v) != 0; }

    const std::vector<VertexId>& neighbors(VertexId v) const {
        auto it = adj_.find(v);
        if (it == adj_.end()) fail(ErrorCode::UnknownVertex, v.str());
        return it->second;
    }

    int degree(VertexId v) const { return static_cast<int>(neighbors(v).size()); }

    std::size_t vertex_count() const { return adj_.size(); }

    std::size_t edge_count() const {
        std::size_t twice = 0;
        for (const auto& [v, nb] : adj_) twice += nb.size();
        return twice / 2;
    }

    std::vector<VertexId> vertices() const {
        std::vector<VertexId> out;
        out.reserve(adj_.size());
        for (const auto& [v, nb] : adj_) out.push_back(v);
        return out;
    }

    /// Edges as (smaller, larger) pairs in lexicographic order.
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        for (const auto& [v, nb] : adj_) {
            for (VertexId w : nb) {
                if (v < w) out.emplace_back(v, w);
            }
        }
        return out;
    }

    std::vector<VertexId> stars() const {
        std::vector<VertexId> out;
        for (const auto& [v, nb] : adj_) {
            if (v.is_star()) out.push_back(v);
        }
        return out;
    }

    /// The unique neighbour of a leaf.
    VertexId father(VertexId leaf) const {
        const auto& nb = neighbors(leaf);
        if (nb.size() != 1) fail(ErrorCode::NotALeaf, leaf.str());
        return nb.front();
    }

    std::map<VertexId, int> distances_from(VertexId source) const {
        std::map<VertexId, int> dist;
        if (!contains(source)) fail(ErrorCode::UnknownVertex, source.str());
        std::deque<VertexId> queue{source};
        dist[source] = 0;
        while (!queue.empty()) {
            const VertexId v = queue.front();
            queue.pop_front();
            const int dv = dist[v];
            for (VertexId w : adj_.at(v)) {
                if (dist.emplace(w, dv + 1).second) queue.push_back(w);
            }
        }
        return dist;
    }

    bool is_connected() const {
        if (adj_.empty()) return true;
        return distances_from(adj_.begin()->first).size() == adj_.size();
    }

    bool is_tree() const { return is_connected() && edge_count() + 1 == std::max<std::size_t>(vertex_count(), 1); }

    /// Canonical text form, usable as a map key.
    std::string key() const {
        std::string out;
        for (const auto& [a, b] : edges()) {
            out += a.str();
            out += '-';
            out += b.str();
            out += ' ';
        }
        if (out.empty() && !adj_.empty()) out = adj_.begin()->first.str();
        return out;
    }

    friend bool operator==(const LabeledTree&, const LabeledTree&) = default;
    friend bool operator<(const LabeledTree& a, const LabeledTree& b) { return a.adj_ < b.adj_; }

private:
    static void insert_sorted(std::vector<VertexId>& v, VertexId x) {
        v.insert(std::upper_bound(v.begin(), v.end(), x), x);
    }
    static void erase_one(std::vector<VertexId>& v, VertexId x) {
        auto it = std::find(v.begin(), v.end(), x);
        if (it != v.end()) v.erase(it);
    }

    std::map<VertexId, std::vector<VertexId>> adj_;
};

/// Edge-count distances between the given vertices (BFS from each distinct mark).
inline Matrix<int> tree_distance_matrix(const LabeledTree& tree, const std::vector<VertexId>& marks) {
    const std::size_t n = marks.size();
    Matrix<int> out(n, std::vector<int>(n, 0));
    for (VertexId m : marks) {
        if (!tree.contains(m)) fail(ErrorCode::UnknownVertex, m.str());
    }
    std::map<VertexId, std::map<VertexId, int>> cache;
    for (std::size_t i = 0; i < n; ++i) {
        auto it = cache.find(marks[i]);
        if (it == cache.end()) it = cache.emplace(marks[i], tree.distances_from(marks[i])).first;
        for (std::size_t j = 0; j < n; ++j) out[i][j] = it->second.at(marks[j]);
    }
    return out;
}

inline nlohmann::json to_json(const LabeledTree& tree) {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [a, b] : tree.edges()) edges.push_back({a.str(), b.str()});
    return {{"edges", edges}};
}

inline LabeledTree tree_from_json(const nlohmann::json& j) {
    LabeledTree tree;
    try {
        for (const auto& e : j.at("edges")) {
            tree.add_edge(VertexId::parse(e.at(0).get<std::string>()),
                          VertexId::parse(e.at(1).get<std::string>()));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ParseError, e.what());
    }
    return tree;
}

} // namespace dkgraph
