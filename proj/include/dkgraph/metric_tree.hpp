#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "dkgraph/error.hpp"
#include "dkgraph/labeled_tree.hpp"

namespace dkgraph {

/// Rooted tree with real edge lengths; node 0 is the root. Each non-root node
/// owns the segment to its parent. Marks are named nodes.
class MetricTree {
public:
    MetricTree() { add_node(-1, 0.0); }

    std::size_t node_count() const { return parent_.size(); }
    int parent(int v) const { return parent_[idx(v)]; }
    double length(int v) const { return length_[idx(v)]; }
    const std::vector<int>& children(int v) const { return children_[idx(v)]; }

    int add_child(int parent, double length) {
        if (!(length >= 0)) fail(ErrorCode::NegativeLength, "segment length " + std::to_string(length));
        check(parent);
        return add_node(parent, length);
    }

    /// Inserts a node on the segment above `child`, at `offset` from child.
    int split_edge(int child, double offset) {
        check(child);
        if (child == 0) fail(ErrorCode::InvalidParameter, "the root has no segment");
        const double len = length_[idx(child)];
        offset = std::clamp(offset, 0.0, len);
        const int p = parent_[idx(child)];
        const int w = add_node(p, len - offset);
        auto& siblings = children_[idx(p)];
        siblings.erase(std::find(siblings.begin(), siblings.end(), child));
        parent_[idx(child)] = w;
        length_[idx(child)] = offset;
        children_[idx(w)].push_back(child);
        dirty_ = true;
        return w;
    }

    /// Distance from the root.
    double depth(int v) const {
        refresh();
        return depth_[idx(v)];
    }

    int lca(int a, int b) const {
        refresh();
        check(a);
        check(b);
        while (level_[idx(a)] > level_[idx(b)]) a = parent_[idx(a)];
        while (level_[idx(b)] > level_[idx(a)]) b = parent_[idx(b)];
        while (a != b) {
            a = parent_[idx(a)];
            b = parent_[idx(b)];
        }
        return a;
    }

    double distance(int a, int b) const {
        const int l = lca(a, b);
        return depth_[idx(a)] + depth_[idx(b)] - 2 * depth_[idx(l)];
    }

    /// Nodes whose parent segment lies on the geodesic between a and b.
    std::vector<int> path_segments(int a, int b) const {
        const int l = lca(a, b);
        std::vector<int> out;
        for (int x = a; x != l; x = parent_[idx(x)]) out.push_back(x);
        for (int x = b; x != l; x = parent_[idx(x)]) out.push_back(x);
        return out;
    }

    /// Node at distance t from a along the geodesic a -> b; a node within tol
    /// is reused, otherwise the segment is split.
    int locate_on_path(int a, int b, double t, double tol) {
        const int l = lca(a, b);
        double cum = 0;
        for (int x = a; x != l; x = parent_[idx(x)]) {
            if (t <= cum + tol) return x;
            const double len = length_[idx(x)];
            if (t < cum + len - tol) return split_edge(x, t - cum);
            cum += len;
        }
        if (t <= cum + tol) return l;
        std::vector<int> down;
        for (int x = b; x != l; x = parent_[idx(x)]) down.push_back(x);
        std::reverse(down.begin(), down.end());
        for (int x : down) {
            const double len = length_[idx(x)];
            if (t < cum + len - tol) return split_edge(x, len - (t - cum));
            cum += len;
            if (t <= cum + tol) return x;
        }
        return b;
    }

    double total_length() const {
        double s = 0;
        for (double l : length_) s += l;
        return s;
    }

    void scale(double lambda) {
        for (double& l : length_) l *= lambda;
        dirty_ = true;
    }

    int add_mark(int node, std::string name = {}) {
        check(node);
        if (name.empty()) name = "M" + std::to_string(marks_.size() + 1);
        marks_.push_back(node);
        mark_names_.push_back(std::move(name));
        return static_cast<int>(marks_.size()) - 1;
    }

    std::size_t mark_count() const { return marks_.size(); }
    int mark_node(std::size_t i) const {
        if (i >= marks_.size()) fail(ErrorCode::UnknownMark, "mark " + std::to_string(i));
        return marks_[i];
    }
    const std::vector<int>& marks() const { return marks_; }
    const std::vector<std::string>& mark_names() const { return mark_names_; }

    Matrix<double> distance_matrix(const std::vector<int>& nodes) const {
        Matrix<double> out(nodes.size(), std::vector<double>(nodes.size(), 0.0));
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            for (std::size_t j = i + 1; j < nodes.size(); ++j) out[i][j] = out[j][i] = distance(nodes[i], nodes[j]);
        }
        return out;
    }

    Matrix<double> mark_distance_matrix() const { return distance_matrix(marks_); }

    int degree(int v) const {
        return static_cast<int>(children_[idx(v)].size()) + (v == 0 ? 0 : 1);
    }

private:
    static std::size_t idx(int v) { return static_cast<std::size_t>(v); }

    void check(int v) const {
        if (v < 0 || static_cast<std::size_t>(v) >= parent_.size()) fail(ErrorCode::IndexOutOfRange, "node " + std::to_string(v));
    }

    int add_node(int parent, double length) {
        const int id = static_cast<int>(parent_.size());
        parent_.push_back(parent);
        length_.push_back(length);
        children_.emplace_back();
        if (parent >= 0) children_[idx(parent)].push_back(id);
        if (!dirty_) {
            level_.push_back(parent >= 0 ? level_[idx(parent)] + 1 : 0);
            depth_.push_back(parent >= 0 ? depth_[idx(parent)] + length : 0.0);
        }
        return id;
    }

    void refresh() const {
        if (!dirty_) return;
        level_.assign(parent_.size(), 0);
        depth_.assign(parent_.size(), 0.0);
        std::vector<int> stack{0};
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int c : children_[idx(v)]) {
                level_[idx(c)] = level_[idx(v)] + 1;
                depth_[idx(c)] = depth_[idx(v)] + length_[idx(c)];
                stack.push_back(c);
            }
        }
        dirty_ = false;
    }

    std::vector<int> parent_;
    std::vector<double> length_;
    std::vector<std::vector<int>> children_;
    std::vector<int> marks_;
    std::vector<std::string> mark_names_;
    mutable std::vector<int> level_;
    mutable std::vector<double> depth_;
    mutable bool dirty_ = false;
};

} // namespace dkgraph
