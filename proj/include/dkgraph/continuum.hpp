#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dkgraph/error.hpp"
#include "dkgraph/metric_tree.hpp"
#include "dkgraph/params.hpp"
#include "dkgraph/rng.hpp"

namespace dkgraph {

/// Stick-breaking tree with its position-to-node lookup.
struct SbTree {
    MetricTree tree;
    std::vector<double> cuts;  // y_1 < y_2 < ...
    std::vector<int> cut_node;  // cut_node[0] is position 0, cut_node[i] is y_i
    std::map<double, int> position_node;  // every materialized position

    int node_at(double x) const {
        auto it = position_node.find(x);
        if (it == position_node.end()) fail(ErrorCode::UnknownMark, "position not materialized");
        return it->second;
    }
};

/// Glues segment (y_i, y_{i+1}] at position z_i, with y_0 = z_0 = 0. `z` holds
/// z_1.. (an entry past the last segment is ignored). Positions in `extra`
/// get their own nodes so they can be queried later. Cut y_i becomes mark
/// "Y<i>".
inline SbTree sb_build(std::span<const double> y, std::span<const double> z, std::span<const double> extra = {}) {
    const std::size_t n = y.size();
    double prev = 0;
    for (double v : y) {
        if (!(v > prev)) fail(ErrorCode::CutsNotIncreasing, "cuts must be positive and strictly increasing");
        prev = v;
    }
    if (n > 0 && z.size() + 1 < n) fail(ErrorCode::AnchorOutOfRange, "one anchor per segment after the first");
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!(z[i] >= 0) || z[i] > y[i]) fail(ErrorCode::AnchorOutOfRange, "need 0 <= z_i <= y_i");
    }
    const double y_max = n ? y[n - 1] : 0.0;
    std::vector<std::vector<double>> inner(n);
    auto place = [&](double x) {
        if (x <= 0) return;
        if (x > y_max) fail(ErrorCode::AnchorOutOfRange, "position beyond the last cut");
        const auto seg = static_cast<std::size_t>(std::lower_bound(y.begin(), y.end(), x) - y.begin());
        if (x < y[seg]) inner[seg].push_back(x);
    };
    for (std::size_t i = 0; i + 1 < n; ++i) place(z[i]);
    for (double x : extra) {
        if (x < 0) fail(ErrorCode::AnchorOutOfRange, "negative position");
        place(x);
    }
    SbTree out;
    out.cuts.assign(y.begin(), y.end());
    out.cut_node.push_back(0);
    out.position_node[0.0] = 0;
    for (std::size_t j = 0; j < n; ++j) {
        auto& pts = inner[j];
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        const double anchor = j == 0 ? 0.0 : z[j - 1];
        int node = out.position_node.at(anchor);
        double pos = j == 0 ? 0.0 : y[j - 1];
        for (double p : pts) {
            node = out.tree.add_child(node, p - pos);
            out.position_node[p] = node;
            pos = p;
        }
        node = out.tree.add_child(node, y[j] - pos);
        out.position_node[y[j]] = node;
        out.cut_node.push_back(node);
        out.tree.add_mark(node, "Y" + std::to_string(j + 1));
    }
    return out;
}

/// Cut points (Y_i, Z_i) of the ICRT Poisson process, sorted by Y.
struct IcrtRealization {
    ThetaVector theta;
    std::vector<double> X;  // branch time of atom i (index i-1)
    std::vector<double> y;
    std::vector<double> z;
    std::vector<int> source;  // 0 for the continuous part, i for atom i
    bool mu_infinite = true;
};

/// Lazily merged Poisson streams: the continuous part has cumulative
/// intensity theta_0^2 y^2 / 2 with z uniform on [0, y]; atom i fires at rate
/// theta_i on [X_i, inf) with z = X_i.
class IcrtProcess {
public:
    IcrtProcess(const ThetaVector& theta, Rng& rng) : rng_(&rng) {
        real_.theta = theta;
        real_.mu_infinite = theta.mu_infinite();
        for (double t : theta.theta()) real_.X.push_back(t > 0 ? rng.exponential(t) : std::numeric_limits<double>::infinity());
        if (theta.theta0() > 0) {
            lambda_ = rng.exponential(1.0);
            queue_.push({continuous_y(), 0});
        }
        for (std::size_t i = 0; i < real_.X.size(); ++i) {
            const double t = theta.theta()[i];
            if (t > 0) queue_.push({real_.X[i] + rng.exponential(t), static_cast<int>(i + 1)});
        }
    }

    bool exhausted() const { return queue_.empty(); }

    void next() {
        if (queue_.empty()) fail(ErrorCode::InvalidParameter, "no mass to generate cut points from");
        const Event e = queue_.top();
        queue_.pop();
        real_.y.push_back(e.y);
        real_.source.push_back(e.source);
        if (e.source == 0) {
            real_.z.push_back(rng_->uniform() * e.y);
            lambda_ += rng_->exponential(1.0);
            queue_.push({continuous_y(), 0});
        } else {
            const auto i = static_cast<std::size_t>(e.source - 1);
            real_.z.push_back(real_.X[i]);
            queue_.push({e.y + rng_->exponential(real_.theta.theta()[i]), e.source});
        }
    }

    void extend_to_count(std::size_t n) {
        while (real_.y.size() < n) next();
    }

    void extend_to_height(double y_max) {
        while (!queue_.empty() && queue_.top().y <= y_max) next();
    }

    const IcrtRealization& realization() const { return real_; }

private:
    struct Event {
        double y;
        int source;
        bool operator<(const Event& o) const { return y > o.y || (y == o.y && source > o.source); }
    };

    double continuous_y() const { return std::sqrt(2 * lambda_) / real_.theta.theta0(); }

    Rng* rng_;
    IcrtRealization real_;
    double lambda_ = 0;
    std::priority_queue<Event> queue_;
};

inline IcrtRealization sample_icrt(const ThetaVector& theta, std::size_t n_points, Rng& rng) {
    IcrtProcess proc(theta, rng);
    proc.extend_to_count(n_points);
    return proc.realization();
}

inline IcrtRealization sample_icrt_until(const ThetaVector& theta, double y_max, Rng& rng) {
    IcrtProcess proc(theta, rng);
    proc.extend_to_height(y_max);
    return proc.realization();
}

inline SbTree sb_build(const IcrtRealization& r, std::span<const double> extra = {}) {
    return sb_build(std::span<const double>(r.y), std::span<const double>(r.z), extra);
}

inline nlohmann::json to_json(const IcrtRealization& r) {
    nlohmann::json atoms = nlohmann::json::array();
    for (std::size_t i = 0; i < r.X.size(); ++i) atoms.push_back({{"i", i + 1}, {"X", r.X[i]}});
    return {{"cuts", r.y}, {"anchors", r.z}, {"atoms", atoms}, {"mu_infinite", r.mu_infinite}};
}

/// Pseudo-metric of a metric tree after identifying node pairs: shortest
/// path where each glued pair is joined by a zero-length link.
class GluedSpace {
public:
    GluedSpace(MetricTree base, std::vector<std::pair<int, int>> glued)
        : base_(std::move(base)), glued_(std::move(glued)) {
        for (const auto& [a, b] : glued_) {
            ends_.push_back(a);
            ends_.push_back(b);
        }
        const std::size_t m = ends_.size();
        hub_ = Matrix<double>(m, std::vector<double>(m, 0.0));
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) hub_[i][j] = base_.distance(ends_[i], ends_[j]);
        }
        for (std::size_t p = 0; p < glued_.size(); ++p) hub_[2 * p][2 * p + 1] = hub_[2 * p + 1][2 * p] = 0;
        for (std::size_t via = 0; via < m; ++via) {
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < m; ++j) hub_[i][j] = std::min(hub_[i][j], hub_[i][via] + hub_[via][j]);
            }
        }
    }

    double distance(int a, int b) const {
        double best = base_.distance(a, b);
        const std::size_t m = ends_.size();
        if (m == 0) return best;
        std::vector<double> da(m), db(m);
        for (std::size_t i = 0; i < m; ++i) {
            da[i] = base_.distance(a, ends_[i]);
            db[i] = base_.distance(b, ends_[i]);
        }
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) best = std::min(best, da[i] + hub_[i][j] + db[j]);
        }
        return best;
    }

    const MetricTree& base() const { return base_; }
    const std::vector<std::pair<int, int>>& glued() const { return glued_; }

private:
    MetricTree base_;
    std::vector<std::pair<int, int>> glued_;
    std::vector<int> ends_;
    Matrix<double> hub_;
};

/// Glues marks (0-based mark indices) pairwise.
inline GluedSpace metric_glue(const MetricTree& t, const std::vector<std::pair<std::size_t, std::size_t>>& mark_pairs) {
    std::vector<std::pair<int, int>> nodes;
    for (const auto& [a, b] : mark_pairs) {
        if (a >= t.mark_count() || b >= t.mark_count()) fail(ErrorCode::UnknownMark, "mark index out of range");
        if (a == b) fail(ErrorCode::InvalidParameter, "a mark cannot be glued to itself");
        nodes.emplace_back(t.mark_node(a), t.mark_node(b));
    }
    return GluedSpace(t, std::move(nodes));
}

/// Applies d'(a,b) = min(d(a,b), d(a,x1)+d(b,x2), d(a,x2)+d(b,x1)) pair by pair
/// on a finite distance matrix; pairs index into the matrix.
inline Matrix<double> iterated_glue(Matrix<double> d, const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    const std::size_t n = d.size();
    for (const auto& [x1, x2] : pairs) {
        Matrix<double> next = d;
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                next[a][b] = std::min({d[a][b], d[a][x1] + d[b][x2], d[a][x2] + d[b][x1]});
            }
        }
        d = std::move(next);
    }
    return d;
}

/// Length of the union of the geodesics between marks (2b-1, 2b), b = 1..c
/// (marks counted from 1).
inline double core_measure(const MetricTree& t, std::size_t c) {
    if (t.mark_count() < 2 * c) fail(ErrorCode::InsufficientMarks, "need 2c marks");
    std::vector<char> used(t.node_count(), 0);
    double total = 0;
    for (std::size_t b = 0; b < c; ++b) {
        for (int v : t.path_segments(t.mark_node(2 * b), t.mark_node(2 * b + 1))) {
            if (!used[static_cast<std::size_t>(v)]) {
                used[static_cast<std::size_t>(v)] = 1;
                total += t.length(v);
            }
        }
    }
    return total;
}

/// square_n for n = 1..c.
inline std::vector<double> core_measures(const MetricTree& t, std::size_t c) {
    std::vector<double> out;
    for (std::size_t n = 1; n <= c; ++n) out.push_back(core_measure(t, n));
    return out;
}

struct WeightedIcrg {
    IcrtRealization realization;
    SbTree sb;
    GluedSpace space;
    std::vector<double> squares;
    double weight = 1;
};

/// (Theta,k)-ICRG as an importance-weighted ICRT: cut points Y_1..Y_2k are
/// glued in pairs and the weight is 1 / prod_n square_n. At least
/// 2k + extra_points cuts are generated.
inline WeightedIcrg sample_icrg_weighted(const ThetaVector& theta, int k, std::size_t extra_points, Rng& rng) {
    if (k < 0) fail(ErrorCode::InvalidParameter, "negative surplus");
    auto real = sample_icrt(theta, 2 * static_cast<std::size_t>(k) + extra_points, rng);
    SbTree sb = sb_build(real);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (int i = 0; i < k; ++i) pairs.emplace_back(2 * i, 2 * i + 1);
    GluedSpace space = metric_glue(sb.tree, pairs);
    auto squares = core_measures(sb.tree, static_cast<std::size_t>(k));
    double weight = 1;
    for (double s : squares) {
        if (!(s > 0)) fail(ErrorCode::InvalidParameter, "zero core measure");
        weight /= s;
    }
    return {std::move(real), std::move(sb), std::move(space), std::move(squares), weight};
}

/// Rejection with envelope M: accept with probability min(weight, M) / M.
/// Draws are biased wherever the weight exceeds M; truncation_mass measures that.
inline WeightedIcrg sample_icrg_capped(const ThetaVector& theta, int k, std::size_t extra_points, double cap, Rng& rng,
                                       std::uint64_t* iterations = nullptr) {
    if (!(cap > 0)) fail(ErrorCode::InvalidParameter, "cap must be positive");
    for (;;) {
        auto s = sample_icrg_weighted(theta, k, extra_points, rng);
        if (iterations) ++*iterations;
        if (rng.uniform() * cap < std::min(s.weight, cap)) {
            s.weight = 1;
            return s;
        }
    }
}

/// E[h_M(w)] = E[w 1{w >= M}] over the given weights.
inline double truncation_mass(std::span<const double> weights, double m) {
    if (weights.empty()) return 0;
    double s = 0;
    for (double w : weights) {
        if (w >= m) s += w;
    }
    return s / static_cast<double>(weights.size());
}

/// Pairwise glued distances between the given nodes.
inline Matrix<double> sampled_distance_matrix(const GluedSpace& space, const std::vector<int>& nodes) {
    Matrix<double> out(nodes.size(), std::vector<double>(nodes.size(), 0.0));
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (std::size_t j = i + 1; j < nodes.size(); ++j) out[i][j] = out[j][i] = space.distance(nodes[i], nodes[j]);
    }
    return out;
}

} // namespace dkgraph
