#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "dkgraph/continuum.hpp"
#include "dkgraph/cycle_breaking.hpp"
#include "dkgraph/discrete_trees.hpp"
#include "dkgraph/graph_samplers.hpp"
#include "dkgraph/params.hpp"
#include "dkgraph/rng.hpp"
#include "dkgraph/statistics.hpp"

namespace dkgraph {

/// (D,k)-graph; k = 0 is the plain D-tree. Points are drawn i.i.d. uniformly
/// among the stars that were not glued.
struct DkGraphModel {
    DegreeSequence d;
    int k = 0;
};

/// (P,k)-graph prefix. Points are drawn from p among the vertices present
/// (overflow vertices share p_inf evenly).
struct PkGraphModel {
    PVector p;
    int k = 0;
    int n_steps = 64;
};

/// Weighted (Theta,k)-ICRG. Points are the cuts Y_{2k+1}, ..., Y_{2k+n}.
struct IcrgModel {
    ThetaVector theta;
    int k = 0;
};

using ModelSpec = std::variant<DkGraphModel, PkGraphModel, IcrgModel>;

enum class Scaling { none, lambda_d, sigma_p };

struct MatrixSample {
    Matrix<double> matrix;
    double weight = 1;

    /// Entries above the diagonal, row by row.
    Sample upper() const {
        Sample out;
        for (std::size_t i = 0; i < matrix.size(); ++i) {
            for (std::size_t j = i + 1; j < matrix.size(); ++j) out.push_back(matrix[i][j]);
        }
        return out;
    }
};

inline double scaling_factor(const ModelSpec& model, Scaling scaling) {
    if (scaling == Scaling::none) return 1;
    if (scaling == Scaling::lambda_d) {
        const auto* m = std::get_if<DkGraphModel>(&model);
        if (!m) fail(ErrorCode::InvalidParameter, "lambda scaling needs a degree-sequence model");
        return m->d.stats().lambda;
    }
    const auto* m = std::get_if<PkGraphModel>(&model);
    if (!m) fail(ErrorCode::InvalidParameter, "sigma scaling needs a P model");
    return m->p.sigma();
}

namespace detail {

inline std::vector<int> bfs(const std::vector<std::vector<int>>& adj, int source) {
    std::vector<int> dist(adj.size(), -1);
    std::deque<int> queue{source};
    dist[static_cast<std::size_t>(source)] = 0;
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        for (int w : adj[static_cast<std::size_t>(v)]) {
            if (dist[static_cast<std::size_t>(w)] < 0) {
                dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
                queue.push_back(w);
            }
        }
    }
    return dist;
}

/// Graph distances between the given nodes after gluing the sampler's pairs.
inline Matrix<double> dk_distances(const DkSampler& sampler, const CompactTree& t, const std::vector<int>& nodes) {
    const std::size_t n = nodes.size();
    Matrix<double> out(n, std::vector<double>(n, 0.0));
    if (sampler.k() == 0) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) out[i][j] = out[j][i] = t.distance(nodes[i], nodes[j]);
        }
        return out;
    }
    std::vector<char> glued(t.size(), 0);
    std::vector<std::pair<int, int>> extra;
    for (const auto& [a, b] : sampler.pairs()) {
        const int na = t.star_node[a.index];
        const int nb = t.star_node[b.index];
        glued[static_cast<std::size_t>(na)] = glued[static_cast<std::size_t>(nb)] = 1;
        auto father = [&](int node) { return node == 0 ? 1 : t.parent[static_cast<std::size_t>(node)]; };
        extra.emplace_back(father(na), father(nb));
    }
    std::vector<std::vector<int>> adj(t.size());
    for (std::size_t v = 1; v < t.size(); ++v) {
        const int p = t.parent[v];
        if (glued[v] || glued[static_cast<std::size_t>(p)]) continue;
        adj[v].push_back(p);
        adj[static_cast<std::size_t>(p)].push_back(static_cast<int>(v));
    }
    for (const auto& [a, b] : extra) {
        adj[static_cast<std::size_t>(a)].push_back(b);
        adj[static_cast<std::size_t>(b)].push_back(a);
    }
    std::map<int, std::vector<int>> cache;
    for (std::size_t i = 0; i < n; ++i) {
        auto it = cache.find(nodes[i]);
        if (it == cache.end()) it = cache.emplace(nodes[i], bfs(adj, nodes[i])).first;
        for (std::size_t j = 0; j < n; ++j) out[i][j] = it->second[static_cast<std::size_t>(nodes[j])];
    }
    return out;
}

inline Matrix<double> graph_distances(const Multigraph& g, const std::vector<VertexId>& points) {
    std::map<VertexId, int> index;
    for (VertexId v : g.vertices()) index.emplace(v, static_cast<int>(index.size()));
    std::vector<std::vector<int>> adj(index.size());
    for (const auto& [e, m] : g.multiplicities()) {
        if (e.first == e.second) continue;
        adj[static_cast<std::size_t>(index[e.first])].push_back(index[e.second]);
        adj[static_cast<std::size_t>(index[e.second])].push_back(index[e.first]);
    }
    const std::size_t n = points.size();
    Matrix<double> out(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        const auto dist = bfs(adj, index.at(points[i]));
        for (std::size_t j = 0; j < n; ++j) out[i][j] = dist[static_cast<std::size_t>(index.at(points[j]))];
    }
    return out;
}

inline VertexId draw_present_vertex(const Multigraph& g, const PVector& p, Rng& rng) {
    std::vector<VertexId> present;
    std::vector<double> weight;
    std::size_t overflow = 0;
    for (VertexId v : g.vertices()) {
        if (v.is_overflow()) ++overflow;
    }
    for (VertexId v : g.vertices()) {
        present.push_back(v);
        if (v.is_internal()) {
            weight.push_back(p.p()[v.index - 1]);
        } else {
            weight.push_back(p.p_inf() / static_cast<double>(overflow));
        }
    }
    double total = 0;
    for (double w : weight) total += w;
    double u = rng.uniform() * total;
    for (std::size_t i = 0; i < present.size(); ++i) {
        if (u < weight[i]) return present[i];
        u -= weight[i];
    }
    return present.back();
}

} // namespace detail

/// n_reps independent distance matrices of n_points sampled points, rescaled.
inline std::vector<MatrixSample> gp_matrix_sample(const ModelSpec& model, std::size_t n_points, std::size_t n_reps,
                                                  Scaling scaling, Rng& rng) {
    const double factor = scaling_factor(model, scaling);
    std::vector<MatrixSample> out;
    out.reserve(n_reps);
    auto scale = [&](Matrix<double>& m) {
        for (auto& row : m) {
            for (double& v : row) v *= factor;
        }
    };
    if (const auto* m = std::get_if<DkGraphModel>(&model)) {
        DkSampler sampler(m->d, m->k);
        for (std::size_t r = 0; r < n_reps; ++r) {
            const CompactTree& t = sampler.sample_tree(rng);
            const auto survivors = sampler.surviving_star_nodes();
            if (survivors.empty()) fail(ErrorCode::InsufficientLeaves, "no star left to sample points from");
            std::vector<int> nodes;
            for (std::size_t i = 0; i < n_points; ++i) nodes.push_back(survivors[rng.below(survivors.size())]);
            MatrixSample s{detail::dk_distances(sampler, t, nodes), 1.0};
            scale(s.matrix);
            out.push_back(std::move(s));
        }
    } else if (const auto* m = std::get_if<PkGraphModel>(&model)) {
        for (std::size_t r = 0; r < n_reps; ++r) {
            const Multigraph g = sample_pk_graph_prefix(m->p, m->k, m->n_steps, rng);
            std::vector<VertexId> points;
            for (std::size_t i = 0; i < n_points; ++i) points.push_back(detail::draw_present_vertex(g, m->p, rng));
            MatrixSample s{detail::graph_distances(g, points), 1.0};
            scale(s.matrix);
            out.push_back(std::move(s));
        }
    } else {
        const auto& ic = std::get<IcrgModel>(model);
        for (std::size_t r = 0; r < n_reps; ++r) {
            const auto w = sample_icrg_weighted(ic.theta, ic.k, n_points, rng);
            std::vector<int> nodes;
            for (std::size_t i = 0; i < n_points; ++i) nodes.push_back(w.sb.cut_node[2 * static_cast<std::size_t>(ic.k) + i + 1]);
            MatrixSample s{sampled_distance_matrix(w.space, nodes), w.weight};
            scale(s.matrix);
            out.push_back(std::move(s));
        }
    }
    return out;
}

struct Discrepancy {
    double energy = 0;
    double ks_max = 0;
    double ks_mean = 0;
    double perm_p = -1;  // -1 when no permutation test was run
    double perm_threshold95 = 0;
};

inline Discrepancy compare_samples(const std::vector<MatrixSample>& a, const std::vector<MatrixSample>& b,
                                   int n_perm, Rng& rng) {
    std::vector<Sample> xa, xb;
    std::vector<double> wa, wb;
    for (const auto& s : a) {
        xa.push_back(s.upper());
        wa.push_back(s.weight);
    }
    for (const auto& s : b) {
        xb.push_back(s.upper());
        wb.push_back(s.weight);
    }
    Discrepancy d;
    d.energy = energy_distance_weighted(xa, wa, xb, wb);
    const std::size_t entries = xa.empty() ? 0 : xa.front().size();
    for (std::size_t e = 0; e < entries; ++e) {
        std::vector<double> ea, eb;
        for (const auto& v : xa) ea.push_back(v[e]);
        for (const auto& v : xb) eb.push_back(v[e]);
        const double ks = ks_two_sample_weighted(ea, wa, eb, wb).statistic;
        d.ks_max = std::max(d.ks_max, ks);
        d.ks_mean += ks / static_cast<double>(entries);
    }
    if (n_perm > 0) {
        const auto perm = energy_permutation_test(xa, wa, xb, wb, n_perm, rng);
        d.perm_p = perm.p_value;
        d.perm_threshold95 = perm.threshold95;
    }
    return d;
}

struct FamilyMember {
    std::string label;
    ModelSpec model;
    Scaling scaling = Scaling::none;
};

struct ConvergeRow {
    std::string label;
    Discrepancy discrepancy;
};

struct ConvergeReport {
    std::vector<ConvergeRow> rows;
    bool strictly_decreasing = false;
    std::vector<std::uint64_t> streams;  // stream id per family member, then the target
};

struct ConvergeOptions {
    std::size_t n_points = 4;
    std::size_t n_reps = 1000;
    int n_perm = 0;
    bool perm_last_only = true;
};

/// Energy and per-entry KS discrepancy of each family member to the target.
/// Member i uses stream i + 1 of the seed, the target uses stream 0.
inline ConvergeReport converge_experiment(const std::vector<FamilyMember>& family, const FamilyMember& target,
                                          const ConvergeOptions& opt, std::uint64_t seed) {
    ConvergeReport report;
    Rng target_rng = Rng::stream(seed, 0);
    const auto target_samples = gp_matrix_sample(target.model, opt.n_points, opt.n_reps, target.scaling, target_rng);
    for (std::size_t i = 0; i < family.size(); ++i) {
        Rng rng = Rng::stream(seed, i + 1);
        const auto samples = gp_matrix_sample(family[i].model, opt.n_points, opt.n_reps, family[i].scaling, rng);
        const bool perm = opt.n_perm > 0 && (!opt.perm_last_only || i + 1 == family.size());
        report.rows.push_back({family[i].label, compare_samples(samples, target_samples, perm ? opt.n_perm : 0, rng)});
        report.streams.push_back(i + 1);
    }
    report.streams.push_back(0);
    report.strictly_decreasing = true;
    for (std::size_t i = 1; i < report.rows.size(); ++i) {
        if (!(report.rows[i].discrepancy.energy < report.rows[i - 1].discrepancy.energy)) report.strictly_decreasing = false;
    }
    return report;
}

struct BiasTailRow {
    double m = 0;
    MeanSe value;
};

/// E[h_m(bias / lambda^k)] over unbiased D-trees, h_m(x) = x 1{x >= m}.
inline std::vector<BiasTailRow> bias_tail_experiment(const DegreeSequence& d, int k, const std::vector<double>& m_grid,
                                                     std::size_t n_reps, Rng& rng) {
    require_tree_kind(d);
    if (d.zeros() < 2 * k) fail(ErrorCode::InsufficientLeaves, "need at least 2k star leaves");
    const int shift = (k > 0 && d.zeros() == 2 * k) ? 1 : 0;
    const double lambda_k = std::pow(d.stats().lambda, k);
    if (k > 0 && !(lambda_k > 0)) fail(ErrorCode::InvalidParameter, "lambda is zero");
    auto tuple = d_multiset(d);
    StickBreaker sb;
    BiasEvaluator ev;
    std::vector<double> x;
    x.reserve(n_reps);
    for (std::size_t r = 0; r < n_reps; ++r) {
        rng.shuffle(std::span<VertexId>(tuple));
        sb.reset();
        for (VertexId a : tuple) sb.push(a);
        sb.finish();
        const double b = ev.evaluate(sb.tree(), k, shift).value();
        x.push_back(k == 0 ? b : b / lambda_k);
    }
    std::vector<BiasTailRow> out;
    for (double m : m_grid) {
        std::vector<double> h(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) h[i] = x[i] >= m ? x[i] : 0.0;
        out.push_back({m, mean_se(h)});
    }
    return out;
}

/// D_n = (2 x n, 0 x (n+2)): binary trees with n internal vertices.
inline DegreeSequence binary_ladder(int n) {
    std::vector<long long> raw(static_cast<std::size_t>(n), 2);
    raw.insert(raw.end(), static_cast<std::size_t>(n + 2), 0);
    return DegreeSequence::validate(raw, SequenceKind::tree);
}

} // namespace dkgraph
