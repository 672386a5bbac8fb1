#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "dkgraph/cycle_breaking.hpp"
#include "dkgraph/discrete_trees.hpp"
#include "dkgraph/error.hpp"
#include "dkgraph/multigraph.hpp"
#include "dkgraph/params.hpp"
#include "dkgraph/rng.hpp"

namespace dkgraph {

struct RejectionStats {
    std::uint64_t iterations = 0;
    std::uint64_t accepted = 0;
    double max_bias = 0;
};

/// Uniform connected multigraph with degrees d_i + 1 and surplus k, by
/// rejection on D-trees with acceptance bias / ((k+1)! 2^k).
///
/// Accepts a surplus(k) sequence (2k zeros are appended) or a tree sequence
/// with at least 2k stars. When the tree has exactly 2k stars the glued
/// pairs are (S0,S1), ..., (S_{2k-2},S_{2k-1}); stars are exchangeable so
/// this is the same law.
class DkSampler {
public:
    using Observer = std::function<void(const CompactTree&, const BiasValue&)>;

    DkSampler(const DegreeSequence& d, int k) : k_(k), bound_(bias_bound(k)) {
        if (k < 0) fail(ErrorCode::InvalidParameter, "negative surplus");
        if (d.kind() == SequenceKind::surplus) {
            if (d.surplus() != k) fail(ErrorCode::SurplusMismatch, "sequence surplus differs from k");
            tree_seq_ = d.as_tree();
        } else if (d.kind() == SequenceKind::tree) {
            tree_seq_ = d;
        } else {
            fail(ErrorCode::InvalidParameter, "half-edge sequences must be shifted first");
        }
        const int stars = tree_seq_.zeros();
        if (stars < 2 * k) fail(ErrorCode::InsufficientLeaves, "need at least 2k star leaves");
        shift_ = (k > 0 && stars == 2 * k) ? 1 : 0;
        tuple_ = d_multiset(tree_seq_);
    }

    void set_observer(Observer obs) { observer_ = std::move(obs); }

    /// Runs the rejection loop; the accepted tree stays in tree().
    const CompactTree& sample_tree(Rng& rng) {
        for (;;) {
            rng.shuffle(std::span<VertexId>(tuple_));
            breaker_.reset();
            for (VertexId a : tuple_) breaker_.push(a);
            breaker_.finish();
            ++stats_.iterations;
            last_bias_ = evaluator_.evaluate(breaker_.tree(), k_, shift_);
            if (observer_) observer_(breaker_.tree(), last_bias_);
            if (last_bias_.circ > bound_ * last_bias_.square_product) {
                fail(ErrorCode::InvalidParameter, "bias exceeds (k+1)!2^k");
            }
            stats_.max_bias = std::max(stats_.max_bias, last_bias_.value());
            const double accept = static_cast<double>(last_bias_.circ) /
                                  (static_cast<double>(bound_) * static_cast<double>(last_bias_.square_product));
            if (rng.uniform() < accept) {
                ++stats_.accepted;
                return breaker_.tree();
            }
        }
    }

    Multigraph sample(Rng& rng) {
        const CompactTree& t = sample_tree(rng);
        return glue_leaves(t.to_labeled(), pairs());
    }

    std::vector<std::pair<VertexId, VertexId>> pairs() const {
        std::vector<std::pair<VertexId, VertexId>> out;
        for (int i = 1; i <= k_; ++i) {
            out.emplace_back(VertexId::star(static_cast<std::uint32_t>(2 * i - 1 - shift_)),
                             VertexId::star(static_cast<std::uint32_t>(2 * i - shift_)));
        }
        return out;
    }

    /// Star nodes (in star order) that survive the gluing.
    std::vector<int> surviving_star_nodes() const {
        std::vector<int> out;
        const auto& t = breaker_.tree();
        for (int j = 0; j < t.star_count(); ++j) {
            const bool glued = k_ > 0 && j >= 1 - shift_ && j <= 2 * k_ - shift_;
            if (!glued) out.push_back(t.star_node[static_cast<std::size_t>(j)]);
        }
        return out;
    }

    int shift() const { return shift_; }
    int k() const { return k_; }
    const DegreeSequence& tree_sequence() const { return tree_seq_; }
    const RejectionStats& stats() const { return stats_; }
    const BiasValue& last_bias() const { return last_bias_; }

private:
    int k_;
    std::uint64_t bound_;
    int shift_ = 0;
    DegreeSequence tree_seq_;
    std::vector<VertexId> tuple_;
    StickBreaker breaker_;
    BiasEvaluator evaluator_;
    BiasValue last_bias_;
    RejectionStats stats_;
    Observer observer_;
};

inline Multigraph sample_dk_graph(const DegreeSequence& d, int k, Rng& rng) {
    DkSampler sampler(d, k);
    return sampler.sample(rng);
}

/// Renames the remaining stars, in index order, to V_first, V_first+1, ...
inline Multigraph stars_to_vertices(const Multigraph& g, std::uint32_t first) {
    std::map<VertexId, VertexId> rename;
    for (VertexId v : g.vertices()) {
        if (v.is_star()) rename.emplace(v, VertexId::internal(first++));
    }
    auto map = [&](VertexId v) {
        auto it = rename.find(v);
        return it == rename.end() ? v : it->second;
    };
    Multigraph out;
    for (VertexId v : g.vertices()) out.add_vertex(map(v));
    for (const auto& [e, m] : g.multiplicities()) out.add_edge(map(e.first), map(e.second), m);
    return out;
}

/// Connected configuration-model law through the (D,k) sampler: degrees are
/// shifted by one and the degree-1 vertices come back from the surviving stars.
class HalfEdgeDkSampler {
public:
    explicit HalfEdgeDkSampler(const DegreeSequence& half_edge)
        : shifted_(half_edge.shifted_from_half_edge()),
          sampler_(shifted_, shifted_.surplus()) {}

    Multigraph sample(Rng& rng) {
        return stars_to_vertices(sampler_.sample(rng), static_cast<std::uint32_t>(shifted_.internal_count() + 1));
    }

    const DkSampler& sampler() const { return sampler_; }

private:
    DegreeSequence shifted_;
    DkSampler sampler_;
};

inline constexpr long long kMatchingSumCap = 14;

/// Number of half-edge matchings producing each multigraph (vertices V_1..V_s).
inline std::map<Multigraph, BigInt> cm_matching_law(const DegreeSequence& d, long long sum_cap = kMatchingSumCap) {
    if (d.sum() % 2 != 0) fail(ErrorCode::OddSum, "odd half-edge total");
    if (d.sum() > sum_cap) fail(ErrorCode::TooLarge, "half-edge total above enumeration cap");
    const int s = d.size();
    std::vector<int> owner;
    for (int i = 0; i < s; ++i) owner.insert(owner.end(), static_cast<std::size_t>(d.degrees()[static_cast<std::size_t>(i)]), i);
    const std::size_t h = owner.size();
    std::vector<char> used(h, 0);
    std::vector<int> mult(static_cast<std::size_t>(s * s), 0);
    std::map<std::vector<int>, BigInt> counts;
    std::function<void()> rec = [&]() {
        std::size_t first = 0;
        while (first < h && used[first]) ++first;
        if (first == h) {
            counts[mult] += 1;
            return;
        }
        used[first] = 1;
        for (std::size_t j = first + 1; j < h; ++j) {
            if (used[j]) continue;
            used[j] = 1;
            const int a = std::min(owner[first], owner[j]);
            const int b = std::max(owner[first], owner[j]);
            ++mult[static_cast<std::size_t>(a * s + b)];
            rec();
            --mult[static_cast<std::size_t>(a * s + b)];
            used[j] = 0;
        }
        used[first] = 0;
    };
    rec();
    std::map<Multigraph, BigInt> out;
    for (const auto& [m, c] : counts) {
        Multigraph g;
        for (int i = 1; i <= s; ++i) g.add_vertex(VertexId::internal(static_cast<std::uint32_t>(i)));
        for (int a = 0; a < s; ++a) {
            for (int b = a; b < s; ++b) {
                g.add_edge(VertexId::internal(static_cast<std::uint32_t>(a + 1)),
                           VertexId::internal(static_cast<std::uint32_t>(b + 1)), m[static_cast<std::size_t>(a * s + b)]);
            }
        }
        out.emplace(std::move(g), c);
    }
    return out;
}

/// Configuration model biased by circ and conditioned on being connected with surplus k.
inline std::map<Multigraph, Rational> cm_conditioned_oracle(const DegreeSequence& d, int k,
                                                            long long sum_cap = kMatchingSumCap) {
    std::map<Multigraph, Rational> out;
    BigInt total = 0;
    for (const auto& [g, count] : cm_matching_law(d, sum_cap)) {
        if (!g.is_connected() || g.surplus() != k) continue;
        const BigInt w = count * circ(g);
        out.emplace(g, Rational(w));
        total += w;
    }
    if (total == 0) fail(ErrorCode::SurplusMismatch, "no connected multigraph with this surplus");
    for (auto& [g, w] : out) w /= total;
    return out;
}

inline Multigraph sample_configuration_model(const DegreeSequence& d, Rng& rng) {
    if (d.sum() % 2 != 0) fail(ErrorCode::OddSum, "odd half-edge total");
    std::vector<std::uint32_t> half;
    for (int i = 1; i <= d.size(); ++i) half.insert(half.end(), static_cast<std::size_t>(d.degree(i)), static_cast<std::uint32_t>(i));
    rng.shuffle(std::span<std::uint32_t>(half));
    Multigraph g;
    for (int i = 1; i <= d.size(); ++i) g.add_vertex(VertexId::internal(static_cast<std::uint32_t>(i)));
    for (std::size_t i = 0; i + 1 < half.size(); i += 2) {
        g.add_edge(VertexId::internal(half[i]), VertexId::internal(half[i + 1]));
    }
    return g;
}

struct MultiplicativeParams {
    double lambda = 0;
    std::vector<double> weights;
};

inline void validate(const MultiplicativeParams& w) {
    if (!(w.lambda >= 0)) fail(ErrorCode::InvalidParameter, "lambda must be non-negative");
    for (double p : w.weights) {
        if (!(p > 0)) fail(ErrorCode::InvalidParameter, "weights must be positive");
    }
}

inline Multigraph vertices_only(std::size_t s) {
    Multigraph g;
    for (std::size_t i = 1; i <= s; ++i) g.add_vertex(VertexId::internal(static_cast<std::uint32_t>(i)));
    return g;
}

/// Edge {i,j} present independently with probability 1 - exp(-lambda p_i p_j).
inline Multigraph sample_multiplicative_graph(const MultiplicativeParams& w, Rng& rng) {
    validate(w);
    const std::size_t s = w.weights.size();
    Multigraph g = vertices_only(s);
    for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = i + 1; j < s; ++j) {
            const double p = -std::expm1(-w.lambda * w.weights[i] * w.weights[j]);
            if (rng.uniform() < p) {
                g.add_edge(VertexId::internal(static_cast<std::uint32_t>(i + 1)), VertexId::internal(static_cast<std::uint32_t>(j + 1)));
            }
        }
    }
    return g;
}

/// Poisson(lambda p_i p_j) multiplicities, Poisson(lambda p_i^2 / 2) loops.
inline Multigraph sample_multiplicative_multigraph(const MultiplicativeParams& w, Rng& rng) {
    validate(w);
    const std::size_t s = w.weights.size();
    Multigraph g = vertices_only(s);
    for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = i; j < s; ++j) {
            const double mean = i == j ? w.lambda * w.weights[i] * w.weights[i] / 2 : w.lambda * w.weights[i] * w.weights[j];
            const auto n = static_cast<int>(rng.poisson(mean));
            g.add_edge(VertexId::internal(static_cast<std::uint32_t>(i + 1)), VertexId::internal(static_cast<std::uint32_t>(j + 1)), n);
        }
    }
    return g;
}

/// Both models from one uniform per pair: the simple graph has edge {i,j}
/// exactly when the multigraph has at least one copy.
inline std::pair<Multigraph, Multigraph> sample_multiplicative_coupled(const MultiplicativeParams& w, Rng& rng) {
    validate(w);
    const std::size_t s = w.weights.size();
    Multigraph simple = vertices_only(s);
    Multigraph multi = vertices_only(s);
    for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = i + 1; j < s; ++j) {
            const double mean = w.lambda * w.weights[i] * w.weights[j];
            const auto n = static_cast<int>(Rng::poisson_inversion(mean, rng.uniform()));
            const VertexId a = VertexId::internal(static_cast<std::uint32_t>(i + 1));
            const VertexId b = VertexId::internal(static_cast<std::uint32_t>(j + 1));
            multi.add_edge(a, b, n);
            if (n > 0) simple.add_edge(a, b);
        }
    }
    for (std::size_t i = 0; i < s; ++i) {
        const auto n = static_cast<int>(rng.poisson(w.lambda * w.weights[i] * w.weights[i] / 2));
        const VertexId a = VertexId::internal(static_cast<std::uint32_t>(i + 1));
        multi.add_edge(a, a, n);
    }
    return {simple, multi};
}

inline constexpr std::uint64_t kPkOracleCap = 2'000'000;

/// Connected multigraphs on V_1..V_s with surplus k, weighted by
/// prod_{i<=j} (p_i p_j)^{#_{i,j}} and normalized.
inline std::map<Multigraph, double> pk_law_oracle(const PVector& p, int k, std::uint64_t cap = kPkOracleCap) {
    if (p.p_inf() > 0) fail(ErrorCode::InvalidParameter, "oracle needs p_inf = 0");
    if (k < 0) fail(ErrorCode::InvalidParameter, "negative surplus");
    const auto s = static_cast<int>(p.support());
    const int edges = s + k - 1;
    std::vector<std::pair<int, int>> slots;
    for (int i = 0; i < s; ++i) {
        for (int j = i; j < s; ++j) slots.emplace_back(i, j);
    }
    // Compositions of `edges` into |slots| parts: C(edges + P - 1, P - 1).
    BigInt count = 1;
    const int P = static_cast<int>(slots.size());
    for (int i = 1; i < P; ++i) count = count * (edges + i) / i;
    if (count > cap) fail(ErrorCode::TooLarge, "too many candidate multigraphs");
    std::map<Multigraph, double> out;
    double total = 0;
    std::vector<int> m(slots.size(), 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t idx, int left) {
        if (idx + 1 == slots.size()) {
            m[idx] = left;
            Multigraph g = vertices_only(static_cast<std::size_t>(s));
            double w = 1;
            for (std::size_t t = 0; t < slots.size(); ++t) {
                const auto [a, b] = slots[t];
                g.add_edge(VertexId::internal(static_cast<std::uint32_t>(a + 1)), VertexId::internal(static_cast<std::uint32_t>(b + 1)), m[t]);
                w *= std::pow(p.p()[static_cast<std::size_t>(a)] * p.p()[static_cast<std::size_t>(b)], m[t]);
            }
            if (g.is_connected()) {
                out.emplace(std::move(g), w);
                total += w;
            }
            return;
        }
        for (int x = 0; x <= left; ++x) {
            m[idx] = x;
            rec(idx + 1, left - x);
        }
    };
    rec(0, edges);
    for (auto& [g, w] : out) w /= total;
    return out;
}

/// (P,k)-graph on the first n_steps draws. The P-tree grows until S1..S2k
/// exist, the bias (fixed from then on) drives the rejection, then the tree
/// is extended to n_steps, glued, and all stars are dropped.
inline Multigraph sample_pk_graph_prefix(const PVector& p, int k, int n_steps, Rng& rng,
                                         RejectionStats* stats = nullptr) {
    if (n_steps < 1) fail(ErrorCode::InvalidParameter, "n_steps must be at least 1");
    if (k > 0 && p.p_inf() >= 1) fail(ErrorCode::InvalidParameter, "no repeats occur when p_inf = 1");
    const std::uint64_t bound = bias_bound(k);
    StickBreaker sb;
    BiasEvaluator ev;
    for (;;) {
        sb.reset();
        int step = 0;
        while (sb.tree().star_count() < 2 * k + 1) sb.push(draw_p_vertex(p, ++step, rng));
        const BiasValue b = ev.evaluate(sb.tree(), k);
        if (stats) {
            ++stats->iterations;
            stats->max_bias = std::max(stats->max_bias, b.value());
        }
        if (b.circ > bound * b.square_product) fail(ErrorCode::InvalidParameter, "bias exceeds (k+1)!2^k");
        if (rng.uniform() * static_cast<double>(bound) * static_cast<double>(b.square_product) >= static_cast<double>(b.circ)) {
            continue;
        }
        if (stats) ++stats->accepted;
        while (step < n_steps) sb.push(draw_p_vertex(p, ++step, rng));
        Multigraph g = glue_leaves(sb.tree().to_labeled(), canonical_pairs(k));
        std::vector<VertexId> stars;
        for (VertexId v : g.vertices()) {
            if (v.is_star()) stars.push_back(v);
        }
        for (VertexId v : stars) g.remove_vertex(v);
        return g;
    }
}

} // namespace dkgraph
