#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "dkgraph/error.hpp"
#include "dkgraph/rng.hpp"

namespace dkgraph {

using Sample = std::vector<double>;

inline double euclidean(const Sample& a, const Sample& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline std::vector<double> normalized(std::span<const double> w) {
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    if (!(total > 0)) fail(ErrorCode::InvalidParameter, "weights must have positive total");
    std::vector<double> out(w.begin(), w.end());
    for (double& v : out) v /= total;
    return out;
}

/// Weighted energy distance (V-statistic form):
/// 2 E|X - Y| - E|X - X'| - E|Y - Y'|.
inline double energy_distance_weighted(const std::vector<Sample>& x, std::span<const double> wx,
                                       const std::vector<Sample>& y, std::span<const double> wy) {
    if (x.empty() || y.empty()) fail(ErrorCode::InvalidParameter, "empty sample");
    if (wx.size() != x.size() || wy.size() != y.size()) fail(ErrorCode::ShapeMismatch, "one weight per observation");
    const auto px = normalized(wx);
    const auto py = normalized(wy);
    double xy = 0, xx = 0, yy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = 0; j < y.size(); ++j) xy += px[i] * py[j] * euclidean(x[i], y[j]);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) xx += 2 * px[i] * px[j] * euclidean(x[i], x[j]);
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        for (std::size_t j = i + 1; j < y.size(); ++j) yy += 2 * py[i] * py[j] * euclidean(y[i], y[j]);
    }
    return 2 * xy - xx - yy;
}

inline double energy_distance(const std::vector<Sample>& x, const std::vector<Sample>& y) {
    const std::vector<double> wx(x.size(), 1.0), wy(y.size(), 1.0);
    return energy_distance_weighted(x, wx, y, wy);
}

/// P(K > lambda) for the Kolmogorov distribution.
inline double kolmogorov_survival(double lambda) {
    if (lambda <= 0) return 1;
    if (lambda < 0.2) return 1;
    double s = 0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        s += (j % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(s, 0.0, 1.0);
}

/// Asymptotic p-value with the usual small-sample correction.
inline double ks_pvalue(double d, double n_eff) {
    const double r = std::sqrt(n_eff);
    return kolmogorov_survival((r + 0.12 + 0.11 / r) * d);
}

struct KsResult {
    double statistic = 0;
    double p_value = 1;
};

inline KsResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf) {
    if (x.empty()) fail(ErrorCode::InvalidParameter, "empty sample");
    std::sort(x.begin(), x.end());
    const auto n = static_cast<double>(x.size());
    double d = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return {d, ks_pvalue(d, n)};
}

/// Two-sample KS with weights; the effective size uses Kish's formula.
inline KsResult ks_two_sample_weighted(std::span<const double> x, std::span<const double> wx,
                                       std::span<const double> y, std::span<const double> wy) {
    if (x.empty() || y.empty()) fail(ErrorCode::InvalidParameter, "empty sample");
    const auto px = normalized(wx);
    const auto py = normalized(wy);
    std::vector<std::pair<double, double>> events;  // value, signed mass
    for (std::size_t i = 0; i < x.size(); ++i) events.emplace_back(x[i], px[i]);
    for (std::size_t i = 0; i < y.size(); ++i) events.emplace_back(y[i], -py[i]);
    std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    double diff = 0, d = 0;
    for (std::size_t i = 0; i < events.size();) {
        std::size_t j = i;
        while (j < events.size() && events[j].first == events[i].first) diff += events[j++].second;
        d = std::max(d, std::abs(diff));
        i = j;
    }
    auto kish = [](const std::vector<double>& p) {
        double s = 0;
        for (double v : p) s += v * v;
        return 1.0 / s;
    };
    const double nx = kish(px), ny = kish(py);
    return {d, ks_pvalue(d, nx * ny / (nx + ny))};
}

inline KsResult ks_two_sample(std::span<const double> x, std::span<const double> y) {
    const std::vector<double> wx(x.size(), 1.0), wy(y.size(), 1.0);
    return ks_two_sample_weighted(x, wx, y, wy);
}

inline double chi_square_survival(double stat, double df) {
    if (df <= 0) return 1;
    boost::math::chi_squared dist(df);
    return boost::math::cdf(boost::math::complement(dist, std::max(stat, 0.0)));
}

struct ChiSquareResult {
    double statistic = 0;
    int df = 0;
    double p_value = 1;
};

/// Goodness of fit of counts against probabilities (cells with zero
/// probability must have zero count).
inline ChiSquareResult chi_square_gof(std::span<const double> observed, std::span<const double> probs) {
    if (observed.size() != probs.size()) fail(ErrorCode::ShapeMismatch, "cell counts differ");
    const double n = std::accumulate(observed.begin(), observed.end(), 0.0);
    ChiSquareResult r;
    int cells = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (probs[i] <= 0) {
            if (observed[i] > 0) r.statistic = INFINITY;
            continue;
        }
        const double e = n * probs[i];
        r.statistic += (observed[i] - e) * (observed[i] - e) / e;
        ++cells;
    }
    r.df = cells - 1;
    r.p_value = std::isinf(r.statistic) ? 0.0 : chi_square_survival(r.statistic, r.df);
    return r;
}

/// Total variation between an empirical count table and exact probabilities.
template <class Key>
double total_variation(const std::map<Key, double>& empirical, const std::map<Key, double>& exact) {
    double total = 0;
    for (const auto& [k, c] : empirical) total += c;
    double tv = 0;
    for (const auto& [k, p] : exact) {
        auto it = empirical.find(k);
        tv += std::abs((it == empirical.end() ? 0.0 : it->second / total) - p);
    }
    for (const auto& [k, c] : empirical) {
        if (!exact.count(k)) tv += c / total;
    }
    return tv / 2;
}

struct PermutationResult {
    double statistic = 0;
    double p_value = 1;
    double threshold95 = 0;  // 95% quantile of the permutation distribution
};

/// Permutation test for the (weighted) energy distance. Pooled pairwise
/// distances are computed once; each permutation relabels the pool and
/// renormalizes weights within each group.
inline PermutationResult energy_permutation_test(const std::vector<Sample>& x, std::span<const double> wx,
                                                 const std::vector<Sample>& y, std::span<const double> wy,
                                                 int n_perm, Rng& rng) {
    std::vector<const Sample*> pool;
    std::vector<double> w;
    for (std::size_t i = 0; i < x.size(); ++i) {
        pool.push_back(&x[i]);
        w.push_back(wx[i]);
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        pool.push_back(&y[i]);
        w.push_back(wy[i]);
    }
    const std::size_t n = pool.size();
    std::vector<float> dist(n * n, 0.0f);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            dist[i * n + j] = dist[j * n + i] = static_cast<float>(euclidean(*pool[i], *pool[j]));
        }
    }
    const std::size_t nx = x.size();
    auto stat = [&](const std::vector<std::size_t>& order) {
        double sx = 0, sy = 0;
        for (std::size_t i = 0; i < n; ++i) (i < nx ? sx : sy) += w[order[i]];
        double xy = 0, xx = 0, yy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t a = order[i];
            const double wa = w[a] / (i < nx ? sx : sy);
            const float* row = &dist[a * n];
            for (std::size_t j = i + 1; j < n; ++j) {
                const std::size_t b = order[j];
                const double wb = w[b] / (j < nx ? sx : sy);
                const double term = wa * wb * row[b];
                if (i < nx && j < nx) {
                    xx += 2 * term;
                } else if (i >= nx && j >= nx) {
                    yy += 2 * term;
                } else {
                    xy += term;
                }
            }
        }
        return 2 * xy - xx - yy;
    };
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    PermutationResult r;
    r.statistic = stat(order);
    std::vector<double> null;
    int exceed = 0;
    for (int b = 0; b < n_perm; ++b) {
        rng.shuffle(std::span<std::size_t>(order));
        const double s = stat(order);
        null.push_back(s);
        if (s >= r.statistic) ++exceed;
    }
    r.p_value = (1.0 + exceed) / (1.0 + n_perm);
    if (!null.empty()) {
        std::sort(null.begin(), null.end());
        r.threshold95 = null[static_cast<std::size_t>(std::floor(0.95 * static_cast<double>(null.size() - 1)))];
    }
    return r;
}

struct MeanSe {
    double mean = 0;
    double se = 0;
};

inline MeanSe mean_se(std::span<const double> v) {
    MeanSe r;
    if (v.empty()) return r;
    const auto n = static_cast<double>(v.size());
    r.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.se = v.size() > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
    return r;
}

} // namespace dkgraph
