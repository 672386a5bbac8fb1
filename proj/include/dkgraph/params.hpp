#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "dkgraph/error.hpp"

namespace dkgraph {

enum class SequenceKind { tree, surplus, half_edge };

inline std::string to_string(SequenceKind kind) {
    switch (kind) {
    case SequenceKind::tree: return "tree";
    case SequenceKind::surplus: return "surplus";
    case SequenceKind::half_edge: return "half-edge";
    }
    return "?";
}

inline SequenceKind parse_sequence_kind(const std::string& text) {
    if (text == "tree") return SequenceKind::tree;
    if (text == "surplus") return SequenceKind::surplus;
    if (text == "half-edge" || text == "half_edge" || text == "cm") return SequenceKind::half_edge;
    fail(ErrorCode::ParseError, "unknown sequence kind '" + text + "'");
}

/// What validate() does with an unsorted input: reject it, sort it (which
/// relabels the vertices), or keep the given labelling as is.
enum class SortPolicy { require, sort, keep };

struct DegreeStats {
    double sigma = 0;   // sqrt(sum d_i (d_i - 1))
    double lambda = 0;  // sigma / s
    long long N = 0;    // number of zero entries minus two
    long long s1 = 0;   // entries equal to 1
    long long s_geq2 = 0;
};

/// A validated degree sequence d_1 >= ... >= d_s.
///
/// tree:       sum d_i = s - 2 (V_i has degree d_i + 1, zeros become stars)
/// surplus(k): sum d_i = s + 2k - 2 (connected multigraph with k extra edges)
/// half-edge:  sum d_i even (configuration model, d_i is the plain degree)
class DegreeSequence {
public:
    DegreeSequence() = default;

    static DegreeSequence validate(std::span<const long long> raw, SequenceKind kind,
                                   int surplus = 0, SortPolicy policy = SortPolicy::require) {
        if (raw.empty()) fail(ErrorCode::InvalidParameter, "empty degree sequence");
        if (surplus < 0) fail(ErrorCode::InvalidParameter, "negative surplus");
        std::vector<int> d;
        d.reserve(raw.size());
        for (long long v : raw) {
            if (v < 0) fail(ErrorCode::NegativeEntry, "degree " + std::to_string(v));
            d.push_back(static_cast<int>(v));
        }
        if (!std::is_sorted(d.begin(), d.end(), std::greater<>())) {
            if (policy == SortPolicy::require) fail(ErrorCode::NotSorted, "degrees must be non-increasing");
            if (policy == SortPolicy::sort) std::sort(d.begin(), d.end(), std::greater<>());
        }
        const long long sum = std::accumulate(d.begin(), d.end(), 0LL);
        const auto s = static_cast<long long>(d.size());
        switch (kind) {
        case SequenceKind::tree:
            if (sum != s - 2) {
                fail(ErrorCode::SumMismatch, "tree sequence needs sum = s-2 = " +
                                                 std::to_string(s - 2) + ", got " + std::to_string(sum));
            }
            surplus = 0;
            break;
        case SequenceKind::surplus:
            if (sum != s + 2LL * surplus - 2) {
                fail(ErrorCode::SumMismatch, "surplus-" + std::to_string(surplus) +
                                                 " sequence needs sum = s+2k-2 = " +
                                                 std::to_string(s + 2LL * surplus - 2) + ", got " +
                                                 std::to_string(sum));
            }
            break;
        case SequenceKind::half_edge:
            if (sum % 2 != 0) fail(ErrorCode::SumMismatch, "half-edge sequence needs an even sum");
            surplus = 0;
            break;
        }
        DegreeSequence out;
        out.degrees_ = std::move(d);
        out.kind_ = kind;
        out.surplus_ = surplus;
        return out;
    }

    static DegreeSequence validate(std::initializer_list<long long> raw, SequenceKind kind,
                                   int surplus = 0, SortPolicy policy = SortPolicy::require) {
        std::vector<long long> v(raw);
        return validate(v, kind, surplus, policy);
    }

    std::span<const int> degrees() const { return degrees_; }
    int size() const { return static_cast<int>(degrees_.size()); }
    /// 1-based, matching V_1 ... V_s.
    int degree(int i) const { return degrees_.at(static_cast<std::size_t>(i - 1)); }
    SequenceKind kind() const { return kind_; }
    int surplus() const { return surplus_; }

    long long sum() const { return std::accumulate(degrees_.begin(), degrees_.end(), 0LL); }
    int zeros() const { return static_cast<int>(std::count(degrees_.begin(), degrees_.end(), 0)); }
    /// Number of entries with d_i > 0 (the internal vertices V_1..V_m).
    int internal_count() const { return size() - zeros(); }
    /// N^D: the tree has N + 2 star leaves.
    int N() const { return zeros() - 2; }

    /// Surplus of a connected multigraph with these half-edge degrees.
    int half_edge_surplus() const { return static_cast<int>(sum() / 2 - size() + 1); }

    /// Surplus(k) sequence plus 2k zeros, as a tree sequence.
    DegreeSequence as_tree() const {
        if (kind_ == SequenceKind::tree) return *this;
        if (kind_ != SequenceKind::surplus) fail(ErrorCode::InvalidParameter, "half-edge sequence has no tree form");
        std::vector<long long> raw(degrees_.begin(), degrees_.end());
        raw.insert(raw.end(), static_cast<std::size_t>(2 * surplus_), 0);
        return validate(raw, SequenceKind::tree);
    }

    /// Half-edge degrees (d_i - 1) -> shifted surplus sequence; requires d_i >= 1.
    DegreeSequence shifted_from_half_edge() const {
        if (kind_ != SequenceKind::half_edge) fail(ErrorCode::InvalidParameter, "not a half-edge sequence");
        std::vector<long long> raw;
        for (int d : degrees_) {
            if (d < 1) fail(ErrorCode::InvalidParameter, "isolated vertex in half-edge sequence");
            raw.push_back(d - 1);
        }
        return validate(raw, SequenceKind::surplus, half_edge_surplus());
    }

    DegreeStats stats() const {
        DegreeStats st;
        long long sq = 0;
        for (int d : degrees_) {
            sq += static_cast<long long>(d) * (d - 1);
            if (d == 1) ++st.s1;
            if (d >= 2) ++st.s_geq2;
        }
        st.sigma = std::sqrt(static_cast<double>(sq));
        st.lambda = st.sigma / static_cast<double>(size());
        st.N = N();
        return st;
    }

    friend bool operator==(const DegreeSequence&, const DegreeSequence&) = default;

private:
    std::vector<int> degrees_;
    SequenceKind kind_ = SequenceKind::tree;
    int surplus_ = 0;
};

inline constexpr double kNormalizationTolerance = 1e-12;

/// Probability vector p_1 >= p_2 >= ... > 0 with remainder mass p_inf.
class PVector {
public:
    PVector() = default;

    static PVector make(std::vector<double> p, double p_inf) {
        if (p.empty() || !(p.front() > 0)) fail(ErrorCode::InvalidParameter, "p_1 must be positive");
        for (double v : p) {
            if (!(v > 0) || !std::isfinite(v)) fail(ErrorCode::InvalidParameter, "p_i must be positive");
        }
        if (!std::is_sorted(p.begin(), p.end(), std::greater<>())) {
            fail(ErrorCode::NotSorted, "p must be non-increasing");
        }
        if (p_inf < 0) fail(ErrorCode::NegativeEntry, "p_inf < 0");
        const double total = std::accumulate(p.begin(), p.end(), 0.0) + p_inf;
        if (std::abs(total - 1.0) > kNormalizationTolerance) {
            fail(ErrorCode::SumMismatch, "sum p_i + p_inf must be 1");
        }
        PVector out;
        out.p_ = std::move(p);
        out.p_inf_ = p_inf;
        return out;
    }

    /// Keeps the first `support` atoms and folds the rest into p_inf.
    static PVector truncated(std::vector<double> p, double p_inf, std::size_t support) {
        if (p.size() > support) {
            p_inf += std::accumulate(p.begin() + static_cast<std::ptrdiff_t>(support), p.end(), 0.0);
            p.resize(support);
        }
        return make(std::move(p), p_inf);
    }

    std::span<const double> p() const { return p_; }
    double p_inf() const { return p_inf_; }
    std::size_t support() const { return p_.size(); }
    double sigma() const {
        double s = 0;
        for (double v : p_) s += v * v;
        return std::sqrt(s);
    }

    friend bool operator==(const PVector&, const PVector&) = default;

private:
    std::vector<double> p_;
    double p_inf_ = 0;
};

/// theta_0^2 + sum theta_i^2 = 1, theta_1 >= theta_2 >= ... >= 0.
class ThetaVector {
public:
    ThetaVector() = default;

    static ThetaVector make(double theta0, std::vector<double> theta) {
        if (!(theta0 >= 0)) fail(ErrorCode::NegativeEntry, "theta_0 < 0");
        for (double v : theta) {
            if (!(v >= 0)) fail(ErrorCode::NegativeEntry, "theta_i < 0");
        }
        if (!std::is_sorted(theta.begin(), theta.end(), std::greater<>())) {
            fail(ErrorCode::NotSorted, "theta must be non-increasing");
        }
        double total = theta0 * theta0;
        for (double v : theta) total += v * v;
        if (std::abs(total - 1.0) > kNormalizationTolerance) {
            fail(ErrorCode::SumMismatch, "theta_0^2 + sum theta_i^2 must be 1");
        }
        ThetaVector out;
        out.theta0_ = theta0;
        out.theta_ = std::move(theta);
        return out;
    }

    /// Keeps the first `support` atoms; the dropped squared mass moves to theta_0.
    static ThetaVector truncated(double theta0, std::vector<double> theta, std::size_t support) {
        if (theta.size() > support) {
            double sq = theta0 * theta0;
            for (std::size_t i = support; i < theta.size(); ++i) sq += theta[i] * theta[i];
            theta.resize(support);
            theta0 = std::sqrt(sq);
        }
        return make(theta0, std::move(theta));
    }

    double theta0() const { return theta0_; }
    std::span<const double> theta() const { return theta_; }

    /// mu^Theta = infinity. With finite support this happens iff theta_0 > 0.
    bool mu_infinite() const { return theta0_ > 0; }

    friend bool operator==(const ThetaVector&, const ThetaVector&) = default;

private:
    double theta0_ = 1;
    std::vector<double> theta_;
};

struct RegimeGap {
    std::vector<double> gaps;  // |d_i/s - p_i| or |d_i/sigma - theta_i|
    double s = 0;
    double sigma = 0;
    double d1_over_s = 0;
    bool d1_over_s_small = true;  // required by the Theta regime
};

inline RegimeGap regime_gap(const DegreeSequence& d, const PVector& target) {
    RegimeGap out;
    out.s = d.size();
    out.sigma = d.stats().sigma;
    out.d1_over_s = d.degree(1) / out.s;
    const std::size_t n = std::max<std::size_t>(target.support(), static_cast<std::size_t>(d.internal_count()));
    for (std::size_t i = 0; i < n; ++i) {
        const double di = i < d.degrees().size() ? d.degrees()[i] : 0.0;
        const double pi = i < target.support() ? target.p()[i] : 0.0;
        out.gaps.push_back(std::abs(di / out.s - pi));
    }
    return out;
}

inline RegimeGap regime_gap(const DegreeSequence& d, const ThetaVector& target,
                            double small_threshold = 0.1) {
    RegimeGap out;
    out.s = d.size();
    out.sigma = d.stats().sigma;
    out.d1_over_s = d.degree(1) / out.s;
    out.d1_over_s_small = out.d1_over_s < small_threshold;
    const std::size_t n = std::max<std::size_t>(target.theta().size(), static_cast<std::size_t>(d.internal_count()));
    for (std::size_t i = 0; i < n; ++i) {
        const double di = i < d.degrees().size() ? d.degrees()[i] : 0.0;
        const double ti = i < target.theta().size() ? target.theta()[i] : 0.0;
        out.gaps.push_back(out.sigma > 0 ? std::abs(di / out.sigma - ti) : INFINITY);
    }
    return out;
}

// JSON parameter files.

inline nlohmann::json to_json(const DegreeSequence& d) {
    nlohmann::json j;
    j["kind"] = to_string(d.kind());
    if (d.kind() == SequenceKind::surplus) j["k"] = d.surplus();
    j["degrees"] = std::vector<int>(d.degrees().begin(), d.degrees().end());
    return j;
}

inline DegreeSequence degree_sequence_from_json(const nlohmann::json& j, SortPolicy policy = SortPolicy::require) {
    try {
        const auto kind = parse_sequence_kind(j.value("kind", std::string("tree")));
        const int k = j.value("k", 0);
        const auto raw = j.at("degrees").get<std::vector<long long>>();
        return DegreeSequence::validate(raw, kind, k, policy);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ParseError, e.what());
    }
}

inline nlohmann::json to_json(const PVector& p) {
    return {{"p", std::vector<double>(p.p().begin(), p.p().end())}, {"p_inf", p.p_inf()}};
}

inline PVector p_vector_from_json(const nlohmann::json& j) {
    try {
        return PVector::make(j.at("p").get<std::vector<double>>(), j.value("p_inf", 0.0));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ParseError, e.what());
    }
}

inline nlohmann::json to_json(const ThetaVector& t) {
    return {{"theta0", t.theta0()}, {"theta", std::vector<double>(t.theta().begin(), t.theta().end())}};
}

inline ThetaVector theta_vector_from_json(const nlohmann::json& j) {
    try {
        return ThetaVector::make(j.value("theta0", 0.0), j.value("theta", std::vector<double>{}));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ParseError, e.what());
    }
}

} // namespace dkgraph
