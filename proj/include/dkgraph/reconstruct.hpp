#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "dkgraph/error.hpp"
#include "dkgraph/metric_tree.hpp"

namespace dkgraph {

template <class Scalar>
void require_square(const Matrix<Scalar>& m) {
    for (const auto& row : m) {
        if (row.size() != m.size()) fail(ErrorCode::ShapeMismatch, "matrix is not square");
    }
}

/// (M_ab + M_ac - M_bc) / 2: distance from a to the median of a, b, c. Indices are 0-based.
template <class Scalar>
Scalar gromov_height(const Matrix<Scalar>& m, std::size_t a, std::size_t b, std::size_t c) {
    const std::size_t n = m.size();
    if (a >= n || b >= n || c >= n) fail(ErrorCode::IndexOutOfRange, "index outside the matrix");
    return (m[a][b] + m[a][c] - m[b][c]) / 2;
}

struct FourPointResult {
    bool ok = true;
    std::array<std::size_t, 4> witness{};

    std::string describe() const {
        return "(" + std::to_string(witness[0] + 1) + "," + std::to_string(witness[1] + 1) + "," +
               std::to_string(witness[2] + 1) + "," + std::to_string(witness[3] + 1) + ")";
    }
};

/// Tree-metric test: for every quadruple the two largest of
/// M_ij + M_kl, M_ik + M_jl, M_il + M_jk agree within tol.
template <class Scalar>
FourPointResult check_four_point(const Matrix<Scalar>& m, Scalar tol = Scalar(0)) {
    require_square(m);
    const std::size_t n = m.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            for (std::size_t k = j + 1; k < n; ++k) {
                for (std::size_t l = k + 1; l < n; ++l) {
                    std::array<Scalar, 3> s{m[i][j] + m[k][l], m[i][k] + m[j][l], m[i][l] + m[j][k]};
                    std::sort(s.begin(), s.end());
                    const Scalar gap = s[2] - s[1];
                    if (gap > tol) return {false, {i, j, k, l}};
                }
            }
        }
    }
    return {};
}

inline constexpr double kReconstructTolerance = 1e-9;

/// Incremental reconstruction: each new leaf n hangs off the geodesic between
/// the lexicographically first pair (b, c) minimizing M_nb + M_nc - M_bc.
/// Leaf i becomes mark i (named "L<i+1>").
inline MetricTree reconstruct(const Matrix<double>& m, double tol = kReconstructTolerance) {
    require_square(m);
    const std::size_t n = m.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(m[i][i]) > tol) fail(ErrorCode::InvalidParameter, "non-zero diagonal");
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(m[i][j] - m[j][i]) > tol) fail(ErrorCode::InvalidParameter, "matrix is not symmetric");
            if (i != j && !(m[i][j] > 0)) fail(ErrorCode::InvalidParameter, "off-diagonal entries must be positive");
        }
    }
    const auto fp = check_four_point(m, tol);
    if (!fp.ok) fail(ErrorCode::FourPointViolation, "quadruple " + fp.describe());
    MetricTree t;
    if (n == 0) return t;
    std::vector<int> leaf{0};
    t.add_mark(0, "L1");
    if (n >= 2) {
        leaf.push_back(t.add_child(0, m[0][1]));
        t.add_mark(leaf[1], "L2");
    }
    for (std::size_t x = 2; x < n; ++x) {
        std::size_t best_b = 0, best_c = 1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < x; ++b) {
            for (std::size_t c = b + 1; c < x; ++c) {
                const double v = m[x][b] + m[x][c] - m[b][c];
                if (v < best) {
                    best = v;
                    best_b = b;
                    best_c = c;
                }
            }
        }
        const double pendant = best / 2;
        const double along = gromov_height(m, best_b, x, best_c);
        if (pendant < -tol || along < -tol || along > m[best_b][best_c] + tol) {
            fail(ErrorCode::NegativeLength, "leaf " + std::to_string(x + 1));
        }
        const int w = t.locate_on_path(leaf[best_b], leaf[best_c], std::max(along, 0.0), tol);
        const int node = pendant <= tol ? w : t.add_child(w, pendant);
        leaf.push_back(node);
        t.add_mark(node, "L" + std::to_string(x + 1));
    }
    return t;
}

/// Core measure of pairs (0,1), (2,3), ..., (2c-2, 2c-1) from distances only:
/// each new geodesic adds its length minus the union of its overlaps with the
/// earlier ones, and each overlap is the interval between the heights of the
/// earlier pair's endpoints along the new geodesic.
template <class Scalar>
Scalar core_measure_from_matrix(const Matrix<Scalar>& m, std::size_t c, Scalar tol = Scalar(0)) {
    require_square(m);
    if (m.size() < 2 * c) fail(ErrorCode::InsufficientMarks, "need a 2c x 2c matrix");
    if (c == 0) return Scalar(0);
    const auto fp = check_four_point(m, tol);
    if (!fp.ok) fail(ErrorCode::FourPointViolation, "quadruple " + fp.describe());
    Scalar total = m[0][1];
    for (std::size_t p = 1; p < c; ++p) {
        const std::size_t a = 2 * p;
        const std::size_t z = 2 * p + 1;
        const Scalar len = m[a][z];
        std::vector<std::pair<Scalar, Scalar>> intervals;
        for (std::size_t b = 0; b < p; ++b) {
            const Scalar h1 = gromov_height(m, a, z, 2 * b);
            const Scalar h2 = gromov_height(m, a, z, 2 * b + 1);
            Scalar lo = std::min(h1, h2);
            Scalar hi = std::max(h1, h2);
            lo = std::max(lo, Scalar(0));
            hi = std::min(hi, len);
            if (hi > lo) intervals.emplace_back(lo, hi);
        }
        std::sort(intervals.begin(), intervals.end());
        Scalar covered = Scalar(0);
        bool open = false;
        Scalar cur_lo = Scalar(0), cur_hi = Scalar(0);
        for (const auto& [lo, hi] : intervals) {
            if (open && lo <= cur_hi) {
                cur_hi = std::max(cur_hi, hi);
            } else {
                if (open) covered += cur_hi - cur_lo;
                cur_lo = lo;
                cur_hi = hi;
                open = true;
            }
        }
        if (open) covered += cur_hi - cur_lo;
        total += len - covered;
    }
    return total;
}

} // namespace dkgraph
