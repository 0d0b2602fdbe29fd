#pragma once

// Independent reference implementations used as test oracles. They favour
// obviousness over speed and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

/// Pixels equal to the maximum over the clipped k x k window, row-major.
inline std::vector<std::pair<int, int>> window_max_peaks(const std::vector<double>& v, int w, int h,
                                                         int k) {
    std::vector<std::pair<int, int>> out;
    const int r = k / 2;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double m = -std::numeric_limits<double>::infinity();
            for (int yy = std::max(0, y - r); yy <= std::min(h - 1, y + r); ++yy) {
                for (int xx = std::max(0, x - r); xx <= std::min(w - 1, x + r); ++xx) {
                    m = std::max(m, v[static_cast<std::size_t>(yy) * w + xx]);
                }
            }
            if (v[static_cast<std::size_t>(y) * w + x] == m) out.emplace_back(x, y);
        }
    }
    return out;
}

struct BestAssignment {
    double cost = 0.0;
    std::vector<std::pair<int, int>> pairs;
};

/// Exhaustive search over all injective maps of the smaller side. Among
/// costs within `tol` of the optimum the lexicographically smallest
/// (row, col) list wins.
inline BestAssignment exhaustive_assignment(const std::vector<double>& c, int rows, int cols,
                                            double tol = 1e-9) {
    const bool transpose = rows > cols;
    const int n = transpose ? cols : rows;
    const int m = transpose ? rows : cols;
    auto at = [&](int i, int j) {
        return transpose ? c[static_cast<std::size_t>(j) * cols + i] : c[static_cast<std::size_t>(i) * cols + j];
    };
    std::vector<BestAssignment> all;
    std::vector<int> pick(static_cast<std::size_t>(n), -1);
    std::vector<char> used(static_cast<std::size_t>(m), 0);
    auto rec = [&](auto&& self, int i) -> void {
        if (i == n) {
            BestAssignment a;
            for (int k = 0; k < n; ++k) {
                a.cost += at(k, pick[static_cast<std::size_t>(k)]);
                if (transpose) {
                    a.pairs.emplace_back(pick[static_cast<std::size_t>(k)], k);
                } else {
                    a.pairs.emplace_back(k, pick[static_cast<std::size_t>(k)]);
                }
            }
            std::sort(a.pairs.begin(), a.pairs.end());
            all.push_back(std::move(a));
            return;
        }
        for (int j = 0; j < m; ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            used[static_cast<std::size_t>(j)] = 1;
            pick[static_cast<std::size_t>(i)] = j;
            self(self, i + 1);
            used[static_cast<std::size_t>(j)] = 0;
        }
    };
    rec(rec, 0);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : all) best = std::min(best, a.cost);
    BestAssignment out;
    bool have = false;
    for (const auto& a : all) {
        if (a.cost > best + tol * (1.0 + std::abs(best))) continue;
        if (!have || a.pairs < out.pairs) {
            out = a;
            have = true;
        }
    }
    return out;
}

/// Line-cutting score by scanning ring boundaries outwards.
inline int boundary_scan_score(double distance_mm) {
    const double reach = distance_mm - 2.25;  // shaft radius of a 4.5 mm arrow
    for (int ring = 1; ring <= 10; ++ring) {
        if (reach <= 20.0 * ring) return 11 - ring;
    }
    return 0;
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Penalty-reduced focal loss written directly from its definition.
inline double focal_reference(const std::vector<double>& z, const std::vector<double>& y, double alpha,
                              double beta) {
    double sum = 0.0;
    int positives = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double p = std::clamp(sigmoid(z[i]), 1e-12, 1.0 - 1e-12);
        if (y[i] >= 0.99) {
            ++positives;
            sum += std::pow(1.0 - p, alpha) * std::log(p);
        } else {
            sum += std::pow(1.0 - y[i], beta) * std::pow(p, alpha) * std::log(1.0 - p);
        }
    }
    return -sum / std::max(positives, 1);
}

/// Points in [margin, size - margin)^2 pairwise at least `min_sep` apart.
inline std::vector<std::pair<double, double>> separated_points(std::mt19937_64& rng, int count,
                                                                double size, double margin,
                                                                double min_sep) {
    std::uniform_real_distribution<double> u(margin, size - margin);
    std::vector<std::pair<double, double>> out;
    int guard = 0;
    while (static_cast<int>(out.size()) < count && guard++ < 100000) {
        const std::pair<double, double> p{u(rng), u(rng)};
        bool ok = true;
        for (const auto& q : out) ok = ok && std::hypot(p.first - q.first, p.second - q.second) >= min_sep;
        if (ok) out.push_back(p);
    }
    return out;
}

}  // namespace oracle
