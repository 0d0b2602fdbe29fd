#include <arrowscore/evaluate.hpp>
#include <arrowscore/error.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace arrowscore::evaluate {
namespace {

/// Classic O(n^3) shortest-augmenting-path solver on a square matrix.
/// Returns row -> column and fills the dual potentials.
std::vector<int> solve_square(const std::vector<double>& c, int n, std::vector<double>& u,
                              std::vector<double>& v) {
    const double inf = std::numeric_limits<double>::infinity();
    // 1-based internals; column 0 is a sentinel.
    u.assign(n + 1, 0.0);
    v.assign(n + 1, 0.0);
    std::vector<int> owner(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        owner[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = owner[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = c[static_cast<std::size_t>(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (owner[j0] != 0);
        do {
            const int j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j) row_to_col[owner[j] - 1] = j - 1;
    return row_to_col;
}

/// Rewrites an optimal matching into the lexicographically smallest one
/// among those using only tight edges of the optimal dual.
void lexicographic_rewrite(std::vector<int>& row_to_col, const std::vector<std::vector<char>>& tight,
                           int n) {
    std::vector<int> col_to_row(n);
    for (int i = 0; i < n; ++i) col_to_row[row_to_col[i]] = i;
    std::vector<char> fixed_col(n, 0);
    std::vector<char> visited(n, 0);

    // Can `row` give up its column for one of the unfixed columns reachable
    // by an alternating path that ends at `target_col`?
    const auto find_path = [&](auto&& self, int row, int target_col, std::vector<int>& path) -> bool {
        for (int j = 0; j < n; ++j) {
            if (!tight[row][j] || fixed_col[j] || visited[j]) continue;
            visited[j] = 1;
            path.push_back(j);
            if (j == target_col || self(self, col_to_row[j], target_col, path)) return true;
            path.pop_back();
        }
        return false;
    };

    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < row_to_col[i]; ++j) {
            if (!tight[i][j] || fixed_col[j]) continue;
            // Move i -> j; the displaced row must reach i's old column.
            std::fill(visited.begin(), visited.end(), 0);
            visited[j] = 1;
            std::vector<int> path;
            const int freed = row_to_col[i];
            visited[freed] = 0;
            const int displaced = col_to_row[j];
            if (!find_path(find_path, displaced, freed, path)) continue;
            // Apply the rotation i->j, displaced->path[0], ...
            int row = displaced;
            row_to_col[i] = j;
            col_to_row[j] = i;
            for (int col : path) {
                const int next_row = col_to_row[col];
                row_to_col[row] = col;
                col_to_row[col] = row;
                row = next_row;
            }
            break;
        }
        fixed_col[row_to_col[i]] = 1;
    }
}

}  // namespace

Assignment hungarian(const CostMatrix& cost) {
    require(cost.rows >= 0 && cost.cols >= 0 &&
                cost.values.size() == static_cast<std::size_t>(cost.rows) * cost.cols,
            "hungarian: malformed cost matrix");
    double max_abs = 0.0;
    for (double v : cost.values) {
        require(std::isfinite(v), "hungarian: non-finite cost entry");
        max_abs = std::max(max_abs, std::abs(v));
    }
    Assignment result;
    const int n = std::max(cost.rows, cost.cols);
    if (cost.rows == 0 || cost.cols == 0) return result;

    // Pad to square with a cost above every real entry.
    const double pad = 2.0 * max_abs + 1.0;
    std::vector<double> square(static_cast<std::size_t>(n) * n, pad);
    for (int r = 0; r < cost.rows; ++r) {
        for (int c = 0; c < cost.cols; ++c) square[static_cast<std::size_t>(r) * n + c] = cost(r, c);
    }
    std::vector<double> u, v;
    std::vector<int> row_to_col = solve_square(square, n, u, v);

    const double tol = 1e-9 * (1.0 + pad);
    std::vector<std::vector<char>> tight(n, std::vector<char>(n, 0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            tight[i][j] = std::abs(square[static_cast<std::size_t>(i) * n + j] - u[i + 1] - v[j + 1]) <= tol;
        }
    }
    lexicographic_rewrite(row_to_col, tight, n);

    for (int r = 0; r < cost.rows; ++r) {
        const int c = row_to_col[r];
        if (c < cost.cols) {
            result.pairs.emplace_back(r, c);
            result.cost += cost(r, c);
        }
    }
    return result;
}

}  // namespace arrowscore::evaluate
