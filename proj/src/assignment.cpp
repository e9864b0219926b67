#include <limits>
#include <vector>

#include "hypermatch/error.hpp"
#include "hypermatch/transport.hpp"

namespace hm::transport {

namespace {

// Shortest augmenting paths with row/column potentials (Hungarian method in
// its O(rows² · cols) form). Requires rows ≤ cols; returns column per row.
std::vector<int> augmenting_paths(const std::vector<double>& a, int rows, int cols) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0), minv(cols + 1);
    std::vector<int> p(cols + 1, 0), way(cols + 1, 0);
    std::vector<char> used(cols + 1);
    for (int i = 1; i <= rows; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            const double* row = a.data() + static_cast<std::size_t>(i0 - 1) * cols;
            for (int j = 1; j <= cols; ++j) {
                if (used[j]) continue;
                const double cur = row[j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= cols; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> col_of(rows, -1);
    for (int j = 1; j <= cols; ++j)
        if (p[j] != 0) col_of[p[j] - 1] = j - 1;
    return col_of;
}

}  // namespace

std::vector<int> solve_assignment(const std::vector<double>& cost, int n) {
    if (n < 0 || cost.size() != static_cast<std::size_t>(n) * n)
        fail(ErrorKind::dimension, "assignment cost matrix must be n×n");
    if (n == 0) return {};
    return augmenting_paths(cost, n, n);
}

std::vector<int> solve_rectangular_assignment(const std::vector<double>& cost, int rows, int cols) {
    if (rows > cols) fail(ErrorKind::dimension, "rectangular assignment needs rows <= cols");
    if (rows == 0) return {};
    return augmenting_paths(cost, rows, cols);
}

}  // namespace hm::transport
