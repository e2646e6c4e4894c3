#include "driftlab/assignment.hpp"

#include <limits>
#include <stdexcept>

namespace driftlab::measures {

AssignmentResult solve_assignment(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    if (cost.cols() != n) throw std::invalid_argument("solve_assignment: matrix must be square");
    if (n == 0) return {};

    const double inf = std::numeric_limits<double>::infinity();
    // potentials over rows/cols; way[j] remembers the augmenting predecessor
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, -1), way(n + 1, 0);

    for (int i = 0; i < n; ++i) {
        p[n] = i;
        int j0 = n;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, false);
        do {
            used[j0] = true;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = -1;
            for (int j = 0; j < n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0, j) - u[i0] - v[j];
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
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != -1);
        // unwind the augmenting path
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != n);
    }

    AssignmentResult res;
    res.row_to_col.assign(n, -1);
    for (int j = 0; j < n; ++j)
        if (p[j] >= 0) res.row_to_col[p[j]] = j;
    res.cost = 0.0;
    for (int i = 0; i < n; ++i) res.cost += cost(i, res.row_to_col[i]);
    return res;
}

}  // namespace driftlab::measures
