#pragma once
#include <Eigen/Dense>
#include <vector>

namespace driftlab::measures {

struct AssignmentResult {
    std::vector<int> row_to_col;
    double cost = 0;
};

// Minimum-cost perfect assignment on a dense square cost matrix via shortest
// augmenting paths with dual potentials (Jonker-Volgenant), O(n^3).
AssignmentResult solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace driftlab::measures
