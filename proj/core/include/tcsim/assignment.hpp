#pragma once

#include <vector>

#include <Eigen/Core>

namespace tcsim {

/// Result of a rectangular linear assignment. `row_to_col[i]` is the column given to row i, or -1
/// when the row is left out (only possible when there are more rows than columns).
struct Assignment {
  std::vector<int> row_to_col;
  double total_cost = 0.0;
};

/// Exact minimum-cost one-to-one assignment of the smaller side into the larger one
/// (shortest augmenting paths with dual potentials, O(n^2 m)).
/// Throws std::invalid_argument on negative or non-finite entries.
Assignment assign(const Eigen::MatrixXd& cost);

}  // namespace tcsim
