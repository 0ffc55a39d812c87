#include "tcsim/assignment.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tcsim {

namespace {

// Requires rows <= cols. Returns the column assigned to each row.
std::vector<int> solve_wide(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(a.cols());
  const double inf = std::numeric_limits<double>::infinity();

  // 1-based arrays; column 0 is the virtual source.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
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

  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

Assignment assign(const Eigen::MatrixXd& cost) {
  for (Eigen::Index i = 0; i < cost.size(); ++i) {
    const double c = cost.data()[i];
    if (!std::isfinite(c) || c < 0.0) throw std::invalid_argument("assign: costs must be finite and non-negative");
  }

  Assignment result;
  const auto rows = cost.rows();
  const auto cols = cost.cols();
  result.row_to_col.assign(static_cast<std::size_t>(rows), -1);
  if (rows == 0 || cols == 0) return result;

  if (rows <= cols) {
    result.row_to_col = solve_wide(cost);
  } else {
    const Eigen::MatrixXd transposed = cost.transpose();
    const std::vector<int> col_to_row = solve_wide(transposed);
    for (std::size_t j = 0; j < col_to_row.size(); ++j) result.row_to_col[col_to_row[j]] = static_cast<int>(j);
  }
  for (Eigen::Index i = 0; i < rows; ++i) {
    const int j = result.row_to_col[static_cast<std::size_t>(i)];
    if (j >= 0) result.total_cost += cost(i, j);
  }
  return result;
}

}  // namespace tcsim
