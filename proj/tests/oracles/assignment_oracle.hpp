#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace trpmbm::oracle {

struct EnumeratedAssignment {
  std::vector<int> columns;
  double cost;
};

/// Every injective row -> column map with finite cost, sorted by (cost, columns).
inline std::vector<EnumeratedAssignment> enumerate_assignments(const Eigen::MatrixXd& cost) {
  std::vector<EnumeratedAssignment> all;
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  std::vector<int> current(static_cast<std::size_t>(rows), -1);
  std::vector<char> used(static_cast<std::size_t>(cols), 0);
  auto recurse = [&](auto&& self, int row) -> void {
    if (row == rows) {
      double total = 0;
      for (int r = 0; r < rows; ++r) total += cost(r, current[static_cast<std::size_t>(r)]);
      all.push_back({current, total});
      return;
    }
    for (int c = 0; c < cols; ++c) {
      if (used[static_cast<std::size_t>(c)] || !std::isfinite(cost(row, c))) continue;
      used[static_cast<std::size_t>(c)] = 1;
      current[static_cast<std::size_t>(row)] = c;
      self(self, row + 1);
      used[static_cast<std::size_t>(c)] = 0;
    }
  };
  recurse(recurse, 0);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.cost != b.cost ? a.cost < b.cost : a.columns < b.columns;
  });
  return all;
}

}  // namespace trpmbm::oracle
