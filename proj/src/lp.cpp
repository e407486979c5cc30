#include "trpmbm/lp.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "trpmbm/errors.hpp"

namespace trpmbm {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-10;
constexpr double kZero = 1e-13;
constexpr int kDegenerateBeforeBland = 30;

}  // namespace

LPSolution solve_lp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  if (b.size() != m || c.size() != n) throw DimensionError("LP dimensions disagree");
  for (int r = 0; r < m; ++r)
    if (!(b(r) >= 0)) throw ConstraintError("LP needs b >= 0 (row " + std::to_string(r) + ")");

  const int width = n + m;
  std::vector<double> t(static_cast<std::size_t>(m) * width, 0.0);
  std::vector<double> rhs(b.data(), b.data() + m);
  std::vector<double> reduced(static_cast<std::size_t>(width), 0.0);
  std::vector<int> basis(static_cast<std::size_t>(m));
  auto at = [&](int r, int j) -> double& { return t[static_cast<std::size_t>(r) * width + j]; };
  for (int r = 0; r < m; ++r) {
    for (int j = 0; j < n; ++j) at(r, j) = a(r, j);
    at(r, n + r) = 1.0;
    basis[static_cast<std::size_t>(r)] = n + r;
  }
  for (int j = 0; j < n; ++j) reduced[static_cast<std::size_t>(j)] = c(j);

  LPSolution out;
  int degenerate = 0;
  const int max_pivots = 50 * (m + n) + 1000;
  std::vector<int> nz;
  for (;;) {
    const bool bland = degenerate >= kDegenerateBeforeBland;
    int enter = -1;
    double best = -kCostTol;
    for (int j = 0; j < width; ++j) {
      const double d = reduced[static_cast<std::size_t>(j)];
      if (d < best) {
        enter = j;
        if (bland) break;
        best = d;
      }
    }
    if (enter < 0) break;

    int leave = -1;
    double ratio = 0.0;
    for (int r = 0; r < m; ++r) {
      const double v = at(r, enter);
      if (v <= kPivotTol) continue;
      const double q = rhs[static_cast<std::size_t>(r)] / v;
      if (leave < 0 || q < ratio - 1e-12 ||
          (q <= ratio + 1e-12 && basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)])) {
        leave = r;
        ratio = q;
      }
    }
    if (leave < 0) throw NumericalError("LP is unbounded");
    if (++out.pivots > max_pivots) throw NumericalError("LP did not converge");
    degenerate = ratio <= 1e-12 ? degenerate + 1 : 0;

    const double inv = 1.0 / at(leave, enter);
    nz.clear();
    for (int j = 0; j < width; ++j) {
      double& v = at(leave, j);
      if (v == 0.0) continue;
      v *= inv;
      if (std::abs(v) < kZero) {
        v = 0.0;
      } else {
        nz.push_back(j);
      }
    }
    at(leave, enter) = 1.0;
    rhs[static_cast<std::size_t>(leave)] *= inv;
    const double* prow = &at(leave, 0);
    const double prhs = rhs[static_cast<std::size_t>(leave)];
    for (int r = 0; r < m; ++r) {
      if (r == leave) continue;
      const double f = at(r, enter);
      if (f == 0.0) continue;
      double* row = &at(r, 0);
      for (const int j : nz) {
        row[j] -= f * prow[j];
        if (std::abs(row[j]) < kZero) row[j] = 0.0;
      }
      row[enter] = 0.0;
      double& h = rhs[static_cast<std::size_t>(r)];
      h -= f * prhs;
      if (h < 0 && h > -1e-11) h = 0.0;
    }
    const double f = reduced[static_cast<std::size_t>(enter)];
    for (const int j : nz) {
      double& d = reduced[static_cast<std::size_t>(j)];
      d -= f * prow[j];
      if (std::abs(d) < kZero) d = 0.0;
    }
    reduced[static_cast<std::size_t>(enter)] = 0.0;
    basis[static_cast<std::size_t>(leave)] = enter;
  }

  out.x = Eigen::VectorXd::Zero(n);
  for (int r = 0; r < m; ++r) {
    const int j = basis[static_cast<std::size_t>(r)];
    if (j < n) out.x(j) = rhs[static_cast<std::size_t>(r)];
  }
  out.duals.resize(m);
  for (int r = 0; r < m; ++r) out.duals(r) = -reduced[static_cast<std::size_t>(n + r)];
  out.objective = c.dot(out.x);
  return out;
}

}  // namespace trpmbm
