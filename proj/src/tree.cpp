#include "trpmbm/tree.hpp"

#include <algorithm>
#include <map>

#include "trpmbm/errors.hpp"

namespace trpmbm {

bool TreeValidationReport::has(TreeViolation kind) const noexcept {
  return std::any_of(issues.begin(), issues.end(), [kind](const TreeIssue& i) { return i.kind == kind; });
}

TreeValidationReport validate_tree(const TreeTrajectory& tree, std::optional<int> modes) {
  TreeValidationReport report;
  auto add = [&report](TreeViolation kind, int branch, std::string detail) {
    report.issues.push_back({kind, branch, std::move(detail)});
  };

  if (tree.start_time < 1) add(TreeViolation::kBadStartTime, -1, "start time must be >= 1");
  if (tree.branches.empty()) {
    add(TreeViolation::kEmpty, -1, "tree has no branches");
    add(TreeViolation::kMissingMainBranch, -1, "main branch (1) missing");
    return report;
  }

  const int nu = tree.generations();
  std::map<BranchId, int> seen;
  bool has_main = false;
  for (int b = 0; b < static_cast<int>(tree.branches.size()); ++b) {
    const auto& branch = tree.branches[static_cast<std::size_t>(b)];
    const auto& g = branch.genealogy;
    if (g.generations() != nu) {
      add(TreeViolation::kGenerationMismatch, b,
          "genealogy has " + std::to_string(g.generations()) + " generations, expected " + std::to_string(nu));
    }
    if (branch.length() != branch_length(g)) {
      add(TreeViolation::kLengthMismatch, b,
          "branch holds " + std::to_string(branch.length()) + " states, genealogy implies " +
              std::to_string(branch_length(g)));
    }
    if (modes) {
      for (auto m : g.marks()) {
        if (m > *modes) {
          add(TreeViolation::kModeOutOfRange, b, "mark " + std::to_string(m) + " exceeds mode count");
          break;
        }
      }
    }
    const auto id = g.id();
    if (id.is_main()) has_main = true;
    auto [it, inserted] = seen.emplace(id, b);
    if (!inserted) {
      add(TreeViolation::kDuplicateId, b, "id " + id.to_string() + " already used by branch " + std::to_string(it->second));
    }
  }
  if (!has_main) add(TreeViolation::kMissingMainBranch, -1, "main branch (1) missing");

  // Consistent offspring: every spawn mark has a parent that survives or terminates there.
  for (int b = 0; b < static_cast<int>(tree.branches.size()); ++b) {
    const auto marks = tree.branches[static_cast<std::size_t>(b)].genealogy.marks();
    for (std::size_t g = 1; g < marks.size(); ++g) {
      if (marks[g] <= 1) continue;
      bool parent = false;
      for (int o = 0; o < static_cast<int>(tree.branches.size()) && !parent; ++o) {
        if (o == b) continue;
        const auto other = tree.branches[static_cast<std::size_t>(o)].genealogy.marks();
        if (other.size() <= g) continue;
        parent = std::equal(marks.begin(), marks.begin() + static_cast<std::ptrdiff_t>(g), other.begin()) &&
                 other[g] <= 1;
      }
      if (!parent) {
        add(TreeViolation::kOrphanSpawn, b, "spawn at generation " + std::to_string(g + 1) + " has no parent branch");
      }
    }
  }

  if (modes) {
    try {
      if (tree.branches.size() > max_branches(nu, *modes)) {
        add(TreeViolation::kTooManyBranches, -1, "more branches than n_max(nu)");
      }
    } catch (const OverflowError&) {
      // n_max beyond 64 bits cannot be exceeded by an in-memory tree
    }
  }
  return report;
}

std::vector<Eigen::VectorXd> targets_at_time(const TreeTrajectory& tree, int k) {
  if (tree.branches.empty() || k < tree.start_time || k > tree.horizon_end()) {
    throw RangeError("time step " + std::to_string(k) + " outside tree horizon " + std::to_string(tree.start_time) +
                     ".." + std::to_string(tree.horizon_end()));
  }
  const int generation = k - tree.start_time + 1;
  std::vector<Eigen::VectorXd> targets;
  for (const auto& branch : tree.branches) {
    if (!branch.genealogy.alive_at(generation)) continue;
    const int column = generation - branch.genealogy.last_spawn_generation();
    targets.emplace_back(branch.states.col(column));
  }
  return targets;
}

std::optional<TreeTrajectory> truncate_tree(const TreeTrajectory& tree, int k) {
  if (k < tree.start_time) return std::nullopt;
  if (k >= tree.horizon_end()) return tree;
  const int nu = k - tree.start_time + 1;
  TreeTrajectory out;
  out.start_time = tree.start_time;
  for (const auto& branch : tree.branches) {
    const auto& g = branch.genealogy;
    if (g.last_spawn_generation() > nu) continue;
    std::vector<int> marks(g.marks().begin(), g.marks().begin() + nu);
    GenealogyVar truncated(marks);
    const int length = branch_length(truncated);
    out.branches.push_back({std::move(truncated), branch.states.leftCols(length)});
  }
  return out;
}

}  // namespace trpmbm
