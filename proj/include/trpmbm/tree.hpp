#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "trpmbm/genealogy.hpp"

namespace trpmbm {

/// A branch: genealogy plus its state sequence (one column per state).
struct Branch {
  GenealogyVar genealogy;
  Eigen::MatrixXd states;  // n_x x l(w)

  int length() const noexcept { return static_cast<int>(states.cols()); }
  /// Time step of the first state, given the tree start time.
  int first_time(int tree_start) const noexcept { return tree_start + genealogy.last_spawn_generation() - 1; }
  int last_time(int tree_start) const noexcept { return tree_start + genealogy.last_alive_generation() - 1; }
};

/// A tree trajectory: start time and set of branches sharing the same number of generations.
struct TreeTrajectory {
  int start_time = 1;
  std::vector<Branch> branches;

  /// nu, the common genealogy length (0 for an empty tree).
  int generations() const noexcept { return branches.empty() ? 0 : branches.front().genealogy.generations(); }
  /// Last time step covered by the tree horizon.
  int horizon_end() const noexcept { return start_time + generations() - 1; }
};

enum class TreeViolation {
  kEmpty,
  kMissingMainBranch,
  kGenerationMismatch,
  kLengthMismatch,
  kDuplicateId,
  kOrphanSpawn,
  kTooManyBranches,
  kModeOutOfRange,
  kBadStartTime,
};

struct TreeIssue {
  TreeViolation kind;
  int branch = -1;  // index into TreeTrajectory::branches, -1 for tree-level issues
  std::string detail;
};

/// Violations of the tree constraints; empty means the tree is valid.
struct TreeValidationReport {
  std::vector<TreeIssue> issues;

  bool valid() const noexcept { return issues.empty(); }
  bool has(TreeViolation kind) const noexcept;
};

/// Checks uniqueness, consistent offspring, the main branch and per-branch lengths.
/// `modes`, when given, also bounds marks and the branch count by n_max(nu).
TreeValidationReport validate_tree(const TreeTrajectory& tree, std::optional<int> modes = std::nullopt);

/// Last state of every branch that holds a state at time step k.
std::vector<Eigen::VectorXd> targets_at_time(const TreeTrajectory& tree, int k);

/// Restriction of a tree to time steps up to k; nullopt when the tree starts after k.
std::optional<TreeTrajectory> truncate_tree(const TreeTrajectory& tree, int k);

}  // namespace trpmbm
