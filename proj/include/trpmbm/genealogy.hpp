#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace trpmbm {

using Mark = std::uint8_t;

class BranchId;

/// Per-generation marks of a branch: 1 survived, 0 not alive, m >= 2 spawned with mode m.
///
/// The first mark is always 1 and once a 0 appears every later mark is 0. Generations are
/// numbered from 1 as in the tree model; `marks()` exposes the 0-based storage.
class GenealogyVar {
 public:
  /// Root genealogy (1).
  GenealogyVar() : marks_{1} {}
  explicit GenealogyVar(const std::vector<int>& marks);
  GenealogyVar(std::initializer_list<int> marks) : GenealogyVar(std::vector<int>(marks)) {}

  static GenealogyVar all_ones(int generations);

  int generations() const noexcept { return static_cast<int>(marks_.size()); }
  int mark(int generation) const;
  std::span<const Mark> marks() const noexcept { return marks_; }

  /// e(w): last generation with a nonzero mark.
  int last_alive_generation() const noexcept;
  /// i(w): generation of the last spawning event (1 for a branch that never spawned).
  int last_spawn_generation() const noexcept;
  bool alive_at_end() const noexcept { return marks_.back() != 0; }
  /// True when the branch itself (not an ancestor) holds a state at `generation`.
  bool alive_at(int generation) const noexcept;

  GenealogyVar appended(int mark) const;
  BranchId id() const;
  std::string to_string() const;

  friend bool operator==(const GenealogyVar&, const GenealogyVar&) = default;
  friend std::strong_ordering operator<=>(const GenealogyVar& a, const GenealogyVar& b) {
    return a.marks_ <=> b.marks_;
  }

 private:
  struct Unchecked {};
  GenealogyVar(std::vector<Mark> marks, Unchecked) : marks_(std::move(marks)) {}

  std::vector<Mark> marks_;
};

/// Genealogy prefix up to the last spawning generation; unique within a tree.
class BranchId {
 public:
  BranchId() : prefix_{1} {}
  explicit BranchId(const std::vector<int>& prefix);
  BranchId(std::initializer_list<int> prefix) : BranchId(std::vector<int>(prefix)) {}

  /// Generation at which the branch was spawned (1 for the main branch).
  int spawn_generation() const noexcept { return static_cast<int>(prefix_.size()); }
  std::span<const Mark> marks() const noexcept { return prefix_; }
  bool is_main() const noexcept { return prefix_.size() == 1; }

  /// Child id created by spawning with `mode` from a branch whose genealogy is `parent`.
  static BranchId spawned_from(const GenealogyVar& parent, int mode);

  std::string to_string() const;

  friend bool operator==(const BranchId&, const BranchId&) = default;
  friend std::strong_ordering operator<=>(const BranchId& a, const BranchId& b) {
    return a.prefix_ <=> b.prefix_;
  }

 private:
  friend class GenealogyVar;
  friend class BranchIdRange;
  struct Unchecked {};
  BranchId(std::vector<Mark> prefix, Unchecked) : prefix_(std::move(prefix)) {}

  std::vector<Mark> prefix_;
};

/// l(w) = e(w) - i(w) + 1, the number of states stored in the branch.
int branch_length(const GenealogyVar& genealogy);

/// w* = (w^1, ..., w^{i(w)}).
BranchId unique_id(const GenealogyVar& genealogy);

/// n_max(nu) = rho^(nu-1). Throws OverflowError when the count does not fit 64 bits.
std::uint64_t max_branches(int generations, int modes);

/// l_max(nu, j): time steps from the branch's spawn generation to generation nu.
int max_branch_length(int generations, const BranchId& id);

/// w_(nu, j, l): the genealogy of branch `id` in a nu-generation tree when it holds l states.
GenealogyVar genealogy_for(int generations, const BranchId& id, int length);

/// 1-based lexicographic position of `id` among all ids of a nu-generation tree.
std::uint64_t branch_index(int generations, int modes, const BranchId& id);

/// Lazy lexicographic enumeration of every BranchId of a nu-generation tree.
///
/// Shorter prefixes come first (plain lexicographic order on the marks), so position j of the
/// sequence is the branch index j. Nothing is materialised.
class BranchIdRange {
 public:
  BranchIdRange(int generations, int modes);

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = BranchId;
    using difference_type = std::ptrdiff_t;
    using pointer = const BranchId*;
    using reference = const BranchId&;

    iterator() = default;
    reference operator*() const { return current_; }
    pointer operator->() const { return &current_; }
    iterator& operator++();
    iterator operator++(int) {
      auto copy = *this;
      ++*this;
      return copy;
    }
    friend bool operator==(const iterator& a, const iterator& b) { return a.done_ == b.done_ && (a.done_ || a.current_ == b.current_); }

   private:
    friend class BranchIdRange;
    iterator(int generations, int modes);
    void advance_raw();

    int generations_ = 0;
    int modes_ = 0;
    bool done_ = true;
    BranchId current_;
  };

  iterator begin() const { return iterator(generations_, modes_); }
  iterator end() const { return iterator(); }
  std::uint64_t size() const { return max_branches(generations_, modes_); }

 private:
  int generations_;
  int modes_;
};

/// Materialised enumeration; only for small trees.
std::vector<BranchId> enumerate_branch_ids(int generations, int modes);

}  // namespace trpmbm

template <>
struct std::hash<trpmbm::BranchId> {
  std::size_t operator()(const trpmbm::BranchId& id) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (auto m : id.marks()) h = (h ^ m) * 1099511628211ULL;
    return h;
  }
};
