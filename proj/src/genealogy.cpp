#include "trpmbm/genealogy.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "trpmbm/errors.hpp"

namespace trpmbm {

namespace {

constexpr int kMaxMark = std::numeric_limits<Mark>::max();

std::uint64_t checked_pow(std::uint64_t base, int exponent) {
  std::uint64_t result = 1;
  for (int e = 0; e < exponent; ++e) {
    if (base != 0 && result > std::numeric_limits<std::uint64_t>::max() / base) {
      throw OverflowError("branch count " + std::to_string(base) + "^" + std::to_string(exponent) +
                          " overflows 64 bits");
    }
    result *= base;
  }
  return result;
}

template <typename Range>
std::string join_marks(const Range& marks) {
  std::ostringstream out;
  bool first = true;
  for (auto m : marks) {
    if (!first) out << ',';
    out << static_cast<int>(m);
    first = false;
  }
  return out.str();
}

}  // namespace

GenealogyVar::GenealogyVar(const std::vector<int>& marks) {
  if (marks.empty()) throw ConstraintError("genealogy must have at least one generation");
  if (marks.front() != 1) throw ConstraintError("genealogy must start with mark 1");
  bool dead = false;
  marks_.reserve(marks.size());
  for (int m : marks) {
    if (m < 0 || m > kMaxMark) throw ConstraintError("genealogy mark out of range: " + std::to_string(m));
    if (dead && m != 0) throw ConstraintError("genealogy mark after a 0 must be 0");
    if (m == 0) dead = true;
    marks_.push_back(static_cast<Mark>(m));
  }
}

GenealogyVar GenealogyVar::all_ones(int generations) {
  if (generations < 1) throw ConstraintError("genealogy must have at least one generation");
  return GenealogyVar(std::vector<Mark>(static_cast<std::size_t>(generations), Mark{1}), Unchecked{});
}

int GenealogyVar::mark(int generation) const {
  if (generation < 1 || generation > generations()) {
    throw RangeError("generation " + std::to_string(generation) + " outside 1.." + std::to_string(generations()));
  }
  return marks_[static_cast<std::size_t>(generation - 1)];
}

int GenealogyVar::last_alive_generation() const noexcept {
  auto zero = std::find(marks_.begin(), marks_.end(), Mark{0});
  return static_cast<int>(zero - marks_.begin());
}

int GenealogyVar::last_spawn_generation() const noexcept {
  for (int g = generations(); g >= 2; --g) {
    if (marks_[static_cast<std::size_t>(g - 1)] > 1) return g;
  }
  return 1;
}

bool GenealogyVar::alive_at(int generation) const noexcept {
  return generation >= last_spawn_generation() && generation <= last_alive_generation();
}

GenealogyVar GenealogyVar::appended(int mark) const {
  if (mark < 0 || mark > kMaxMark) throw ConstraintError("genealogy mark out of range: " + std::to_string(mark));
  if (!alive_at_end() && mark != 0) throw ConstraintError("cannot extend a dead branch with a nonzero mark");
  auto next = marks_;
  next.push_back(static_cast<Mark>(mark));
  return GenealogyVar(std::move(next), Unchecked{});
}

BranchId GenealogyVar::id() const {
  auto end = marks_.begin() + last_spawn_generation();
  return BranchId(std::vector<Mark>(marks_.begin(), end), BranchId::Unchecked{});
}

std::string GenealogyVar::to_string() const { return join_marks(marks_); }

BranchId::BranchId(const std::vector<int>& prefix) {
  if (prefix.empty() || prefix.front() != 1) throw ConstraintError("branch id must start with mark 1");
  for (int m : prefix) {
    if (m < 1 || m > kMaxMark) throw ConstraintError("branch id marks must be nonzero");
    prefix_.push_back(static_cast<Mark>(m));
  }
  if (prefix_.size() > 1 && prefix_.back() < 2) {
    throw ConstraintError("branch id must end at a spawning generation");
  }
}

BranchId BranchId::spawned_from(const GenealogyVar& parent, int mode) {
  if (mode < 2 || mode > kMaxMark) throw ConstraintError("spawning mode must be >= 2");
  if (!parent.alive_at_end()) throw ConstraintError("a dead branch cannot spawn");
  std::vector<Mark> prefix(parent.marks().begin(), parent.marks().end());
  prefix.push_back(static_cast<Mark>(mode));
  return BranchId(std::move(prefix), Unchecked{});
}

std::string BranchId::to_string() const { return join_marks(prefix_); }

int branch_length(const GenealogyVar& genealogy) {
  return genealogy.last_alive_generation() - genealogy.last_spawn_generation() + 1;
}

BranchId unique_id(const GenealogyVar& genealogy) { return genealogy.id(); }

std::uint64_t max_branches(int generations, int modes) {
  if (generations < 1) throw ConstraintError("a tree needs at least one generation");
  if (modes < 1) throw ConstraintError("at least one motion mode is required");
  return checked_pow(static_cast<std::uint64_t>(modes), generations - 1);
}

int max_branch_length(int generations, const BranchId& id) {
  if (id.spawn_generation() > generations) {
    throw RangeError("branch " + id.to_string() + " does not exist in a " + std::to_string(generations) +
                     "-generation tree");
  }
  return generations - id.spawn_generation() + 1;
}

GenealogyVar genealogy_for(int generations, const BranchId& id, int length) {
  const int lmax = max_branch_length(generations, id);
  if (length < 1 || length > lmax) {
    throw RangeError("branch length " + std::to_string(length) + " outside 1.." + std::to_string(lmax));
  }
  std::vector<int> marks(id.marks().begin(), id.marks().end());
  marks.insert(marks.end(), static_cast<std::size_t>(length - 1), 1);
  marks.resize(static_cast<std::size_t>(generations), 0);
  return GenealogyVar(marks);
}

std::uint64_t branch_index(int generations, int modes, const BranchId& id) {
  max_branches(generations, modes);
  if (id.spawn_generation() > generations) throw RangeError("branch id longer than the tree");
  const auto marks = id.marks();
  std::uint64_t before = 0;
  for (int depth = 1; depth <= id.spawn_generation(); ++depth) {
    if (depth >= 2) {
      const int mark = marks[static_cast<std::size_t>(depth - 1)];
      if (mark > modes) throw ConstraintError("branch id mark exceeds the number of modes");
      const std::uint64_t subtree = checked_pow(static_cast<std::uint64_t>(modes), generations - depth) - 1;
      for (int sibling = 1; sibling < mark; ++sibling) before += subtree + (sibling >= 2 ? 1 : 0);
    }
    const bool ancestor = depth < id.spawn_generation();
    if (ancestor && (depth == 1 || marks[static_cast<std::size_t>(depth - 1)] >= 2)) ++before;
  }
  return before + 1;
}

BranchIdRange::BranchIdRange(int generations, int modes) : generations_(generations), modes_(modes) {
  if (generations < 1) throw ConstraintError("a tree needs at least one generation");
  if (modes < 1) throw ConstraintError("at least one motion mode is required");
}

BranchIdRange::iterator::iterator(int generations, int modes)
    : generations_(generations), modes_(modes), done_(false), current_() {}

void BranchIdRange::iterator::advance_raw() {
  auto& prefix = current_.prefix_;
  if (static_cast<int>(prefix.size()) < generations_) {
    prefix.push_back(1);
    return;
  }
  while (true) {
    if (prefix.size() == 1) {
      done_ = true;
      return;
    }
    if (prefix.back() < modes_) {
      ++prefix.back();
      return;
    }
    prefix.pop_back();
  }
}

BranchIdRange::iterator& BranchIdRange::iterator::operator++() {
  do {
    advance_raw();
  } while (!done_ && current_.prefix_.size() > 1 && current_.prefix_.back() < 2);
  return *this;
}

std::vector<BranchId> enumerate_branch_ids(int generations, int modes) {
  BranchIdRange range(generations, modes);
  std::vector<BranchId> ids;
  ids.reserve(static_cast<std::size_t>(range.size()));
  for (const auto& id : range) ids.push_back(id);
  return ids;
}

}  // namespace trpmbm
