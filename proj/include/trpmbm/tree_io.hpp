#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "trpmbm/tree.hpp"

namespace trpmbm {

// Text encoding of trees: one line per branch,
//
//   t; w1,w2,...,wnu; x1 x2 ... xn; x1 x2 ... xn; ...
//
// i.e. start time, genealogy marks, then one space-separated state per ';' field. Consecutive
// branch lines form one tree; trees are separated by a blank line. '#' starts a comment line.
// Floats are written in shortest round-trip form.

std::string encode_tree(const TreeTrajectory& tree);
std::string encode_trees(const std::vector<TreeTrajectory>& trees);
std::vector<TreeTrajectory> decode_trees(std::string_view text);

std::vector<TreeTrajectory> read_trees_file(const std::filesystem::path& path);
void write_trees_file(const std::filesystem::path& path, const std::vector<TreeTrajectory>& trees);

}  // namespace trpmbm
