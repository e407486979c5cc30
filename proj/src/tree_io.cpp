#include "trpmbm/tree_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "trpmbm/errors.hpp"

namespace trpmbm {

namespace {

void append_double(std::string& out, double value) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  out.append(buffer, end);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t begin = 0;
  while (true) {
    auto pos = s.find(sep, begin);
    parts.push_back(s.substr(begin, pos == std::string_view::npos ? std::string_view::npos : pos - begin));
    if (pos == std::string_view::npos) break;
    begin = pos + 1;
  }
  return parts;
}

template <typename T>
T parse_number(std::string_view token, int line) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  T value{};
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError("line " + std::to_string(line) + ": invalid number '" + std::string(token) + "'", line);
  }
  return value;
}

Eigen::VectorXd parse_state(std::string_view field, int line) {
  std::vector<double> values;
  for (auto token : split(trim(field), ' ')) {
    if (trim(token).empty()) continue;
    values.push_back(parse_number<double>(token, line));
  }
  if (values.empty()) throw ParseError("line " + std::to_string(line) + ": empty state", line);
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

std::string encode_tree(const TreeTrajectory& tree) {
  std::string out;
  for (const auto& branch : tree.branches) {
    out += std::to_string(tree.start_time);
    out += "; ";
    out += branch.genealogy.to_string();
    for (Eigen::Index c = 0; c < branch.states.cols(); ++c) {
      out += ";";
      for (Eigen::Index r = 0; r < branch.states.rows(); ++r) {
        out += ' ';
        append_double(out, branch.states(r, c));
      }
    }
    out += '\n';
  }
  return out;
}

std::string encode_trees(const std::vector<TreeTrajectory>& trees) {
  std::string out;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    if (i > 0) out += '\n';
    out += encode_tree(trees[i]);
  }
  return out;
}

std::vector<TreeTrajectory> decode_trees(std::string_view text) {
  std::vector<TreeTrajectory> trees;
  bool open = false;
  int line_number = 0;
  for (auto raw : split(text, '\n')) {
    ++line_number;
    auto line = trim(raw);
    if (!line.empty() && line.front() == '#') continue;
    if (line.empty()) {
      open = false;
      continue;
    }
    auto fields = split(line, ';');
    if (fields.size() < 3) {
      throw ParseError("line " + std::to_string(line_number) + ": expected 't; marks; state[; state...]'", line_number);
    }
    const int start = parse_number<int>(fields[0], line_number);
    std::vector<int> marks;
    for (auto token : split(trim(fields[1]), ',')) marks.push_back(parse_number<int>(token, line_number));
    Branch branch;
    try {
      branch.genealogy = GenealogyVar(marks);
    } catch (const ConstraintError& e) {
      throw ParseError("line " + std::to_string(line_number) + ": " + e.what(), line_number);
    }
    std::vector<Eigen::VectorXd> states;
    for (std::size_t f = 2; f < fields.size(); ++f) states.push_back(parse_state(fields[f], line_number));
    const auto dim = states.front().size();
    branch.states.resize(dim, static_cast<Eigen::Index>(states.size()));
    for (std::size_t s = 0; s < states.size(); ++s) {
      if (states[s].size() != dim) throw ParseError("line " + std::to_string(line_number) + ": ragged state", line_number);
      branch.states.col(static_cast<Eigen::Index>(s)) = states[s];
    }
    if (!open) {
      trees.push_back(TreeTrajectory{start, {}});
      open = true;
    } else if (trees.back().start_time != start) {
      throw ParseError("line " + std::to_string(line_number) + ": start time differs within a tree", line_number);
    }
    trees.back().branches.push_back(std::move(branch));
  }
  return trees;
}

std::vector<TreeTrajectory> read_trees_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return decode_trees(buffer.str());
}

void write_trees_file(const std::filesystem::path& path, const std::vector<TreeTrajectory>& trees) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << encode_trees(trees);
}

}  // namespace trpmbm
