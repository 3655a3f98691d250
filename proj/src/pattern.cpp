#include "ce/pattern.hpp"

#include <algorithm>
#include <stdexcept>

namespace ce {

void BlockSparsityPattern::insert(index_t i, index_t j) {
  if (i < 0 || i >= block_rows() || j < 0 || j >= block_rows())
    throw std::out_of_range("pattern position outside block grid");
  auto& r = rows_[static_cast<size_t>(i)];
  auto it = std::lower_bound(r.begin(), r.end(), j);
  if (it == r.end() || *it != j) r.insert(it, j);
}

void BlockSparsityPattern::insert_symmetric(index_t i, index_t j) {
  insert(i, j);
  if (i != j) insert(j, i);
}

void BlockSparsityPattern::add_full_diagonal() {
  for (index_t i = 0; i < block_rows(); ++i) insert(i, i);
}

bool BlockSparsityPattern::contains(index_t i, index_t j) const {
  if (i < 0 || i >= block_rows() || j < 0 || j >= block_rows()) return false;
  const auto& r = rows_[static_cast<size_t>(i)];
  return std::binary_search(r.begin(), r.end(), j);
}

index_t BlockSparsityPattern::stored_blocks() const {
  index_t n = 0;
  for (const auto& r : rows_) n += static_cast<index_t>(r.size());
  return n;
}

index_t BlockSparsityPattern::lower_blocks() const {
  index_t n = 0;
  for (index_t i = 0; i < block_rows(); ++i)
    for (index_t j : rows_[static_cast<size_t>(i)])
      if (j <= i) ++n;
  return n;
}

index_t BlockSparsityPattern::max_row_degree() const {
  index_t d = 0;
  for (const auto& r : rows_) d = std::max(d, static_cast<index_t>(r.size()));
  return d;
}

bool BlockSparsityPattern::is_structurally_symmetric() const {
  for (index_t i = 0; i < block_rows(); ++i)
    for (index_t j : rows_[static_cast<size_t>(i)])
      if (!contains(j, i)) return false;
  return true;
}

bool BlockSparsityPattern::has_full_diagonal() const {
  for (index_t i = 0; i < block_rows(); ++i)
    if (!contains(i, i)) return false;
  return true;
}

BlockSparsityPattern pattern_square(const BlockSparsityPattern& p) {
  const index_t m = p.block_rows();
  BlockSparsityPattern sq(m);
  std::vector<char> mark(static_cast<size_t>(m), 0);
  std::vector<index_t> touched;
  for (index_t i = 0; i < m; ++i) {
    touched.clear();
    for (index_t k : p.row(i)) {
      for (index_t j : p.row(k)) {
        if (!mark[static_cast<size_t>(j)]) {
          mark[static_cast<size_t>(j)] = 1;
          touched.push_back(j);
        }
      }
    }
    std::sort(touched.begin(), touched.end());
    for (index_t j : touched) {
      sq.insert(i, j);
      mark[static_cast<size_t>(j)] = 0;
    }
  }
  return sq;
}

BlockSparsityPattern far_pattern(const BlockSparsityPattern& p) {
  BlockSparsityPattern sq = pattern_square(p);
  BlockSparsityPattern far(p.block_rows());
  for (index_t i = 0; i < p.block_rows(); ++i)
    for (index_t j : sq.row(i))
      if (j != i && !p.contains(i, j)) far.insert(i, j);
  return far;
}

BlockSparsityPattern coarsen_pattern(const BlockSparsityPattern& p,
                                     const std::vector<std::vector<index_t>>& groups) {
  const index_t m = p.block_rows();
  std::vector<index_t> group_of(static_cast<size_t>(m), -1);
  for (size_t g = 0; g < groups.size(); ++g) {
    for (index_t b : groups[g]) {
      if (b < 0 || b >= m || group_of[static_cast<size_t>(b)] != -1)
        throw std::invalid_argument("groups must partition the block index range");
      group_of[static_cast<size_t>(b)] = static_cast<index_t>(g);
    }
  }
  for (index_t b = 0; b < m; ++b)
    if (group_of[static_cast<size_t>(b)] == -1)
      throw std::invalid_argument("groups must cover every block");

  BlockSparsityPattern c(static_cast<index_t>(groups.size()));
  for (index_t i = 0; i < m; ++i) {
    const index_t gi = group_of[static_cast<size_t>(i)];
    for (index_t j : p.row(i)) c.insert(gi, group_of[static_cast<size_t>(j)]);
  }
  return c;
}

bool pattern_is_subset(const BlockSparsityPattern& sub, const BlockSparsityPattern& sup) {
  if (sub.block_rows() != sup.block_rows()) return false;
  for (index_t i = 0; i < sub.block_rows(); ++i)
    for (index_t j : sub.row(i))
      if (!sup.contains(i, j)) return false;
  return true;
}

}  // namespace ce
