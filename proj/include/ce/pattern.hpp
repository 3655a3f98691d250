#pragma once

#include <vector>

#include "ce/types.hpp"

namespace ce {

// Block sparsity pattern over an M x M block grid.  Row lists are kept
// sorted and unique.  A finalized pattern used by the matrix classes is
// structurally symmetric and contains every diagonal position.
class BlockSparsityPattern {
 public:
  BlockSparsityPattern() = default;
  explicit BlockSparsityPattern(index_t block_rows)
      : rows_(static_cast<size_t>(block_rows)) {}

  index_t block_rows() const { return static_cast<index_t>(rows_.size()); }

  void insert(index_t i, index_t j);
  // Inserts (i, j) and (j, i).
  void insert_symmetric(index_t i, index_t j);
  void add_full_diagonal();

  bool contains(index_t i, index_t j) const;
  const std::vector<index_t>& row(index_t i) const {
    return rows_[static_cast<size_t>(i)];
  }

  // Stored positions, both triangles.
  index_t stored_blocks() const;
  // Positions with j <= i.  This is the count used for factor-size
  // accounting: one lower-triangle position contributes the (i, j) and
  // (j, i) blocks of a symmetric factorization level.
  index_t lower_blocks() const;

  index_t max_row_degree() const;

  bool is_structurally_symmetric() const;
  bool has_full_diagonal() const;

  bool operator==(const BlockSparsityPattern& o) const { return rows_ == o.rows_; }

 private:
  std::vector<std::vector<index_t>> rows_;
};

// Boolean product p * p: position (i, j) is present iff some k has
// (i, k) and (k, j) present.  With full diagonal this contains p.
BlockSparsityPattern pattern_square(const BlockSparsityPattern& p);

// Positions of square(p) that are not in p.  Never contains diagonal
// positions.  These are the positions where elimination fill lands.
BlockSparsityPattern far_pattern(const BlockSparsityPattern& p);

// Collapses blocks into super-blocks: groups must partition [0, M).
// Position (gi, gj) is present iff some member pair is present in p.
BlockSparsityPattern coarsen_pattern(const BlockSparsityPattern& p,
                                     const std::vector<std::vector<index_t>>& groups);

bool pattern_is_subset(const BlockSparsityPattern& sub, const BlockSparsityPattern& sup);

}  // namespace ce
