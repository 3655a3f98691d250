#pragma once

#include <utility>
#include <vector>

#include "ce/block_matrix.hpp"
#include "ce/compression.hpp"
#include "ce/types.hpp"

namespace ce {

// Working state of one elimination level.
//
// The working matrix lives on the squared pattern of the input: every
// position fill can reach during this level's eliminations is allocated
// up front, zero-initialized.  Rows are processed in ascending block
// order; for each row, compress_row confines the row's fill to its
// leading `retained` rows, and eliminate_subrow pivots out the trailing
// rows, applying the Schur update to the retained sub-matrix.
//
// Factor blocks written before a destination block's own compression are
// rotated into that block's basis when the compression happens, so every
// stored block ends up expressed in the final per-block bases.
class LevelMatrix {
 public:
  LevelMatrix(const BlockSparseMatrix& a, int level_index);

  const BlockPartition& partition() const { return work_.partition(); }
  const BlockSparsityPattern& base_pattern() const { return base_pattern_; }
  const BlockSparsityPattern& work_pattern() const { return work_.pattern(); }
  BlockSparseMatrix& work() { return work_; }
  const BlockSparseMatrix& work() const { return work_; }

  // Fill positions of row i (squared minus base), ascending.
  const std::vector<index_t>& far_row(index_t i) const {
    return far_rows_[static_cast<size_t>(i)];
  }
  // Base positions of row i excluding the diagonal, ascending.
  const std::vector<index_t>& close_row(index_t i) const {
    return close_rows_[static_cast<size_t>(i)];
  }

  const RowCompression& compress_row(index_t i, const CompressionStrategy& strategy);

  struct RowFactor {
    index_t block = -1;
    index_t width = 0;
    // width x width lower-triangular Cholesky factor of the pivot.
    DenseBlock chol;
    // retained x width coupling into the row's own kept rows.
    DenseBlock coupling;
    // Full-height scaled subrow blocks, one per base neighbor, ascending.
    std::vector<std::pair<index_t, DenseBlock>> neighbors;
  };

  // Requires compress_row at i first unless the row has no fill columns.
  // `retained` must match the compression's decision.
  void eliminate_subrow(index_t i, index_t retained);

  const RowFactor& row_factor(index_t i) const;
  const RowCompression& row_compression(index_t i) const {
    return compressions_[static_cast<size_t>(i)];
  }
  index_t retained_of(index_t i) const { return retained_[static_cast<size_t>(i)]; }
  index_t rows_done() const { return cursor_; }
  index_t shift_retries() const { return shift_retries_; }

  struct Remainder {
    BlockSparseMatrix matrix;
    // Coarse pattern over all groups, before empty groups are dropped.
    BlockSparsityPattern full_pattern;
    // group index -> remainder block index, -1 for dropped groups.
    std::vector<index_t> alive;
  };

  // Assembles the kept sub-matrix merged into super-blocks.  All rows
  // must have been eliminated.  Groups must partition the level's blocks.
  Remainder extract_remainder(const std::vector<std::vector<index_t>>& groups) const;

  std::vector<RowFactor> take_row_factors() { return std::move(factors_); }
  std::vector<RowCompression> take_compressions() { return std::move(compressions_); }

 private:
  int level_index_;
  BlockSparsityPattern base_pattern_;
  BlockSparseMatrix work_;
  std::vector<std::vector<index_t>> far_rows_;
  std::vector<std::vector<index_t>> close_rows_;
  std::vector<RowCompression> compressions_;
  std::vector<char> compressed_;
  std::vector<index_t> retained_;
  std::vector<RowFactor> factors_;
  // Factor blocks awaiting the destination block's basis rotation:
  // pending_[t] lists (source row, slot in its neighbor list).
  std::vector<std::vector<std::pair<index_t, index_t>>> pending_;
  index_t cursor_ = 0;
  index_t shift_retries_ = 0;
};

}  // namespace ce
