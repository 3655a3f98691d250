#pragma once

#include <span>
#include <vector>

#include "ce/partition.hpp"
#include "ce/pattern.hpp"
#include "ce/types.hpp"

namespace ce {

enum class MirrorMode {
  // Input carries both triangles; a numeric symmetry check is enforced.
  None,
  // Input carries one triangle; the transposed entries are generated.
  Lower,
};

// Symmetric matrix stored as dense blocks on a block sparsity pattern.
// Both (i, j) and (j, i) are stored so block rows can be streamed without
// transposition.  Mutation is only done single-threaded during assembly
// and elimination sweeps.
class BlockSparseMatrix {
 public:
  BlockSparseMatrix() = default;
  // Zero-initialized blocks on the given pattern.  The pattern must be
  // structurally symmetric with a full diagonal.
  BlockSparseMatrix(BlockPartition partition, BlockSparsityPattern pattern);

  // Assembles from scalar triplets; duplicates are summed.  With
  // MirrorMode::None the input must be numerically symmetric to
  // 1e-12 * max|a|, otherwise an exception names the worst offender.
  static BlockSparseMatrix from_triplets(std::span<const Triplet> entries,
                                         BlockPartition partition,
                                         MirrorMode mirror = MirrorMode::None);

  const BlockPartition& partition() const { return partition_; }
  const BlockSparsityPattern& pattern() const { return pattern_; }
  index_t dim() const { return partition_.dim(); }

  bool has_block(index_t i, index_t j) const { return pattern_.contains(i, j); }
  const DenseBlock& block(index_t i, index_t j) const;
  DenseBlock& block(index_t i, index_t j);

  Vector matvec(const Vector& x) const;

  // Scalar entries with a nonzero stored value.
  index_t scalar_nnz() const;
  index_t payload_bytes() const;

  // max |a_ij - a_ji| over stored blocks.
  double symmetry_error() const;

  Eigen::MatrixXd to_dense() const;

 private:
  index_t slot(index_t i, index_t j) const;

  BlockPartition partition_;
  BlockSparsityPattern pattern_;
  // blocks_[i][k] pairs with pattern_.row(i)[k].
  std::vector<std::vector<DenseBlock>> blocks_;
};

}  // namespace ce
