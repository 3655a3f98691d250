#pragma once

#include <vector>

#include "ce/block_matrix.hpp"
#include "ce/compression.hpp"
#include "ce/level_matrix.hpp"
#include "ce/problems.hpp"
#include "ce/types.hpp"

namespace ce {

// One completed elimination level.  `partition` is the block layout of
// the space this level entered with; `basis`/`retained` describe the
// per-block compressions; `rows` the per-block elimination factors in
// ascending block order; `groups` how kept rows merged into the next
// level's blocks.  The gather lists map transformed-space coordinates to
// the eliminated segment and the next level's space.
struct FactorLevel {
  BlockPartition partition;
  std::vector<DenseBlock> basis;  // empty block = identity
  std::vector<index_t> retained;
  std::vector<LevelMatrix::RowFactor> rows;
  std::vector<std::vector<index_t>> groups;
  std::vector<index_t> elim_gather;
  std::vector<index_t> kept_gather;
  // Eliminated-segment offset per block, parallel to rows.
  std::vector<index_t> elim_offset;

  index_t dim() const { return partition.dim(); }
  index_t eliminated() const { return static_cast<index_t>(elim_gather.size()); }
  index_t kept() const { return static_cast<index_t>(kept_gather.size()); }

  void apply_basis_transpose(Vector& v) const;
  void apply_basis(Vector& v) const;
};

struct LevelStats {
  int level = 0;
  index_t block_count = 0;
  // Lower-triangle block positions (diagonal included) of the level's
  // matrix pattern; the level stores twice that many factor blocks.
  index_t pattern_blocks = 0;
  index_t factor_blocks = 0;
  index_t eliminated = 0;
  index_t retained = 0;
  index_t max_rank = 0;
  double mean_rank = 0.0;
  double seconds = 0.0;
  index_t l_bytes = 0;
  index_t q_bytes = 0;
  index_t shift_retries = 0;
  std::vector<index_t> rank_histogram;
};

struct FactorStats {
  std::vector<LevelStats> levels;
  index_t tail_dim = 0;
  double tail_seconds = 0.0;
  index_t tail_bytes = 0;
  // Block-count accounting: sum of per-level factor blocks plus the
  // dense tail counted as tail_dim^2 / 2.
  double factor_blocks = 0.0;
  double predicted_factor_blocks = 0.0;
  std::vector<index_t> predicted_level_edges;
  index_t l_scalar_nnz = 0;
  index_t l_payload_bytes = 0;
  index_t q_payload_bytes = 0;
  double total_seconds = 0.0;

  index_t total_bytes() const { return l_payload_bytes + q_payload_bytes + tail_bytes; }
};

struct FactorOptions {
  index_t dense_threshold = 2048;
  index_t max_levels = 64;
};

// Approximate factorization A ~ Q^T L L^T Q assembled from elimination
// levels plus a dense Cholesky tail.
struct CEFactorization {
  index_t n = 0;
  std::vector<FactorLevel> levels;
  index_t tail_dim = 0;
  DenseBlock tail_chol;  // lower triangular, tail_dim x tail_dim
  FactorStats stats;

  // Direct application of the factorization as a solver:
  // x = Q^T L^-T L^-1 Q b.
  Vector solve(const Vector& b) const;
  // The orthogonal map onto [eliminated level 1 | ... | tail] coordinates.
  Vector apply_q(const Vector& x) const;
  Vector apply_q_transpose(const Vector& y) const;
  // The approximated operator itself: Q^T L L^T Q x.
  Vector apply_operator(const Vector& x) const;
  // Materializes apply_operator column by column.  Guarded to n <= 4096.
  Eigen::MatrixXd reconstruct_dense() const;

  // Structural checks: telescoping dimensions, orthogonal bases, lower
  // triangular pivots, ordered neighbor lists.  Throws on violation.
  void validate() const;
};

struct SweepResult {
  FactorLevel level;
  BlockSparseMatrix remainder;
  BlockSparsityPattern full_coarse_pattern;
  std::vector<index_t> alive;  // group -> remainder block, -1 dropped
  index_t shift_retries = 0;
};

// Runs one full level: compress and eliminate every block row in order,
// then extract the merged remainder.
SweepResult level_sweep(const BlockSparseMatrix& a, const CompressionStrategy& strategy,
                        const std::vector<std::vector<index_t>>& groups, int level_index);

// Multilevel driver.  Plan levels supply the merge groups; once the plan
// is exhausted blocks are paired `plan.join` at a time in index order.
// Stops when the remaining dimension is at most opts.dense_threshold (or
// a level makes no progress) and finishes with a dense Cholesky.
CEFactorization ce_factorize(const BlockSparseMatrix& a, const CoarseningPlan& plan,
                             const CompressionStrategy& strategy,
                             const FactorOptions& opts = {});

struct NnzPrediction {
  // Lower-triangle block counts of the level patterns produced by
  // symbolic squaring and coarsening.
  std::vector<index_t> level_edges;
  double tail_term = 0.0;
  double total = 0.0;  // sum of 2 * level_edges plus tail_term
};

// Symbolic factor-size prediction: iterates pattern_square and
// coarsen_pattern for `k_levels` levels and prices the dense tail at
// (last level blocks * rank)^2 / 2 (whole dimension when k_levels = 0).
NnzPrediction predicted_nnz(const BlockSparsityPattern& p, const CoarseningPlan& plan,
                            index_t k_levels, index_t rank, index_t block);

}  // namespace ce
