#pragma once

#include <string>

#include "ce/types.hpp"

namespace ce {

// Rank selection for the per-row orthogonal compression.
//
// AdaptiveEps keeps the smallest rank r such that the first discarded
// singular value satisfies sigma_{r+1} <= eps * sigma_1 (or <= eps with
// `absolute`).  FixedRank always keeps min(rank, block size) rows when the
// row has fill columns and eliminates the whole block otherwise.
struct CompressionStrategy {
  enum class Mode { AdaptiveEps, FixedRank };

  Mode mode = Mode::AdaptiveEps;
  double eps = 1e-6;
  bool absolute = false;
  index_t rank = 0;

  static CompressionStrategy adaptive(double eps, bool absolute = false) {
    CompressionStrategy s;
    s.mode = Mode::AdaptiveEps;
    s.eps = eps;
    s.absolute = absolute;
    return s;
  }
  static CompressionStrategy fixed_rank(index_t rank) {
    CompressionStrategy s;
    s.mode = Mode::FixedRank;
    s.rank = rank;
    return s;
  }

  std::string describe() const;
};

struct RowCompression {
  // Orthogonal block_size x block_size basis; empty means identity.
  DenseBlock basis;
  index_t retained = 0;
};

// f is the row's fill concatenation (block_size x total fill columns).
// The returned basis rotates the row so that rows >= retained of
// basis^T * f are discardable under the strategy's rule.
RowCompression compress_far_concat(const DenseBlock& f, index_t block_size,
                                   const CompressionStrategy& strategy);

}  // namespace ce
