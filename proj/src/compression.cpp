#include "ce/compression.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace ce {

std::string CompressionStrategy::describe() const {
  std::ostringstream os;
  if (mode == Mode::FixedRank) {
    os << "rank=" << rank;
  } else {
    os << (absolute ? "abseps=" : "eps=") << eps;
  }
  return os.str();
}

RowCompression compress_far_concat(const DenseBlock& f, index_t block_size,
                                   const CompressionStrategy& strategy) {
  if (strategy.mode == CompressionStrategy::Mode::FixedRank && strategy.rank < 0)
    throw std::invalid_argument("fixed rank must be nonnegative");

  RowCompression out;
  if (f.cols() == 0) {
    // No fill columns: nothing to protect, the whole block is eliminable.
    out.retained = 0;
    return out;
  }
  if (f.rows() != block_size)
    throw std::invalid_argument("fill concatenation height must equal block size");

  const bool zero_fill = (f.cwiseAbs().maxCoeff() == 0.0);
  if (strategy.mode == CompressionStrategy::Mode::FixedRank) {
    out.retained = std::min(strategy.rank, block_size);
    if (!zero_fill && out.retained < block_size) {
      Eigen::JacobiSVD<DenseBlock> svd(f, Eigen::ComputeFullU);
      out.basis = svd.matrixU();
    }
    return out;
  }

  if (zero_fill) {
    out.retained = 0;
    return out;
  }
  Eigen::JacobiSVD<DenseBlock> svd(f, Eigen::ComputeFullU);
  const auto& sigma = svd.singularValues();
  const double threshold = strategy.absolute ? strategy.eps : strategy.eps * sigma(0);
  index_t r = sigma.size();
  for (index_t k = 0; k < sigma.size(); ++k) {
    if (sigma(k) <= threshold) {
      r = k;
      break;
    }
  }
  out.retained = std::min(r, block_size);
  if (out.retained < block_size) out.basis = svd.matrixU();
  return out;
}

}  // namespace ce
