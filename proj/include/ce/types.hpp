#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ce {

// Dense blocks are row-major so a block's memory layout matches the row-wise
// access done by the elimination kernels.
using DenseBlock =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using index_t = std::int64_t;

struct Triplet {
  index_t row = 0;
  index_t col = 0;
  double value = 0.0;
};

// Pivot failure during subrow elimination that survived the one-shot
// diagonal shift retry.  Carries enough context to name the offending block.
class BreakdownError : public std::runtime_error {
 public:
  BreakdownError(int level, index_t block, const std::string& what)
      : std::runtime_error(what), level_(level), block_(block) {}
  int level() const { return level_; }
  index_t block() const { return block_; }

 private:
  int level_;
  index_t block_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ce
