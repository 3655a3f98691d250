#pragma once

#include <vector>

#include "ce/types.hpp"

namespace ce {

// Contiguous partition of [0, N) into M blocks, stored as M+1 offsets.
// Offsets are strictly increasing: empty blocks are not representable.
class BlockPartition {
 public:
  BlockPartition() : offsets_{0} {}

  static BlockPartition from_offsets(std::vector<index_t> offsets);

  // Blocks of size `block`, trailing block smaller when block does not
  // divide n.
  static BlockPartition uniform(index_t n, index_t block);

  static BlockPartition from_sizes(const std::vector<index_t>& sizes);

  index_t block_count() const { return static_cast<index_t>(offsets_.size()) - 1; }
  index_t dim() const { return offsets_.back(); }
  index_t offset(index_t b) const { return offsets_[static_cast<size_t>(b)]; }
  index_t block_size(index_t b) const {
    return offsets_[static_cast<size_t>(b) + 1] - offsets_[static_cast<size_t>(b)];
  }
  index_t max_block_size() const;

  // Block containing scalar index i.
  index_t block_of(index_t i) const;

  const std::vector<index_t>& offsets() const { return offsets_; }

  bool operator==(const BlockPartition& o) const { return offsets_ == o.offsets_; }

 private:
  std::vector<index_t> offsets_;
};

}  // namespace ce
