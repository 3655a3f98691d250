#include "ce/partition.hpp"

#include <algorithm>
#include <stdexcept>

namespace ce {

BlockPartition BlockPartition::from_offsets(std::vector<index_t> offsets) {
  if (offsets.empty() || offsets.front() != 0)
    throw std::invalid_argument("partition offsets must start at 0");
  for (size_t k = 1; k < offsets.size(); ++k)
    if (offsets[k] <= offsets[k - 1])
      throw std::invalid_argument("partition offsets must be strictly increasing");
  BlockPartition p;
  p.offsets_ = std::move(offsets);
  return p;
}

BlockPartition BlockPartition::uniform(index_t n, index_t block) {
  if (n <= 0 || block <= 0)
    throw std::invalid_argument("uniform partition needs n > 0 and block > 0");
  std::vector<index_t> offs;
  offs.reserve(static_cast<size_t>(n / block) + 2);
  for (index_t o = 0; o < n; o += block) offs.push_back(o);
  offs.push_back(n);
  return from_offsets(std::move(offs));
}

BlockPartition BlockPartition::from_sizes(const std::vector<index_t>& sizes) {
  std::vector<index_t> offs;
  offs.reserve(sizes.size() + 1);
  offs.push_back(0);
  for (index_t s : sizes) offs.push_back(offs.back() + s);
  return from_offsets(std::move(offs));
}

index_t BlockPartition::max_block_size() const {
  index_t m = 0;
  for (index_t b = 0; b < block_count(); ++b) m = std::max(m, block_size(b));
  return m;
}

index_t BlockPartition::block_of(index_t i) const {
  if (i < 0 || i >= dim()) throw std::out_of_range("scalar index outside partition");
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), i);
  return static_cast<index_t>(it - offsets_.begin()) - 1;
}

}  // namespace ce
