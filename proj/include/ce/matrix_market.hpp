#pragma once

#include <string>
#include <vector>

#include "ce/block_matrix.hpp"
#include "ce/types.hpp"

namespace ce {

struct CoordinateData {
  index_t rows = 0;
  index_t cols = 0;
  // Both triangles materialized; symmetric files are mirrored on read.
  std::vector<Triplet> entries;
};

// Reads "matrix coordinate real general|symmetric".  1-based indices in
// the file, 0-based in memory.
CoordinateData read_matrix_market(const std::string& path);

// Writes "matrix coordinate real symmetric": lower triangle including the
// diagonal, 1-based, values with 17 significant digits.  Only stored
// nonzero values are emitted.
void write_matrix_market(const BlockSparseMatrix& a, const std::string& path);

std::vector<double> read_vector(const std::string& path);
void write_vector(const std::vector<double>& v, const std::string& path);

}  // namespace ce
