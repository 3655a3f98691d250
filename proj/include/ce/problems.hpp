#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "ce/partition.hpp"
#include "ce/types.hpp"

namespace ce {

// Interior points of the unit cube, Dirichlet boundary.  nx points along
// x with spacing hx = 1/(nx+1).
struct Grid3D {
  index_t nx = 0;
  index_t ny = 0;
  index_t nz = 0;

  index_t dim() const { return nx * ny * nz; }
  double hx() const { return 1.0 / static_cast<double>(nx + 1); }
  double hy() const { return 1.0 / static_cast<double>(ny + 1); }
  double hz() const { return 1.0 / static_cast<double>(nz + 1); }
  // Lexicographic scalar index, x fastest.
  index_t point(index_t i, index_t j, index_t k) const { return i + nx * (j + ny * k); }
};

// Diagonal of the diffusion tensor at a point.
using DiffusionCoeff = std::function<std::array<double, 3>(double, double, double)>;

DiffusionCoeff default_diffusion_coefficient();

struct AssembledSystem {
  index_t dim = 0;
  std::vector<Triplet> entries;
  std::vector<double> rhs;
};

// 7-point finite differences for -div(k grad u) = f with f = 1 and
// k = diag(k1, k2, k3) sampled at face midpoints.  Rows and the right
// hand side are scaled by min(hx, hy, hz)^2 so entries stay O(1).
AssembledSystem assemble_diffusion_3d(const Grid3D& grid,
                                      const DiffusionCoeff& coeff = default_diffusion_coefficient());

// 9-point stencil on an n x n interior grid: 8/3 on the diagonal, -1/3 on
// all eight neighbors.  rhs is all ones.
AssembledSystem assemble_laplace_2d_9pt(index_t n);

// Recipe for a multilevel elimination: a reordering of the unknowns into
// geometric blocks plus, per level, the merge of blocks into super-blocks.
struct CoarseningPlan {
  // perm[new] = old scalar index.
  std::vector<index_t> initial_permutation;
  BlockPartition partition;
  index_t join = 2;
  // levels[l][g] lists the level-l blocks merged into super-block g.
  std::vector<std::vector<std::vector<index_t>>> levels;

  void validate() const;
  void save(const std::string& path) const;
  static CoarseningPlan load(const std::string& path);

  // Identity ordering with uniform blocks and no precomputed levels.
  static CoarseningPlan trivial(index_t n, index_t block);
};

// Orders grid points into axis-aligned cells of at most `block` points
// (near-cubic cells, x exponent largest) and pairs cells along cyclically
// alternating non-exhausted axes, `join` cells per super-block.
CoarseningPlan geometric_block_ordering(const Grid3D& grid, index_t block, index_t join = 2);

// a'(p, q) = a(perm[p], perm[q]).
std::vector<Triplet> apply_permutation(const std::vector<Triplet>& entries,
                                       const std::vector<index_t>& perm);
// out[p] = v[perm[p]].
std::vector<double> permute_vector(const std::vector<double>& v,
                                   const std::vector<index_t>& perm);
// out[perm[p]] = v[p].
std::vector<double> unpermute_vector(const std::vector<double>& v,
                                     const std::vector<index_t>& perm);

}  // namespace ce
