#include "ce/problems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ce {

DiffusionCoeff default_diffusion_coefficient() {
  return [](double x, double y, double z) {
    return std::array<double, 3>{x * x + 0.5, y * y + 0.5, z * z + 0.5};
  };
}

AssembledSystem assemble_diffusion_3d(const Grid3D& grid, const DiffusionCoeff& coeff) {
  if (grid.nx <= 0 || grid.ny <= 0 || grid.nz <= 0)
    throw std::invalid_argument("grid dimensions must be positive");
  const double h[3] = {grid.hx(), grid.hy(), grid.hz()};
  const double hmin = std::min({h[0], h[1], h[2]});
  const double scale = hmin * hmin;

  AssembledSystem sys;
  sys.dim = grid.dim();
  sys.entries.reserve(static_cast<size_t>(7 * sys.dim));
  sys.rhs.assign(static_cast<size_t>(sys.dim), scale);

  const index_t n[3] = {grid.nx, grid.ny, grid.nz};
  for (index_t k = 0; k < grid.nz; ++k) {
    for (index_t j = 0; j < grid.ny; ++j) {
      for (index_t i = 0; i < grid.nx; ++i) {
        const index_t p = grid.point(i, j, k);
        const double x[3] = {(i + 1) * h[0], (j + 1) * h[1], (k + 1) * h[2]};
        double diag = 0.0;
        const index_t idx[3] = {i, j, k};
        for (int a = 0; a < 3; ++a) {
          double face[3] = {x[0], x[1], x[2]};
          face[a] = x[a] - 0.5 * h[a];
          const double k_lo = coeff(face[0], face[1], face[2])[static_cast<size_t>(a)];
          face[a] = x[a] + 0.5 * h[a];
          const double k_hi = coeff(face[0], face[1], face[2])[static_cast<size_t>(a)];
          const double w = scale / (h[a] * h[a]);
          diag += w * (k_lo + k_hi);
          index_t nb[3] = {i, j, k};
          if (idx[a] > 0) {
            nb[a] = idx[a] - 1;
            sys.entries.push_back({p, grid.point(nb[0], nb[1], nb[2]), -w * k_lo});
          }
          if (idx[a] + 1 < n[a]) {
            nb[a] = idx[a] + 1;
            sys.entries.push_back({p, grid.point(nb[0], nb[1], nb[2]), -w * k_hi});
          }
        }
        sys.entries.push_back({p, p, diag});
      }
    }
  }
  return sys;
}

AssembledSystem assemble_laplace_2d_9pt(index_t n) {
  if (n <= 0) throw std::invalid_argument("grid dimension must be positive");
  AssembledSystem sys;
  sys.dim = n * n;
  sys.rhs.assign(static_cast<size_t>(sys.dim), 1.0);
  for (index_t j = 0; j < n; ++j) {
    for (index_t i = 0; i < n; ++i) {
      const index_t p = i + n * j;
      sys.entries.push_back({p, p, 8.0 / 3.0});
      for (index_t dj = -1; dj <= 1; ++dj) {
        for (index_t di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0) continue;
          const index_t ii = i + di, jj = j + dj;
          if (ii < 0 || ii >= n || jj < 0 || jj >= n) continue;
          sys.entries.push_back({p, ii + n * jj, -1.0 / 3.0});
        }
      }
    }
  }
  return sys;
}

void CoarseningPlan::validate() const {
  const index_t n = partition.dim();
  if (static_cast<index_t>(initial_permutation.size()) != n)
    throw std::invalid_argument("permutation length does not match partition");
  std::vector<char> seen(static_cast<size_t>(n), 0);
  for (index_t p : initial_permutation) {
    if (p < 0 || p >= n || seen[static_cast<size_t>(p)])
      throw std::invalid_argument("initial permutation is not a bijection");
    seen[static_cast<size_t>(p)] = 1;
  }
  index_t blocks = partition.block_count();
  for (size_t l = 0; l < levels.size(); ++l) {
    std::vector<char> used(static_cast<size_t>(blocks), 0);
    index_t covered = 0;
    for (const auto& g : levels[l]) {
      if (g.empty()) throw std::invalid_argument("empty group in coarsening level");
      for (index_t b : g) {
        if (b < 0 || b >= blocks || used[static_cast<size_t>(b)])
          throw std::invalid_argument("groups must partition the level's blocks");
        used[static_cast<size_t>(b)] = 1;
        ++covered;
      }
    }
    if (covered != blocks)
      throw std::invalid_argument("groups must cover the level's blocks");
    blocks = static_cast<index_t>(levels[l].size());
  }
}

void CoarseningPlan::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  const index_t n = partition.dim();
  const index_t m = partition.block_count();
  out << n << " " << m << " " << levels.size() << " " << join << "\n";
  for (index_t i = 0; i < n; ++i)
    out << initial_permutation[static_cast<size_t>(i)] << (i + 1 == n ? "\n" : " ");
  for (index_t i = 0; i <= m; ++i)
    out << partition.offsets()[static_cast<size_t>(i)] << (i == m ? "\n" : " ");
  for (const auto& level : levels) {
    // Emitted as block -> group assignment.
    index_t blocks = 0;
    for (const auto& g : level) blocks += static_cast<index_t>(g.size());
    std::vector<index_t> assign(static_cast<size_t>(blocks), -1);
    for (size_t g = 0; g < level.size(); ++g)
      for (index_t b : level[g]) assign[static_cast<size_t>(b)] = static_cast<index_t>(g);
    for (index_t b = 0; b < blocks; ++b)
      out << assign[static_cast<size_t>(b)] << (b + 1 == blocks ? "\n" : " ");
  }
  if (!out) throw IoError("write failed for " + path);
}

CoarseningPlan CoarseningPlan::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  index_t n = 0, m = 0, k = 0, j = 0;
  if (!(in >> n >> m >> k >> j)) throw IoError(path + ": bad plan header");
  CoarseningPlan plan;
  plan.join = j;
  plan.initial_permutation.resize(static_cast<size_t>(n));
  for (auto& p : plan.initial_permutation)
    if (!(in >> p)) throw IoError(path + ": truncated permutation");
  std::vector<index_t> offsets(static_cast<size_t>(m) + 1);
  for (auto& o : offsets)
    if (!(in >> o)) throw IoError(path + ": truncated offsets");
  plan.partition = BlockPartition::from_offsets(std::move(offsets));
  index_t blocks = m;
  plan.levels.resize(static_cast<size_t>(k));
  for (index_t l = 0; l < k; ++l) {
    std::vector<index_t> assign(static_cast<size_t>(blocks));
    index_t groups = 0;
    for (auto& a : assign) {
      if (!(in >> a)) throw IoError(path + ": truncated level assignments");
      groups = std::max(groups, a + 1);
    }
    auto& level = plan.levels[static_cast<size_t>(l)];
    level.assign(static_cast<size_t>(groups), {});
    for (index_t b = 0; b < blocks; ++b) {
      const index_t g = assign[static_cast<size_t>(b)];
      if (g < 0) throw IoError(path + ": negative group id");
      level[static_cast<size_t>(g)].push_back(b);
    }
    blocks = groups;
  }
  plan.validate();
  return plan;
}

CoarseningPlan CoarseningPlan::trivial(index_t n, index_t block) {
  CoarseningPlan plan;
  plan.partition = BlockPartition::uniform(n, block);
  plan.initial_permutation.resize(static_cast<size_t>(n));
  std::iota(plan.initial_permutation.begin(), plan.initial_permutation.end(), index_t{0});
  return plan;
}

namespace {

// Near-cubic cell shape with 2^bx * 2^by * 2^bz = 2^b, bx >= by >= bz.
std::array<index_t, 3> cell_shape(index_t block) {
  index_t b = 0;
  while ((index_t{1} << (b + 1)) <= block) ++b;
  if ((index_t{1} << b) != block)
    throw std::invalid_argument("block size must be a power of two");
  const index_t bx = (b + 2) / 3, by = (b + 1) / 3, bz = b / 3;
  return {index_t{1} << bx, index_t{1} << by, index_t{1} << bz};
}

}  // namespace

CoarseningPlan geometric_block_ordering(const Grid3D& grid, index_t block, index_t join) {
  if (join < 2) throw std::invalid_argument("join must be at least 2");
  const auto shape = cell_shape(block);
  const index_t nc[3] = {(grid.nx + shape[0] - 1) / shape[0],
                         (grid.ny + shape[1] - 1) / shape[1],
                         (grid.nz + shape[2] - 1) / shape[2]};

  CoarseningPlan plan;
  plan.join = join;
  plan.initial_permutation.reserve(static_cast<size_t>(grid.dim()));
  std::vector<index_t> sizes;
  sizes.reserve(static_cast<size_t>(nc[0] * nc[1] * nc[2]));
  for (index_t cz = 0; cz < nc[2]; ++cz) {
    for (index_t cy = 0; cy < nc[1]; ++cy) {
      for (index_t cx = 0; cx < nc[0]; ++cx) {
        const index_t x0 = cx * shape[0], y0 = cy * shape[1], z0 = cz * shape[2];
        const index_t x1 = std::min(x0 + shape[0], grid.nx);
        const index_t y1 = std::min(y0 + shape[1], grid.ny);
        const index_t z1 = std::min(z0 + shape[2], grid.nz);
        for (index_t k = z0; k < z1; ++k)
          for (index_t j = y0; j < y1; ++j)
            for (index_t i = x0; i < x1; ++i)
              plan.initial_permutation.push_back(grid.point(i, j, k));
        sizes.push_back((x1 - x0) * (y1 - y0) * (z1 - z0));
      }
    }
  }
  plan.partition = BlockPartition::from_sizes(sizes);

  // Merge cells `join` at a time along cyclically alternating axes,
  // skipping axes already reduced to one cell.
  index_t cur[3] = {nc[0], nc[1], nc[2]};
  int axis = 0;
  while (cur[0] * cur[1] * cur[2] > 1) {
    int tries = 0;
    while (cur[axis] == 1 && tries < 3) {
      axis = (axis + 1) % 3;
      ++tries;
    }
    const index_t next_axis_count = (cur[axis] + join - 1) / join;
    index_t next[3] = {cur[0], cur[1], cur[2]};
    next[axis] = next_axis_count;
    std::vector<std::vector<index_t>> groups(
        static_cast<size_t>(next[0] * next[1] * next[2]));
    for (index_t cz = 0; cz < cur[2]; ++cz) {
      for (index_t cy = 0; cy < cur[1]; ++cy) {
        for (index_t cx = 0; cx < cur[0]; ++cx) {
          index_t gc[3] = {cx, cy, cz};
          gc[axis] /= join;
          const index_t from = cx + cur[0] * (cy + cur[1] * cz);
          const index_t to = gc[0] + next[0] * (gc[1] + next[1] * gc[2]);
          groups[static_cast<size_t>(to)].push_back(from);
        }
      }
    }
    plan.levels.push_back(std::move(groups));
    cur[0] = next[0];
    cur[1] = next[1];
    cur[2] = next[2];
    axis = (axis + 1) % 3;
  }
  plan.validate();
  return plan;
}

std::vector<Triplet> apply_permutation(const std::vector<Triplet>& entries,
                                       const std::vector<index_t>& perm) {
  std::vector<index_t> inv(perm.size());
  for (size_t p = 0; p < perm.size(); ++p) inv[static_cast<size_t>(perm[p])] = static_cast<index_t>(p);
  std::vector<Triplet> out;
  out.reserve(entries.size());
  for (const Triplet& t : entries)
    out.push_back({inv[static_cast<size_t>(t.row)], inv[static_cast<size_t>(t.col)], t.value});
  return out;
}

std::vector<double> permute_vector(const std::vector<double>& v,
                                   const std::vector<index_t>& perm) {
  std::vector<double> out(v.size());
  for (size_t p = 0; p < perm.size(); ++p) out[p] = v[static_cast<size_t>(perm[p])];
  return out;
}

std::vector<double> unpermute_vector(const std::vector<double>& v,
                                     const std::vector<index_t>& perm) {
  std::vector<double> out(v.size());
  for (size_t p = 0; p < perm.size(); ++p) out[static_cast<size_t>(perm[p])] = v[p];
  return out;
}

}  // namespace ce
