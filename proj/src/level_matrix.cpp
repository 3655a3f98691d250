#include "ce/level_matrix.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace ce {

LevelMatrix::LevelMatrix(const BlockSparseMatrix& a, int level_index)
    : level_index_(level_index),
      base_pattern_(a.pattern()),
      work_(a.partition(), pattern_square(a.pattern())) {
  const index_t m = partition().block_count();
  far_rows_.resize(static_cast<size_t>(m));
  close_rows_.resize(static_cast<size_t>(m));
  compressions_.resize(static_cast<size_t>(m));
  compressed_.assign(static_cast<size_t>(m), 0);
  retained_.assign(static_cast<size_t>(m), -1);
  factors_.resize(static_cast<size_t>(m));
  pending_.resize(static_cast<size_t>(m));
  for (index_t i = 0; i < m; ++i) {
    for (index_t j : base_pattern_.row(i)) {
      work_.block(i, j) = a.block(i, j);
      if (j != i) close_rows_[static_cast<size_t>(i)].push_back(j);
    }
    for (index_t j : work_.pattern().row(i))
      if (j != i && !base_pattern_.contains(i, j))
        far_rows_[static_cast<size_t>(i)].push_back(j);
  }
}

const RowCompression& LevelMatrix::compress_row(index_t i, const CompressionStrategy& strategy) {
  if (i != cursor_ || compressed_[static_cast<size_t>(i)])
    throw std::logic_error("rows must be compressed once, in ascending order");
  const index_t bs = partition().block_size(i);
  const auto& far = far_rows_[static_cast<size_t>(i)];

  index_t total = 0;
  for (index_t j : far) total += partition().block_size(j);
  DenseBlock f(bs, total);
  index_t at = 0;
  for (index_t j : far) {
    const index_t w = partition().block_size(j);
    f.middleCols(at, w) = work_.block(i, j);
    at += w;
  }

  RowCompression comp = compress_far_concat(f, bs, strategy);
  const index_t r = comp.retained;
  if (comp.basis.size() != 0) {
    const DenseBlock& u = comp.basis;
    DenseBlock d = u.transpose() * work_.block(i, i) * u;
    work_.block(i, i) = 0.5 * (d + DenseBlock(d.transpose()));
    for (index_t j : close_rows_[static_cast<size_t>(i)]) {
      DenseBlock t = u.transpose() * work_.block(i, j);
      work_.block(i, j) = t;
      work_.block(j, i) = t.transpose();
    }
    for (index_t j : far) {
      DenseBlock t = u.transpose() * work_.block(i, j);
      if (r < bs) t.bottomRows(bs - r).setZero();
      work_.block(i, j) = t;
      work_.block(j, i) = t.transpose();
    }
    for (auto [src, slot] : pending_[static_cast<size_t>(i)]) {
      DenseBlock& g = factors_[static_cast<size_t>(src)].neighbors[static_cast<size_t>(slot)].second;
      g = u.transpose() * g;
    }
  } else if (r < bs) {
    // Identity basis: discard the trailing rows of the fill directly.
    for (index_t j : far) {
      work_.block(i, j).bottomRows(bs - r).setZero();
      work_.block(j, i).rightCols(bs - r).setZero();
    }
  }
  pending_[static_cast<size_t>(i)].clear();
  compressed_[static_cast<size_t>(i)] = 1;
  retained_[static_cast<size_t>(i)] = r;
  compressions_[static_cast<size_t>(i)] = std::move(comp);
  return compressions_[static_cast<size_t>(i)];
}

void LevelMatrix::eliminate_subrow(index_t i, index_t retained) {
  if (i != cursor_) throw std::logic_error("rows must be eliminated in ascending order");
  const index_t bs = partition().block_size(i);
  if (retained < 0 || retained > bs) throw std::invalid_argument("retained rank out of range");
  if (compressed_[static_cast<size_t>(i)]) {
    if (retained != retained_[static_cast<size_t>(i)])
      throw std::logic_error("retained rank disagrees with the row's compression");
  } else {
    if (!far_rows_[static_cast<size_t>(i)].empty())
      throw std::logic_error("row with fill columns must be compressed before elimination");
    retained_[static_cast<size_t>(i)] = retained;
    compressions_[static_cast<size_t>(i)].retained = retained;
  }

  RowFactor& rf = factors_[static_cast<size_t>(i)];
  rf.block = i;
  rf.width = bs - retained;
  const index_t w = rf.width;
  const index_t r = retained;
  if (w == 0) {
    ++cursor_;
    return;
  }

  DenseBlock& d = work_.block(i, i);
  DenseBlock pivot = d.bottomRightCorner(w, w);
  Eigen::LLT<DenseBlock> llt(pivot);
  if (llt.info() != Eigen::Success) {
    const double shift = 1e-12 * pivot.trace() / static_cast<double>(w);
    DenseBlock shifted = pivot + shift * DenseBlock::Identity(w, w);
    llt.compute(shifted);
    if (llt.info() != Eigen::Success) {
      std::ostringstream os;
      os << "elimination breakdown at level " << level_index_ << ", block " << i
         << ": trailing pivot not positive definite after shift " << shift;
      throw BreakdownError(level_index_, i, os.str());
    }
    ++shift_retries_;
  }
  rf.chol = llt.matrixL();
  const auto lower = rf.chol.triangularView<Eigen::Lower>();

  // coupling = (pivot-scaled subrow)^T restricted to the row's kept rows.
  DenseBlock y = d.bottomLeftCorner(w, r);
  lower.solveInPlace(y);
  rf.coupling = y.transpose();

  const auto& close = close_rows_[static_cast<size_t>(i)];
  rf.neighbors.reserve(close.size());
  for (index_t t : close) {
    DenseBlock yt = work_.block(i, t).bottomRows(w);
    lower.solveInPlace(yt);
    rf.neighbors.emplace_back(t, DenseBlock(yt.transpose()));
  }

  // Schur update of the retained sub-matrix.
  if (r > 0) {
    d.topLeftCorner(r, r).noalias() -= rf.coupling * rf.coupling.transpose();
    for (const auto& [t, gt] : rf.neighbors) {
      DenseBlock upd = rf.coupling * gt.transpose();
      work_.block(i, t).topRows(r) -= upd;
      work_.block(t, i).leftCols(r) -= upd.transpose();
    }
  }
  for (size_t ks = 0; ks < rf.neighbors.size(); ++ks) {
    const auto& [s, gs] = rf.neighbors[ks];
    for (size_t kt = ks; kt < rf.neighbors.size(); ++kt) {
      const auto& [t, gt] = rf.neighbors[kt];
      if (!work_.has_block(s, t)) {
        std::ostringstream os;
        os << "update outside the squared pattern at level " << level_index_
           << ": blocks (" << s << ", " << t << ") from pivot " << i;
        throw std::logic_error(os.str());
      }
      DenseBlock upd = gs * gt.transpose();
      work_.block(s, t) -= upd;
      if (s != t) work_.block(t, s) -= upd.transpose();
    }
  }

  // The eliminated rows and columns leave the level.
  d.bottomRows(w).setZero();
  d.rightCols(w).setZero();
  for (index_t j : work_.pattern().row(i)) {
    if (j == i) continue;
    work_.block(i, j).bottomRows(w).setZero();
    work_.block(j, i).rightCols(w).setZero();
  }

  for (size_t k = 0; k < rf.neighbors.size(); ++k) {
    const index_t t = rf.neighbors[k].first;
    if (t > i) pending_[static_cast<size_t>(t)].emplace_back(i, static_cast<index_t>(k));
  }
  ++cursor_;
}

const LevelMatrix::RowFactor& LevelMatrix::row_factor(index_t i) const {
  if (i >= cursor_) throw std::logic_error("row not eliminated yet");
  return factors_[static_cast<size_t>(i)];
}

LevelMatrix::Remainder LevelMatrix::extract_remainder(
    const std::vector<std::vector<index_t>>& groups) const {
  const index_t m = partition().block_count();
  if (cursor_ != m) throw std::logic_error("all rows must be eliminated first");

  Remainder rem;
  rem.full_pattern = coarsen_pattern(work_.pattern(), groups);

  std::vector<index_t> group_size(groups.size(), 0);
  for (size_t g = 0; g < groups.size(); ++g)
    for (index_t b : groups[g]) group_size[g] += retained_[static_cast<size_t>(b)];

  rem.alive.assign(groups.size(), -1);
  std::vector<index_t> sizes;
  for (size_t g = 0; g < groups.size(); ++g) {
    if (group_size[g] > 0) {
      rem.alive[g] = static_cast<index_t>(sizes.size());
      sizes.push_back(group_size[g]);
    }
  }
  if (sizes.empty()) {
    rem.matrix = BlockSparseMatrix();
    return rem;
  }

  BlockSparsityPattern pat(static_cast<index_t>(sizes.size()));
  for (index_t g = 0; g < rem.full_pattern.block_rows(); ++g) {
    if (rem.alive[static_cast<size_t>(g)] < 0) continue;
    for (index_t h : rem.full_pattern.row(g))
      if (rem.alive[static_cast<size_t>(h)] >= 0)
        pat.insert(rem.alive[static_cast<size_t>(g)], rem.alive[static_cast<size_t>(h)]);
  }
  rem.matrix = BlockSparseMatrix(BlockPartition::from_sizes(sizes), std::move(pat));

  // Member offsets inside each super-block.
  std::vector<index_t> local_offset(static_cast<size_t>(m), 0);
  for (const auto& group : groups) {
    index_t at = 0;
    for (index_t b : group) {
      local_offset[static_cast<size_t>(b)] = at;
      at += retained_[static_cast<size_t>(b)];
    }
  }
  for (size_t ga = 0; ga < groups.size(); ++ga) {
    const index_t ba = rem.alive[ga];
    if (ba < 0) continue;
    for (index_t gb : rem.full_pattern.row(static_cast<index_t>(ga))) {
      const index_t bb = rem.alive[static_cast<size_t>(gb)];
      if (bb < 0) continue;
      DenseBlock& dst = rem.matrix.block(ba, bb);
      for (index_t s : groups[ga]) {
        const index_t rs = retained_[static_cast<size_t>(s)];
        if (rs == 0) continue;
        for (index_t t : groups[static_cast<size_t>(gb)]) {
          const index_t rt = retained_[static_cast<size_t>(t)];
          if (rt == 0 || !work_.has_block(s, t)) continue;
          dst.block(local_offset[static_cast<size_t>(s)], local_offset[static_cast<size_t>(t)],
                    rs, rt) = work_.block(s, t).topLeftCorner(rs, rt);
        }
      }
    }
  }
  return rem;
}

}  // namespace ce
