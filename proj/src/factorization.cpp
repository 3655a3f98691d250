#include "ce/factorization.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <chrono>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ce {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::vector<index_t>> pair_groups(index_t blocks, index_t join) {
  std::vector<std::vector<index_t>> groups;
  for (index_t b = 0; b < blocks; b += join) {
    std::vector<index_t> g;
    for (index_t k = b; k < std::min(b + join, blocks); ++k) g.push_back(k);
    groups.push_back(std::move(g));
  }
  return groups;
}

index_t payload_bytes_of(const DenseBlock& b) {
  return static_cast<index_t>(b.size()) * static_cast<index_t>(sizeof(double));
}

}  // namespace

void FactorLevel::apply_basis_transpose(Vector& v) const {
  for (index_t b = 0; b < partition.block_count(); ++b) {
    const DenseBlock& u = basis[static_cast<size_t>(b)];
    if (u.size() == 0) continue;
    auto seg = v.segment(partition.offset(b), partition.block_size(b));
    seg = u.transpose() * Vector(seg);
  }
}

void FactorLevel::apply_basis(Vector& v) const {
  for (index_t b = 0; b < partition.block_count(); ++b) {
    const DenseBlock& u = basis[static_cast<size_t>(b)];
    if (u.size() == 0) continue;
    auto seg = v.segment(partition.offset(b), partition.block_size(b));
    seg = u * Vector(seg);
  }
}

SweepResult level_sweep(const BlockSparseMatrix& a, const CompressionStrategy& strategy,
                        const std::vector<std::vector<index_t>>& groups, int level_index) {
  LevelMatrix lm(a, level_index);
  const index_t m = a.partition().block_count();
  for (index_t i = 0; i < m; ++i) {
    lm.compress_row(i, strategy);
    lm.eliminate_subrow(i, lm.retained_of(i));
  }
  auto rem = lm.extract_remainder(groups);

  SweepResult out;
  out.shift_retries = lm.shift_retries();
  FactorLevel& fl = out.level;
  fl.partition = a.partition();
  fl.groups = groups;
  fl.retained.resize(static_cast<size_t>(m));
  fl.basis.resize(static_cast<size_t>(m));
  auto comps = lm.take_compressions();
  for (index_t b = 0; b < m; ++b) {
    fl.retained[static_cast<size_t>(b)] = comps[static_cast<size_t>(b)].retained;
    fl.basis[static_cast<size_t>(b)] = std::move(comps[static_cast<size_t>(b)].basis);
  }
  fl.rows = lm.take_row_factors();

  fl.elim_offset.resize(static_cast<size_t>(m));
  for (index_t b = 0; b < m; ++b) {
    fl.elim_offset[static_cast<size_t>(b)] = static_cast<index_t>(fl.elim_gather.size());
    for (index_t rr = fl.retained[static_cast<size_t>(b)]; rr < fl.partition.block_size(b); ++rr)
      fl.elim_gather.push_back(fl.partition.offset(b) + rr);
  }
  for (const auto& group : groups)
    for (index_t b : group)
      for (index_t rr = 0; rr < fl.retained[static_cast<size_t>(b)]; ++rr)
        fl.kept_gather.push_back(fl.partition.offset(b) + rr);

  out.remainder = std::move(rem.matrix);
  out.full_coarse_pattern = std::move(rem.full_pattern);
  out.alive = std::move(rem.alive);
  return out;
}

namespace {

// Forward pass of one level, in place: on return v holds the pivot-solved
// eliminated values in the e-coordinates and the reduced right hand side
// in the kept coordinates.
void level_forward(const FactorLevel& fl, Vector& v) {
  for (const auto& rf : fl.rows) {
    if (rf.width == 0) continue;
    const index_t b = rf.block;
    const index_t off = fl.partition.offset(b);
    const index_t r = fl.retained[static_cast<size_t>(b)];
    Vector u = v.segment(off + r, rf.width);
    rf.chol.triangularView<Eigen::Lower>().solveInPlace(u);
    if (r > 0) v.segment(off, r).noalias() -= rf.coupling * u;
    for (const auto& [t, g] : rf.neighbors)
      v.segment(fl.partition.offset(t), fl.partition.block_size(t)).noalias() -= g * u;
    v.segment(off + r, rf.width) = u;
  }
}

// Backward pass: v enters with final values in the kept coordinates and
// the forward pass's pivot-solved values in the e-coordinates.
void level_backward(const FactorLevel& fl, Vector& v) {
  for (auto it = fl.rows.rbegin(); it != fl.rows.rend(); ++it) {
    const auto& rf = *it;
    if (rf.width == 0) continue;
    const index_t b = rf.block;
    const index_t off = fl.partition.offset(b);
    const index_t r = fl.retained[static_cast<size_t>(b)];
    Vector s = v.segment(off + r, rf.width);
    if (r > 0) s.noalias() -= rf.coupling.transpose() * v.segment(off, r);
    for (const auto& [t, g] : rf.neighbors)
      s.noalias() -= g.transpose() *
                     Vector(v.segment(fl.partition.offset(t), fl.partition.block_size(t)));
    rf.chol.triangularView<Eigen::Lower>().transpose().solveInPlace(s);
    v.segment(off + r, rf.width) = s;
  }
}

Vector gather(const Vector& v, const std::vector<index_t>& idx) {
  Vector out(static_cast<index_t>(idx.size()));
  for (size_t k = 0; k < idx.size(); ++k) out[static_cast<index_t>(k)] = v[idx[k]];
  return out;
}

}  // namespace

Vector CEFactorization::solve(const Vector& b) const {
  if (b.size() != n) throw std::invalid_argument("solve dimension mismatch");
  std::vector<Vector> elim_vals(levels.size());
  Vector active = b;
  for (size_t l = 0; l < levels.size(); ++l) {
    const FactorLevel& fl = levels[l];
    Vector v = active;
    fl.apply_basis_transpose(v);
    level_forward(fl, v);
    elim_vals[l] = gather(v, fl.elim_gather);
    active = gather(v, fl.kept_gather);
  }
  if (tail_dim > 0) {
    tail_chol.triangularView<Eigen::Lower>().solveInPlace(active);
    tail_chol.triangularView<Eigen::Lower>().transpose().solveInPlace(active);
  }
  for (size_t l = levels.size(); l-- > 0;) {
    const FactorLevel& fl = levels[l];
    Vector v = Vector::Zero(fl.dim());
    for (size_t k = 0; k < fl.kept_gather.size(); ++k)
      v[fl.kept_gather[k]] = active[static_cast<index_t>(k)];
    for (size_t k = 0; k < fl.elim_gather.size(); ++k)
      v[fl.elim_gather[k]] = elim_vals[l][static_cast<index_t>(k)];
    level_backward(fl, v);
    fl.apply_basis(v);
    active = std::move(v);
  }
  return active;
}

Vector CEFactorization::apply_q(const Vector& x) const {
  if (x.size() != n) throw std::invalid_argument("apply_q dimension mismatch");
  Vector out(n);
  index_t at = 0;
  Vector active = x;
  for (const FactorLevel& fl : levels) {
    Vector v = active;
    fl.apply_basis_transpose(v);
    Vector e = gather(v, fl.elim_gather);
    out.segment(at, e.size()) = e;
    at += e.size();
    active = gather(v, fl.kept_gather);
  }
  out.segment(at, active.size()) = active;
  return out;
}

Vector CEFactorization::apply_q_transpose(const Vector& y) const {
  if (y.size() != n) throw std::invalid_argument("apply_q_transpose dimension mismatch");
  std::vector<index_t> offsets(levels.size());
  index_t at = 0;
  for (size_t l = 0; l < levels.size(); ++l) {
    offsets[l] = at;
    at += levels[l].eliminated();
  }
  Vector active = y.segment(at, n - at);
  for (size_t l = levels.size(); l-- > 0;) {
    const FactorLevel& fl = levels[l];
    Vector v(fl.dim());
    for (size_t k = 0; k < fl.kept_gather.size(); ++k)
      v[fl.kept_gather[k]] = active[static_cast<index_t>(k)];
    for (size_t k = 0; k < fl.elim_gather.size(); ++k)
      v[fl.elim_gather[k]] = y[offsets[l] + static_cast<index_t>(k)];
    fl.apply_basis(v);
    active = std::move(v);
  }
  return active;
}

Vector CEFactorization::apply_operator(const Vector& x) const {
  if (x.size() != n) throw std::invalid_argument("apply_operator dimension mismatch");
  std::vector<Vector> cvals(levels.size());
  Vector active = x;
  for (size_t l = 0; l < levels.size(); ++l) {
    const FactorLevel& fl = levels[l];
    Vector v = active;
    fl.apply_basis_transpose(v);
    Vector c(fl.eliminated());
    for (const auto& rf : fl.rows) {
      if (rf.width == 0) continue;
      const index_t b = rf.block;
      const index_t off = fl.partition.offset(b);
      const index_t r = fl.retained[static_cast<size_t>(b)];
      Vector ci = rf.chol.transpose() * Vector(v.segment(off + r, rf.width));
      if (r > 0) ci.noalias() += rf.coupling.transpose() * v.segment(off, r);
      for (const auto& [t, g] : rf.neighbors)
        ci.noalias() += g.transpose() *
                        Vector(v.segment(fl.partition.offset(t), fl.partition.block_size(t)));
      c.segment(fl.elim_offset[static_cast<size_t>(b)], rf.width) = ci;
    }
    cvals[l] = std::move(c);
    active = gather(v, fl.kept_gather);
  }
  if (tail_dim > 0) {
    active = tail_chol.triangularView<Eigen::Lower>().transpose() * active;
    active = tail_chol.triangularView<Eigen::Lower>() * active;
  }
  for (size_t l = levels.size(); l-- > 0;) {
    const FactorLevel& fl = levels[l];
    Vector v = Vector::Zero(fl.dim());
    for (size_t k = 0; k < fl.kept_gather.size(); ++k)
      v[fl.kept_gather[k]] = active[static_cast<index_t>(k)];
    for (const auto& rf : fl.rows) {
      if (rf.width == 0) continue;
      const index_t b = rf.block;
      const index_t off = fl.partition.offset(b);
      const index_t r = fl.retained[static_cast<size_t>(b)];
      const auto ci = cvals[l].segment(fl.elim_offset[static_cast<size_t>(b)], rf.width);
      v.segment(off + r, rf.width).noalias() += rf.chol * ci;
      if (r > 0) v.segment(off, r).noalias() += rf.coupling * ci;
      for (const auto& [t, g] : rf.neighbors)
        v.segment(fl.partition.offset(t), fl.partition.block_size(t)).noalias() += g * ci;
    }
    fl.apply_basis(v);
    active = std::move(v);
  }
  return active;
}

Eigen::MatrixXd CEFactorization::reconstruct_dense() const {
  if (n > 4096)
    throw std::invalid_argument("reconstruct_dense is limited to dimension 4096");
  Eigen::MatrixXd r(n, n);
  Vector e = Vector::Zero(n);
  for (index_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    r.col(j) = apply_operator(e);
    e[j] = 0.0;
  }
  return r;
}

void CEFactorization::validate() const {
  index_t expect_dim = n;
  index_t accounted = 0;
  for (size_t l = 0; l < levels.size(); ++l) {
    const FactorLevel& fl = levels[l];
    if (fl.dim() != expect_dim)
      throw std::logic_error("level dimensions do not telescope");
    if (fl.eliminated() + fl.kept() != fl.dim())
      throw std::logic_error("eliminated plus kept must cover the level");
    const index_t m = fl.partition.block_count();
    if (static_cast<index_t>(fl.basis.size()) != m ||
        static_cast<index_t>(fl.retained.size()) != m ||
        static_cast<index_t>(fl.rows.size()) != m)
      throw std::logic_error("per-block arrays must match the block count");
    std::vector<char> seen(static_cast<size_t>(fl.dim()), 0);
    for (index_t g : fl.elim_gather) seen[static_cast<size_t>(g)] += 1;
    for (index_t g : fl.kept_gather) seen[static_cast<size_t>(g)] += 1;
    for (char c : seen)
      if (c != 1) throw std::logic_error("gather lists must partition the level space");
    for (index_t b = 0; b < m; ++b) {
      const DenseBlock& u = fl.basis[static_cast<size_t>(b)];
      const index_t bs = fl.partition.block_size(b);
      if (u.size() != 0) {
        if (u.rows() != bs || u.cols() != bs)
          throw std::logic_error("basis block has wrong shape");
        const double err =
            (u.transpose() * u - DenseBlock::Identity(bs, bs)).cwiseAbs().maxCoeff();
        if (err > 1e-12) {
          std::ostringstream os;
          os << "basis orthogonality violated at level " << l + 1 << ", block " << b
             << ": " << err;
          throw std::logic_error(os.str());
        }
      }
      const auto& rf = fl.rows[static_cast<size_t>(b)];
      if (rf.width + fl.retained[static_cast<size_t>(b)] != bs)
        throw std::logic_error("width plus retained must equal the block size");
      if (rf.width > 0) {
        if (rf.block != b) throw std::logic_error("row factor out of order");
        for (index_t rr = 0; rr < rf.width; ++rr)
          for (index_t cc = rr + 1; cc < rf.width; ++cc)
            if (rf.chol(rr, cc) != 0.0)
              throw std::logic_error("pivot factor must be lower triangular");
        index_t prev = -1;
        for (const auto& [t, g] : rf.neighbors) {
          if (t <= prev || t == b)
            throw std::logic_error("neighbor list must be ascending and off-diagonal");
          if (g.rows() != fl.partition.block_size(t) || g.cols() != rf.width)
            throw std::logic_error("neighbor factor block has wrong shape");
          prev = t;
        }
      }
    }
    accounted += fl.eliminated();
    expect_dim = fl.kept();
  }
  if (expect_dim != tail_dim)
    throw std::logic_error("tail dimension does not match the last level");
  if (accounted + tail_dim != n)
    throw std::logic_error("eliminated plus tail must cover the matrix");
  if (tail_dim > 0 && (tail_chol.rows() != tail_dim || tail_chol.cols() != tail_dim))
    throw std::logic_error("tail factor has wrong shape");
}

CEFactorization ce_factorize(const BlockSparseMatrix& a, const CoarseningPlan& plan,
                             const CompressionStrategy& strategy, const FactorOptions& opts) {
  if (!(plan.partition == a.partition()))
    throw std::invalid_argument("plan partition does not match the matrix");
  const auto t_start = std::chrono::steady_clock::now();

  CEFactorization f;
  f.n = a.dim();
  const index_t b_max = a.partition().max_block_size();

  BlockSparseMatrix holder;
  const BlockSparseMatrix* cur = &a;
  // plan-space block -> current matrix block, -1 once fully eliminated.
  std::vector<index_t> alive_map(static_cast<size_t>(a.partition().block_count()));
  std::iota(alive_map.begin(), alive_map.end(), index_t{0});

  while (cur->dim() > opts.dense_threshold &&
         static_cast<index_t>(f.levels.size()) < opts.max_levels) {
    const size_t level_idx = f.levels.size();
    const auto plan_groups = level_idx < plan.levels.size()
                                 ? plan.levels[level_idx]
                                 : pair_groups(static_cast<index_t>(alive_map.size()), plan.join);
    std::vector<std::vector<index_t>> cur_groups;
    std::vector<index_t> plan_group_slot(plan_groups.size(), -1);
    for (size_t g = 0; g < plan_groups.size(); ++g) {
      std::vector<index_t> members;
      for (index_t b : plan_groups[g])
        if (alive_map[static_cast<size_t>(b)] >= 0)
          members.push_back(alive_map[static_cast<size_t>(b)]);
      if (!members.empty()) {
        plan_group_slot[g] = static_cast<index_t>(cur_groups.size());
        cur_groups.push_back(std::move(members));
      }
    }

    const auto t0 = std::chrono::steady_clock::now();
    SweepResult sweep = level_sweep(*cur, strategy, cur_groups, static_cast<int>(level_idx) + 1);
    const double secs = seconds_since(t0);
    if (sweep.level.eliminated() == 0) break;

    LevelStats ls;
    ls.level = static_cast<int>(level_idx) + 1;
    ls.block_count = cur->partition().block_count();
    ls.pattern_blocks = cur->pattern().lower_blocks();
    ls.factor_blocks = 2 * ls.pattern_blocks;
    ls.eliminated = sweep.level.eliminated();
    ls.retained = sweep.level.kept();
    ls.seconds = secs;
    ls.shift_retries = sweep.shift_retries;
    ls.rank_histogram.assign(static_cast<size_t>(b_max) + 1, 0);
    double rank_sum = 0.0;
    for (index_t r : sweep.level.retained) {
      ls.max_rank = std::max(ls.max_rank, r);
      rank_sum += static_cast<double>(r);
      ls.rank_histogram[static_cast<size_t>(std::min(r, b_max))] += 1;
    }
    ls.mean_rank = rank_sum / static_cast<double>(sweep.level.retained.size());
    for (const auto& rf : sweep.level.rows) {
      ls.l_bytes += payload_bytes_of(rf.chol) + payload_bytes_of(rf.coupling);
      index_t nnz = rf.width * (rf.width + 1) / 2 +
                    static_cast<index_t>(rf.coupling.size());
      for (const auto& [t, g] : rf.neighbors) {
        (void)t;
        ls.l_bytes += payload_bytes_of(g);
        nnz += static_cast<index_t>(g.size());
      }
      f.stats.l_scalar_nnz += nnz;
    }
    for (const auto& u : sweep.level.basis) ls.q_bytes += payload_bytes_of(u);
    f.stats.levels.push_back(std::move(ls));

    // Plan-space bookkeeping for the next level.
    std::vector<index_t> next_alive(plan_groups.size(), -1);
    for (size_t g = 0; g < plan_groups.size(); ++g)
      if (plan_group_slot[g] >= 0)
        next_alive[g] = sweep.alive[static_cast<size_t>(plan_group_slot[g])];
    alive_map = std::move(next_alive);

    f.levels.push_back(std::move(sweep.level));
    holder = std::move(sweep.remainder);
    cur = &holder;
  }

  f.tail_dim = cur->dim();
  if (f.tail_dim > 0) {
    const auto t0 = std::chrono::steady_clock::now();
    DenseBlock dense = cur->to_dense();
    Eigen::LLT<DenseBlock> llt(dense);
    if (llt.info() != Eigen::Success) {
      const double shift = 1e-12 * dense.trace() / static_cast<double>(f.tail_dim);
      DenseBlock shifted = dense + shift * DenseBlock::Identity(f.tail_dim, f.tail_dim);
      llt.compute(shifted);
      if (llt.info() != Eigen::Success) {
        std::ostringstream os;
        os << "dense tail not positive definite after shift " << shift;
        throw BreakdownError(static_cast<int>(f.levels.size()) + 1, -1, os.str());
      }
    }
    f.tail_chol = llt.matrixL();
    f.stats.tail_seconds = seconds_since(t0);
  }
  f.stats.tail_dim = f.tail_dim;
  f.stats.tail_bytes = f.tail_dim * f.tail_dim * static_cast<index_t>(sizeof(double));
  f.stats.l_scalar_nnz += f.tail_dim * (f.tail_dim + 1) / 2;

  double blocks_total = 0.0;
  for (const auto& ls : f.stats.levels) {
    blocks_total += static_cast<double>(ls.factor_blocks);
    f.stats.l_payload_bytes += ls.l_bytes;
    f.stats.q_payload_bytes += ls.q_bytes;
  }
  blocks_total += 0.5 * static_cast<double>(f.tail_dim) * static_cast<double>(f.tail_dim);
  f.stats.factor_blocks = blocks_total;

  const index_t rank_hint = strategy.mode == CompressionStrategy::Mode::FixedRank
                                ? strategy.rank
                                : std::max<index_t>(1, b_max / 2);
  NnzPrediction pred = predicted_nnz(a.pattern(), plan,
                                     static_cast<index_t>(f.levels.size()), rank_hint, b_max);
  f.stats.predicted_factor_blocks = pred.total;
  f.stats.predicted_level_edges = std::move(pred.level_edges);
  f.stats.total_seconds = seconds_since(t_start);

  f.validate();
  return f;
}

NnzPrediction predicted_nnz(const BlockSparsityPattern& p, const CoarseningPlan& plan,
                            index_t k_levels, index_t rank, index_t block) {
  NnzPrediction pred;
  BlockSparsityPattern cur = p;
  // Block count of the deepest level actually swept; the tail holds that
  // level's kept rows, at most rank per block.
  index_t last_blocks = p.block_rows();
  for (index_t l = 0; l < k_levels; ++l) {
    pred.level_edges.push_back(cur.lower_blocks());
    last_blocks = cur.block_rows();
    const auto groups = static_cast<size_t>(l) < plan.levels.size()
                            ? plan.levels[static_cast<size_t>(l)]
                            : pair_groups(cur.block_rows(), plan.join);
    cur = coarsen_pattern(pattern_square(cur), groups);
  }
  const double tail_rows = k_levels == 0
                               ? static_cast<double>(last_blocks) * static_cast<double>(block)
                               : static_cast<double>(last_blocks) * static_cast<double>(rank);
  pred.tail_term = 0.5 * tail_rows * tail_rows;
  pred.total = pred.tail_term;
  for (index_t e : pred.level_edges) pred.total += 2.0 * static_cast<double>(e);
  return pred;
}

}  // namespace ce
