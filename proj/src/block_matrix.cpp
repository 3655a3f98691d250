#include "ce/block_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ce {

BlockSparseMatrix::BlockSparseMatrix(BlockPartition partition,
                                     BlockSparsityPattern pattern)
    : partition_(std::move(partition)), pattern_(std::move(pattern)) {
  if (pattern_.block_rows() != partition_.block_count())
    throw std::invalid_argument("pattern size does not match partition");
  if (!pattern_.is_structurally_symmetric())
    throw std::invalid_argument("pattern must be structurally symmetric");
  if (!pattern_.has_full_diagonal())
    throw std::invalid_argument("pattern must contain all diagonal positions");
  blocks_.resize(static_cast<size_t>(pattern_.block_rows()));
  for (index_t i = 0; i < pattern_.block_rows(); ++i) {
    auto& row = blocks_[static_cast<size_t>(i)];
    row.reserve(pattern_.row(i).size());
    for (index_t j : pattern_.row(i))
      row.push_back(DenseBlock::Zero(partition_.block_size(i), partition_.block_size(j)));
  }
}

index_t BlockSparseMatrix::slot(index_t i, index_t j) const {
  const auto& r = pattern_.row(i);
  auto it = std::lower_bound(r.begin(), r.end(), j);
  if (it == r.end() || *it != j) return -1;
  return static_cast<index_t>(it - r.begin());
}

const DenseBlock& BlockSparseMatrix::block(index_t i, index_t j) const {
  index_t s = slot(i, j);
  if (s < 0) throw std::out_of_range("block position not in pattern");
  return blocks_[static_cast<size_t>(i)][static_cast<size_t>(s)];
}

DenseBlock& BlockSparseMatrix::block(index_t i, index_t j) {
  index_t s = slot(i, j);
  if (s < 0) throw std::out_of_range("block position not in pattern");
  return blocks_[static_cast<size_t>(i)][static_cast<size_t>(s)];
}

BlockSparseMatrix BlockSparseMatrix::from_triplets(std::span<const Triplet> entries,
                                                   BlockPartition partition,
                                                   MirrorMode mirror) {
  const index_t n = partition.dim();
  // Coordinate map keyed by scalar position; duplicates sum.
  std::map<std::pair<index_t, index_t>, double> coo;
  double max_abs = 0.0;
  for (const Triplet& t : entries) {
    if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
      throw std::invalid_argument("triplet index outside matrix dimension");
    coo[{t.row, t.col}] += t.value;
    if (mirror == MirrorMode::Lower && t.row != t.col) coo[{t.col, t.row}] += t.value;
    max_abs = std::max(max_abs, std::abs(t.value));
  }
  if (mirror == MirrorMode::None) {
    const double tol = 1e-12 * std::max(max_abs, 1e-300);
    for (const auto& [pos, v] : coo) {
      auto it = coo.find({pos.second, pos.first});
      const double vt = (it == coo.end()) ? 0.0 : it->second;
      if (std::abs(v - vt) > tol) {
        std::ostringstream os;
        os << "asymmetric input: |a(" << pos.first << "," << pos.second << ") - a("
           << pos.second << "," << pos.first << ")| = " << std::abs(v - vt);
        throw std::invalid_argument(os.str());
      }
    }
  }

  BlockSparsityPattern pat(partition.block_count());
  for (const auto& [pos, v] : coo) {
    (void)v;
    pat.insert_symmetric(partition.block_of(pos.first), partition.block_of(pos.second));
  }
  pat.add_full_diagonal();

  BlockSparseMatrix a(std::move(partition), std::move(pat));
  for (const auto& [pos, v] : coo) {
    const index_t bi = a.partition_.block_of(pos.first);
    const index_t bj = a.partition_.block_of(pos.second);
    a.block(bi, bj)(pos.first - a.partition_.offset(bi), pos.second - a.partition_.offset(bj)) = v;
  }
  return a;
}

Vector BlockSparseMatrix::matvec(const Vector& x) const {
  if (x.size() != dim()) throw std::invalid_argument("matvec dimension mismatch");
  Vector y = Vector::Zero(dim());
  for (index_t i = 0; i < partition_.block_count(); ++i) {
    auto yi = y.segment(partition_.offset(i), partition_.block_size(i));
    const auto& cols = pattern_.row(i);
    for (size_t k = 0; k < cols.size(); ++k) {
      const index_t j = cols[k];
      yi.noalias() += blocks_[static_cast<size_t>(i)][k] *
                      x.segment(partition_.offset(j), partition_.block_size(j));
    }
  }
  return y;
}

index_t BlockSparseMatrix::scalar_nnz() const {
  index_t n = 0;
  for (const auto& row : blocks_)
    for (const auto& b : row) n += (b.array() != 0.0).count();
  return n;
}

index_t BlockSparseMatrix::payload_bytes() const {
  index_t n = 0;
  for (const auto& row : blocks_)
    for (const auto& b : row) n += static_cast<index_t>(b.size()) * sizeof(double);
  return n;
}

double BlockSparseMatrix::symmetry_error() const {
  double e = 0.0;
  for (index_t i = 0; i < partition_.block_count(); ++i) {
    const auto& cols = pattern_.row(i);
    for (size_t k = 0; k < cols.size(); ++k) {
      const index_t j = cols[k];
      if (j < i) continue;
      const DenseBlock& a_ij = blocks_[static_cast<size_t>(i)][k];
      e = std::max(e, (a_ij - block(j, i).transpose()).cwiseAbs().maxCoeff());
    }
  }
  return e;
}

Eigen::MatrixXd BlockSparseMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(dim(), dim());
  for (index_t i = 0; i < partition_.block_count(); ++i) {
    const auto& cols = pattern_.row(i);
    for (size_t k = 0; k < cols.size(); ++k) {
      const index_t j = cols[k];
      d.block(partition_.offset(i), partition_.offset(j), partition_.block_size(i),
              partition_.block_size(j)) = blocks_[static_cast<size_t>(i)][k];
    }
  }
  return d;
}

}  // namespace ce
