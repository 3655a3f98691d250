#include "ce/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ce {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

CoordinateData read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty file");
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket" || lower(object) != "matrix" ||
      lower(format) != "coordinate" || lower(field) != "real")
    throw IoError(path + ": expected a coordinate real MatrixMarket banner");
  const std::string sym = lower(symmetry);
  if (sym != "general" && sym != "symmetric")
    throw IoError(path + ": unsupported symmetry '" + symmetry + "'");

  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  std::istringstream sizes(line);
  index_t rows = 0, cols = 0, nnz = 0;
  if (!(sizes >> rows >> cols >> nnz)) throw IoError(path + ": bad size line");
  if (rows != cols) throw IoError(path + ": matrix must be square");

  CoordinateData data;
  data.rows = rows;
  data.cols = cols;
  data.entries.reserve(static_cast<size_t>(sym == "symmetric" ? 2 * nnz : nnz));
  for (index_t k = 0; k < nnz; ++k) {
    index_t i = 0, j = 0;
    double v = 0.0;
    if (!(in >> i >> j >> v)) throw IoError(path + ": truncated entry list");
    if (i < 1 || i > rows || j < 1 || j > cols)
      throw IoError(path + ": entry index out of range");
    data.entries.push_back({i - 1, j - 1, v});
    if (sym == "symmetric" && i != j) data.entries.push_back({j - 1, i - 1, v});
  }
  return data;
}

void write_matrix_market(const BlockSparseMatrix& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  const BlockPartition& part = a.partition();

  std::vector<Triplet> lower_entries;
  for (index_t bi = 0; bi < part.block_count(); ++bi) {
    for (index_t bj : a.pattern().row(bi)) {
      if (bj > bi) continue;
      const DenseBlock& blk = a.block(bi, bj);
      for (index_t r = 0; r < blk.rows(); ++r) {
        for (index_t c = 0; c < blk.cols(); ++c) {
          const index_t gi = part.offset(bi) + r;
          const index_t gj = part.offset(bj) + c;
          if (gj > gi || blk(r, c) == 0.0) continue;
          lower_entries.push_back({gi, gj, blk(r, c)});
        }
      }
    }
  }
  std::sort(lower_entries.begin(), lower_entries.end(), [](const Triplet& x, const Triplet& y) {
    return std::tie(x.col, x.row) < std::tie(y.col, y.row);
  });

  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << a.dim() << " " << a.dim() << " " << lower_entries.size() << "\n";
  char buf[64];
  for (const Triplet& t : lower_entries) {
    std::snprintf(buf, sizeof(buf), "%lld %lld %.17g\n",
                  static_cast<long long>(t.row + 1), static_cast<long long>(t.col + 1),
                  t.value);
    out << buf;
  }
  if (!out) throw IoError("write failed for " + path);
}

std::vector<double> read_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<double> v;
  double x;
  while (in >> x) v.push_back(x);
  return v;
}

void write_vector(const std::vector<double>& v, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  char buf[48];
  for (double x : v) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", x);
    out << buf;
  }
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace ce
