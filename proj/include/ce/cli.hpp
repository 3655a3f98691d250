#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ce/block_matrix.hpp"
#include "ce/compression.hpp"
#include "ce/factorization.hpp"
#include "ce/problems.hpp"
#include "ce/types.hpp"

namespace ce {

// Exit codes shared by all commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitBreakdown = 2;
inline constexpr int kExitNoConvergence = 3;

struct BenchConfig {
  std::string problem;  // diffusion3d | laplace2d | file
  index_t nx = 0, ny = 0, nz = 0;
  index_t n2d = 0;
  std::string matrix_path;
  std::string rhs_path;
  std::string plan_path;

  index_t block = 8;
  index_t join = 2;
  bool use_rank = false;
  index_t rank = 0;
  double eps = 1e-6;
  bool eps_absolute = false;
  index_t dense_threshold = 2048;
  double tol = 1e-10;
  index_t maxit = 2000;
  std::uint64_t seed = 0;  // reserved for randomized inputs
  std::string out_dir = ".";
  bool direct = false;
  bool no_precond = false;

  std::vector<std::string> bench_sizes;
  std::vector<double> bench_eps;
  std::vector<index_t> bench_ranks;

  CompressionStrategy strategy() const {
    return use_rank ? CompressionStrategy::fixed_rank(rank)
                    : CompressionStrategy::adaptive(eps, eps_absolute);
  }
};

struct LoadedProblem {
  BlockSparseMatrix matrix;  // permuted into plan order, blocked
  Vector rhs;                // permuted
  CoarseningPlan plan;
};

LoadedProblem load_problem(const BenchConfig& cfg);

int run_gen(const BenchConfig& cfg);
int run_factor(const BenchConfig& cfg);
int run_solve(const BenchConfig& cfg);
int run_bench(const BenchConfig& cfg);

}  // namespace ce
