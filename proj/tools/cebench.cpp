// Benchmark driver for the compression-elimination solver library.
//
//   cebench gen diffusion3d 16 16 16 --block 8 --out data/
//   cebench factor diffusion3d 16 16 16 --block 8 --eps 1e-6
//   cebench solve file data/matrix.mtx --plan data/plan.txt --rhs data/rhs.txt
//   cebench bench --sizes 8x8x8,16x16x16 --eps 1e-2 --eps 1e-4 --rank 4

#include <CLI11.hpp>
#include <string>
#include <vector>

#include "ce/cli.hpp"

namespace {

void add_problem_args(CLI::App* cmd, ce::BenchConfig& cfg, std::vector<std::string>& args) {
  cmd->add_option("problem", args,
                  "diffusion3d NX NY NZ | laplace2d N | file MATRIX.mtx")
      ->expected(-1);
}

// Positional problem spec shared by gen/factor/solve.
void parse_problem_args(const std::vector<std::string>& args, ce::BenchConfig& cfg) {
  if (args.empty()) throw CLI::ValidationError("problem", "missing problem spec");
  cfg.problem = args[0];
  if (cfg.problem == "diffusion3d") {
    if (args.size() != 4)
      throw CLI::ValidationError("problem", "diffusion3d needs NX NY NZ");
    cfg.nx = std::stoll(args[1]);
    cfg.ny = std::stoll(args[2]);
    cfg.nz = std::stoll(args[3]);
  } else if (cfg.problem == "laplace2d") {
    if (args.size() != 2) throw CLI::ValidationError("problem", "laplace2d needs N");
    cfg.n2d = std::stoll(args[1]);
  } else if (cfg.problem == "file") {
    if (args.size() != 2) throw CLI::ValidationError("problem", "file needs a matrix path");
    cfg.matrix_path = args[1];
  } else {
    throw CLI::ValidationError("problem", "unknown problem '" + cfg.problem + "'");
  }
}

void add_common_flags(CLI::App* cmd, ce::BenchConfig& cfg) {
  cmd->add_option("--block", cfg.block, "block size B")->check(CLI::PositiveNumber);
  cmd->add_option("--join", cfg.join, "blocks merged per super-block")
      ->check(CLI::Range(static_cast<ce::index_t>(2), static_cast<ce::index_t>(64)));
  cmd->add_option("--dense-threshold", cfg.dense_threshold,
                  "switch to a dense factorization at this dimension");
  cmd->add_option("--seed", cfg.seed, "seed for randomized inputs (reserved)");
  cmd->add_option("--out", cfg.out_dir, "output directory");
}

void add_strategy_flags(CLI::App* cmd, ce::BenchConfig& cfg, bool& rank_given) {
  auto* eps = cmd->add_option("--eps", cfg.eps, "adaptive truncation threshold");
  auto* rank = cmd->add_option("--rank", cfg.rank, "fixed retained rank");
  rank->excludes(eps);
  cmd->add_flag("--eps-absolute", cfg.eps_absolute,
                "compare singular values against eps directly, not relative to the largest");
  cmd->callback([&cfg, rank] { cfg.use_rank = rank->count() > 0; });
  (void)rank_given;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"block factorization benchmark driver"};
  app.require_subcommand(1);

  ce::BenchConfig cfg;
  std::vector<std::string> gen_args, factor_args, solve_args;
  bool rank_given = false;

  auto* gen = app.add_subcommand("gen", "write matrix, rhs and coarsening plan files");
  add_problem_args(gen, cfg, gen_args);
  add_common_flags(gen, cfg);

  auto* factor = app.add_subcommand("factor", "factorize and report per-level stats");
  add_problem_args(factor, cfg, factor_args);
  add_common_flags(factor, cfg);
  add_strategy_flags(factor, cfg, rank_given);
  factor->add_option("--plan", cfg.plan_path, "coarsening plan file (file problems)");

  auto* solve = app.add_subcommand("solve", "factorize and solve the problem's system");
  add_problem_args(solve, cfg, solve_args);
  add_common_flags(solve, cfg);
  add_strategy_flags(solve, cfg, rank_given);
  solve->add_option("--plan", cfg.plan_path, "coarsening plan file (file problems)");
  solve->add_option("--rhs", cfg.rhs_path, "right hand side file (file problems)");
  solve->add_option("--tol", cfg.tol, "relative convergence tolerance");
  solve->add_option("--maxit", cfg.maxit, "iteration cap");
  solve->add_flag("--direct", cfg.direct, "apply the factorization directly, no iteration");
  solve->add_flag("--no-precond", cfg.no_precond, "run unpreconditioned");

  auto* bench = app.add_subcommand("bench", "gen+factor+solve over sizes and strategies");
  add_common_flags(bench, cfg);
  bench->add_option("--sizes", cfg.bench_sizes, "problem sizes, e.g. 8x8x8,16x16x16 or 64")
      ->delimiter(',');
  bench->add_option("--eps", cfg.bench_eps, "adaptive strategies to run")->delimiter(',');
  bench->add_option("--rank", cfg.bench_ranks, "fixed-rank strategies to run")->delimiter(',');
  bench->add_flag("--eps-absolute", cfg.eps_absolute,
                  "compare singular values against eps directly");
  bench->add_option("--tol", cfg.tol, "relative convergence tolerance");
  bench->add_option("--maxit", cfg.maxit, "iteration cap");

  try {
    app.parse(argc, argv);
    if (gen->parsed()) {
      parse_problem_args(gen_args, cfg);
      return ce::run_gen(cfg);
    }
    if (factor->parsed()) {
      parse_problem_args(factor_args, cfg);
      return ce::run_factor(cfg);
    }
    if (solve->parsed()) {
      parse_problem_args(solve_args, cfg);
      return ce::run_solve(cfg);
    }
    if (bench->parsed()) return ce::run_bench(cfg);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ce::kExitUsage;
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ce::kExitUsage;
  }
  return ce::kExitUsage;
}
