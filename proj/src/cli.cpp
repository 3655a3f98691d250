#include "ce/cli.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <sstream>

#include "ce/csv.hpp"
#include "ce/matrix_market.hpp"
#include "ce/minres.hpp"

namespace ce {

namespace {

namespace fs = std::filesystem;

double now_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string out_path(const BenchConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return (fs::path(cfg.out_dir) / name).string();
}

struct AssembledProblem {
  AssembledSystem sys;
  CoarseningPlan plan;
};

AssembledProblem assemble_from_config(const BenchConfig& cfg) {
  AssembledProblem out;
  if (cfg.problem == "diffusion3d") {
    Grid3D grid{cfg.nx, cfg.ny, cfg.nz};
    out.sys = assemble_diffusion_3d(grid);
    out.plan = geometric_block_ordering(grid, cfg.block, cfg.join);
  } else if (cfg.problem == "laplace2d") {
    out.sys = assemble_laplace_2d_9pt(cfg.n2d);
    Grid3D grid{cfg.n2d, cfg.n2d, 1};
    out.plan = geometric_block_ordering(grid, cfg.block, cfg.join);
  } else {
    throw std::invalid_argument("unknown problem '" + cfg.problem + "'");
  }
  return out;
}

LoadedProblem finish_load(std::vector<Triplet> entries, std::vector<double> rhs,
                          CoarseningPlan plan) {
  const auto permuted = apply_permutation(entries, plan.initial_permutation);
  LoadedProblem lp;
  lp.matrix = BlockSparseMatrix::from_triplets(permuted, plan.partition, MirrorMode::None);
  const auto prhs = permute_vector(rhs, plan.initial_permutation);
  lp.rhs = Eigen::Map<const Vector>(prhs.data(), static_cast<index_t>(prhs.size()));
  lp.plan = std::move(plan);
  return lp;
}

CsvTable factor_stats_table(const FactorStats& stats) {
  CsvTable t;
  t.header = {"level", "blocks_eliminated", "l_blocks", "max_rank",
              "mean_rank", "seconds", "bytes"};
  for (const auto& ls : stats.levels) {
    t.rows.push_back({fmt_index(ls.level), fmt_index(ls.eliminated),
                      fmt_index(ls.factor_blocks), fmt_index(ls.max_rank),
                      fmt_double(ls.mean_rank), fmt_double(ls.seconds),
                      fmt_index(ls.l_bytes + ls.q_bytes)});
  }
  return t;
}

CsvTable trace_table(const IterationTrace& trace) {
  CsvTable t;
  t.header = {"iter", "recurrence_resid", "true_resid", "seconds"};
  for (const auto& s : trace.samples)
    t.rows.push_back({fmt_index(s.iter), fmt_double(s.recurrence_resid),
                      fmt_double(s.true_resid), fmt_double(s.seconds)});
  return t;
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const BreakdownError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBreakdown;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

struct FactorOutcome {
  CEFactorization fact;
  double seconds = 0.0;
};

FactorOutcome factor_problem(const LoadedProblem& lp, const BenchConfig& cfg) {
  FactorOutcome out;
  FactorOptions opts;
  opts.dense_threshold = cfg.dense_threshold;
  const auto t0 = std::chrono::steady_clock::now();
  out.fact = ce_factorize(lp.matrix, lp.plan, cfg.strategy(), opts);
  out.seconds = now_seconds(t0);
  return out;
}

}  // namespace

LoadedProblem load_problem(const BenchConfig& cfg) {
  if (cfg.problem == "file") {
    CoordinateData data = read_matrix_market(cfg.matrix_path);
    CoarseningPlan plan = cfg.plan_path.empty() ? CoarseningPlan::trivial(data.rows, cfg.block)
                                                : CoarseningPlan::load(cfg.plan_path);
    if (plan.partition.dim() != data.rows)
      throw std::invalid_argument("plan dimension does not match the matrix");
    std::vector<double> rhs;
    if (!cfg.rhs_path.empty()) {
      rhs = read_vector(cfg.rhs_path);
      if (static_cast<index_t>(rhs.size()) != data.rows)
        throw std::invalid_argument("rhs length does not match the matrix");
    } else {
      rhs.assign(static_cast<size_t>(data.rows), 1.0);
    }
    return finish_load(std::move(data.entries), std::move(rhs), std::move(plan));
  }
  AssembledProblem ap = assemble_from_config(cfg);
  return finish_load(std::move(ap.sys.entries), std::move(ap.sys.rhs), std::move(ap.plan));
}

int run_gen(const BenchConfig& cfg) {
  return guarded([&] {
    if (cfg.problem == "file")
      throw std::invalid_argument("gen needs a synthetic problem, not 'file'");
    AssembledProblem ap = assemble_from_config(cfg);
    BlockSparseMatrix a = BlockSparseMatrix::from_triplets(
        ap.sys.entries, BlockPartition::uniform(ap.sys.dim, cfg.block), MirrorMode::None);
    write_matrix_market(a, out_path(cfg, "matrix.mtx"));
    write_vector(ap.sys.rhs, out_path(cfg, "rhs.txt"));
    ap.plan.save(out_path(cfg, "plan.txt"));
    std::cout << "wrote matrix.mtx rhs.txt plan.txt (n=" << ap.sys.dim
              << ", blocks=" << ap.plan.partition.block_count() << ") to " << cfg.out_dir
              << "\n";
    return kExitOk;
  });
}

int run_factor(const BenchConfig& cfg) {
  return guarded([&] {
    LoadedProblem lp = load_problem(cfg);
    FactorOutcome fo = factor_problem(lp, cfg);
    const FactorStats& stats = fo.fact.stats;

    factor_stats_table(stats).write(out_path(cfg, "factor_stats.csv"));

    std::string recon;
    if (fo.fact.n <= 4096) {
      const Eigen::MatrixXd approx = fo.fact.reconstruct_dense();
      const Eigen::MatrixXd exact = lp.matrix.to_dense();
      recon = fmt_double((approx - exact).norm() / exact.norm());
    }
    CsvTable summary;
    summary.header = {"n",        "block",     "strategy", "levels",      "tail_dim",
                      "l_blocks", "predicted_l_blocks",    "block_ratio", "l_scalar_nnz",
                      "l_bytes",  "q_bytes",   "tail_bytes", "total_bytes", "seconds",
                      "recon_error"};
    const double ratio = stats.predicted_factor_blocks > 0
                             ? stats.factor_blocks / stats.predicted_factor_blocks
                             : 0.0;
    summary.rows.push_back(
        {fmt_index(fo.fact.n), fmt_index(cfg.block), cfg.strategy().describe(),
         fmt_index(static_cast<index_t>(fo.fact.levels.size())), fmt_index(fo.fact.tail_dim),
         fmt_double(stats.factor_blocks), fmt_double(stats.predicted_factor_blocks),
         fmt_double(ratio), fmt_index(stats.l_scalar_nnz), fmt_index(stats.l_payload_bytes),
         fmt_index(stats.q_payload_bytes), fmt_index(stats.tail_bytes),
         fmt_index(stats.total_bytes()), fmt_double(fo.seconds), recon});
    summary.write(out_path(cfg, "factor_summary.csv"));

    std::cout << "factored n=" << fo.fact.n << " strategy=" << cfg.strategy().describe()
              << " levels=" << fo.fact.levels.size() << " tail=" << fo.fact.tail_dim
              << " blocks=" << fmt_double(stats.factor_blocks) << " (predicted "
              << fmt_double(stats.predicted_factor_blocks) << ") bytes="
              << stats.total_bytes() << " seconds=" << fmt_double(fo.seconds);
    if (!recon.empty()) std::cout << " recon_error=" << recon;
    std::cout << "\n";
    return kExitOk;
  });
}

int run_solve(const BenchConfig& cfg) {
  return guarded([&] {
    LoadedProblem lp = load_problem(cfg);
    const index_t n = lp.matrix.dim();
    const ApplyFn matvec = [&](const Vector& v) { return lp.matrix.matvec(v); };

    double factor_seconds = 0.0;
    CEFactorization fact;
    const bool need_factor = cfg.direct || !cfg.no_precond;
    if (need_factor) {
      FactorOutcome fo = factor_problem(lp, cfg);
      fact = std::move(fo.fact);
      factor_seconds = fo.seconds;
    }

    Vector x;
    SolveReport rep;
    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.direct) {
      x = fact.solve(lp.rhs);
      rep.converged = true;
      rep.iterations = 0;
      rep.final_true_residual = relative_residual(matvec, x, lp.rhs);
      rep.final_recurrence_residual = rep.final_true_residual;
      rep.trace.samples.push_back(
          {0, rep.final_recurrence_residual, rep.final_true_residual, now_seconds(t0)});
    } else {
      MinresOptions mopts;
      mopts.tol = cfg.tol;
      mopts.maxit = cfg.maxit;
      ApplyFn precond;
      if (!cfg.no_precond) precond = [&](const Vector& v) { return fact.solve(v); };
      rep = minres(matvec, n, lp.rhs, precond, mopts, x);
    }
    const double solve_seconds = now_seconds(t0);

    const auto xout = unpermute_vector(
        std::vector<double>(x.data(), x.data() + x.size()), lp.plan.initial_permutation);
    write_vector(xout, out_path(cfg, "x.txt"));
    trace_table(rep.trace).write(out_path(cfg, "trace.csv"));

    CsvTable report;
    report.header = {"n",          "mode",          "strategy",   "preconditioned",
                     "converged",  "iterations",    "recurrence_resid",
                     "true_resid", "factor_seconds", "solve_seconds"};
    const std::string mode = cfg.direct ? "direct" : "minres";
    const std::string strat = need_factor ? cfg.strategy().describe() : "none";
    report.rows.push_back({fmt_index(n), mode, strat, cfg.no_precond ? "0" : "1",
                           rep.converged ? "1" : "0", fmt_index(rep.iterations),
                           fmt_double(rep.final_recurrence_residual),
                           fmt_double(rep.final_true_residual), fmt_double(factor_seconds),
                           fmt_double(solve_seconds)});
    report.write(out_path(cfg, "solve_report.csv"));

    std::cout << "solve n=" << n << " mode=" << mode << " strategy=" << strat
              << " converged=" << (rep.converged ? 1 : 0) << " iterations=" << rep.iterations
              << " true_resid=" << fmt_double(rep.final_true_residual) << "\n";
    return rep.converged ? kExitOk : kExitNoConvergence;
  });
}

namespace {

BenchConfig size_config(const BenchConfig& base, const std::string& size) {
  BenchConfig cfg = base;
  index_t dims[3] = {0, 0, 0};
  int count = 0;
  size_t start = 0;
  while (start <= size.size() && count < 3) {
    size_t x = size.find('x', start);
    if (x == std::string::npos) x = size.size();
    dims[count++] = std::stoll(size.substr(start, x - start));
    start = x + 1;
    if (x == size.size()) break;
  }
  if (count == 1) {
    cfg.problem = "laplace2d";
    cfg.n2d = dims[0];
  } else if (count == 3) {
    cfg.problem = "diffusion3d";
    cfg.nx = dims[0];
    cfg.ny = dims[1];
    cfg.nz = dims[2];
  } else {
    throw std::invalid_argument("bench size must be N or NXxNYxNZ: '" + size + "'");
  }
  return cfg;
}

}  // namespace

int run_bench(const BenchConfig& cfg) {
  return guarded([&] {
    std::vector<CompressionStrategy> strategies;
    for (double e : cfg.bench_eps) strategies.push_back(CompressionStrategy::adaptive(e, cfg.eps_absolute));
    for (index_t r : cfg.bench_ranks) strategies.push_back(CompressionStrategy::fixed_rank(r));
    if (strategies.empty()) strategies.push_back(cfg.strategy());

    CsvTable table;
    table.header = {"n",       "strategy",       "l_blocks",      "bytes",
                    "factor_seconds", "solve_seconds", "iterations", "residual"};
    for (const std::string& size : cfg.bench_sizes) {
      for (const CompressionStrategy& strat : strategies) {
        BenchConfig run = size_config(cfg, size);
        run.use_rank = strat.mode == CompressionStrategy::Mode::FixedRank;
        run.rank = strat.rank;
        run.eps = strat.eps;
        LoadedProblem lp = load_problem(run);
        FactorOutcome fo = factor_problem(lp, run);
        MinresOptions mopts;
        mopts.tol = run.tol;
        mopts.maxit = run.maxit;
        const ApplyFn matvec = [&](const Vector& v) { return lp.matrix.matvec(v); };
        const ApplyFn precond = [&](const Vector& v) { return fo.fact.solve(v); };
        Vector x;
        const auto t0 = std::chrono::steady_clock::now();
        SolveReport rep = minres(matvec, lp.matrix.dim(), lp.rhs, precond, mopts, x);
        const double solve_seconds = now_seconds(t0);
        table.rows.push_back({fmt_index(lp.matrix.dim()), strat.describe(),
                              fmt_double(fo.fact.stats.factor_blocks),
                              fmt_index(fo.fact.stats.total_bytes()),
                              fmt_double(fo.seconds), fmt_double(solve_seconds),
                              fmt_index(rep.iterations),
                              fmt_double(rep.final_true_residual)});
        std::cout << "bench n=" << lp.matrix.dim() << " strategy=" << strat.describe()
                  << " iterations=" << rep.iterations
                  << " residual=" << fmt_double(rep.final_true_residual) << "\n";
      }
    }
    table.write(out_path(cfg, "bench.csv"));
    return kExitOk;
  });
}

}  // namespace ce
