#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "commands.hpp"

namespace {

using namespace sgm;
using namespace sgm::cli;

void add_common(CLI::App* cmd, CommonOptions& c) {
  cmd->add_option("--seed", c.seed, "Base random seed")->capture_default_str();
  cmd->add_option("--threads", c.threads, "Worker threads, 0 = all cores")->capture_default_str();
  cmd->add_option("--out", c.out, "Output path, - for stdout")->capture_default_str();
  cmd->add_option("--tol", c.tol, "Inverse-iteration step tolerance")->capture_default_str()->check(
      CLI::PositiveNumber);
  cmd->add_option("--shift-eps1", c.shift.eps1, "Diagonal shift on L+_sym")->capture_default_str()->check(
      CLI::PositiveNumber);
  cmd->add_option("--shift-eps2", c.shift.eps2, "Diagonal shift on Q-_sym")->capture_default_str()->check(
      CLI::PositiveNumber);
  cmd->add_option("--kmeans-restarts", c.kmeans_restarts, "k-means restarts")->capture_default_str()->check(
      CLI::PositiveNumber);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral clustering of signed graphs with the geometric mean of Laplacians"};
  app.require_subcommand(1);

  RegionConfig region;
  auto* c_region = app.add_subcommand("sbm-region", "Share of SBM parameter space where chi is the bottom eigenspace");
  add_common(c_region, region.common);
  c_region->add_option("--k", region.ks, "Cluster counts")->capture_default_str();
  c_region->add_option("--steps", region.steps, "Grid points per probability axis (>= 2)")->capture_default_str();
  c_region->add_option("--conditioning", region.conditionings,
                       "Conditioning events: all, e_bal, e_plus_or_minus, e_plus_and_minus")
      ->capture_default_str();
  c_region->add_option("--target", region.targets, "Target events: e_g, e_bal_and_vol")->capture_default_str();

  SbmClusterConfig sweep;
  auto* c_sweep = app.add_subcommand("sbm-cluster", "Clustering error on sampled SBM graphs");
  add_common(c_sweep, sweep.common);
  c_sweep->add_option("--k", sweep.params.k, "Number of clusters")->capture_default_str();
  c_sweep->add_option("--cluster-size", sweep.params.cluster_size, "Vertices per cluster")->capture_default_str();
  c_sweep->add_option("--p-in-plus", sweep.params.p_in_plus)->capture_default_str();
  c_sweep->add_option("--p-out-plus", sweep.params.p_out_plus)->capture_default_str();
  c_sweep->add_option("--p-in-minus", sweep.params.p_in_minus)->capture_default_str();
  c_sweep->add_option("--p-out-minus", sweep.params.p_out_minus)->capture_default_str();
  c_sweep->add_option("--methods", sweep.methods, "Any of SN, BN, AM, GM")->capture_default_str();
  c_sweep->add_option("--runs", sweep.runs, "Samples per method")->capture_default_str();
  c_sweep->add_option("--ipm-max-iter", sweep.ipm_max_iter, "Inverse-iteration steps per eigenpair")
      ->capture_default_str();

  ClusterConfig cl;
  auto* c_cluster = app.add_subcommand("cluster", "Cluster an edge list or a point cloud");
  add_common(c_cluster, cl.common);
  c_cluster->add_option("--edges", cl.edges, "Edge list: 'i j w' per line, negative w for negative edges");
  c_cluster->add_option("--points", cl.points, "Point cloud: one point per row");
  c_cluster->add_option("--k-plus", cl.k_plus, "Nearest neighbours forming W+")->capture_default_str();
  c_cluster->add_option("--k-minus", cl.k_minus, "Farthest neighbours forming W-")->capture_default_str();
  c_cluster->add_option("--symmetrization", cl.symmetrization, "union or intersection")->capture_default_str();
  c_cluster->add_option("--method", cl.method, "SN, BN, AM or GM")->capture_default_str();
  c_cluster->add_option("--k", cl.k, "Number of clusters")->capture_default_str();
  c_cluster->add_option("--truth", cl.truth, "Ground-truth labels, one per line");
  c_cluster->add_option("--labels-out", cl.labels_out, "JSON labels path (default stdout)");
  c_cluster->add_option("--ipm-max-iter", cl.ipm_max_iter, "Inverse-iteration steps per eigenpair")
      ->capture_default_str();

  BenchConfig bench;
  bench.common.threads = 1;
  auto* c_bench = app.add_subcommand(
      "bench",
      "Time the smallest eigenvector on two-perfect-cluster graphs. Density is set by a target average degree "
      "instead of a fixed edge percentage, which would not fit in memory at large n. Always single-threaded.");
  add_common(c_bench, bench.common);
  c_bench->add_option("--n", bench.ns, "Ascending graph sizes (even)")->capture_default_str();
  c_bench->add_option("--avg-degree", bench.avg_degree, "Expected degree per vertex")->capture_default_str();
  c_bench->add_option("--methods", bench.methods, "Any of SN, BN, AM, GM")->capture_default_str();
  c_bench->add_option("--reps", bench.reps, "Timed repetitions per cell")->capture_default_str();
  c_bench->add_option("--ipm-max-iter", bench.ipm_max_iter, "Inverse-iteration steps")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (c_region->parsed()) {
      OutputFile out(region.common.out);
      run_sbm_region(region, out.stream());
    } else if (c_sweep->parsed()) {
      OutputFile out(sweep.common.out);
      run_sbm_cluster(sweep, out.stream());
    } else if (c_cluster->parsed()) {
      OutputFile out(cl.common.out);
      OutputFile labels(cl.labels_out.empty() ? "-" : cl.labels_out);
      const auto res = run_cluster(cl, out.stream(), labels.stream());
      if (!res.converged) std::cerr << "warning: eigensolver stopped at the iteration limit\n";
    } else if (c_bench->parsed()) {
      bench.common.threads = 1;
      OutputFile out(bench.common.out);
      run_bench(bench, out.stream());
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NonConvergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IndefiniteError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    // Remaining failures are file-system problems.
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
