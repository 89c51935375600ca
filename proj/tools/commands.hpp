#ifndef SGM_TOOLS_COMMANDS_HPP
#define SGM_TOOLS_COMMANDS_HPP

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "sgm/sgm.hpp"

namespace sgm::cli {

using json = nlohmann::json;

/// Thrown for bad flag values that CLI11 cannot catch on its own.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::uint64_t seed = 0;
  std::size_t threads = 0;  ///< 0 = all cores
  std::string out = "-";
  double tol = 1e-6;
  ShiftConfig shift;
  std::size_t kmeans_restarts = 10;
};

inline json common_json(const CommonOptions& c) {
  return {{"seed", c.seed},       {"threads", c.threads},          {"tol", c.tol},
          {"shift_eps1", c.shift.eps1}, {"shift_eps2", c.shift.eps2}, {"kmeans_restarts", c.kmeans_restarts}};
}

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline std::string fmt_or_na(std::optional<double> x) { return x ? fmt(*x) : "NA"; }

inline std::optional<double> median(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// "-" is stdout; anything else is opened for writing.
class OutputFile {
public:
  explicit OutputFile(const std::string& path) {
    if (path != "-") {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
  std::ofstream file_;
};

inline void write_config_line(std::ostream& os, const json& cfg) { os << "# " << cfg.dump() << "\n"; }

inline SpectralOptions spectral_options(const CommonOptions& c, std::size_t ipm_max_iter) {
  SpectralOptions o;
  o.shift = c.shift;
  o.ipm.tol = c.tol;
  o.ipm.max_iter = ipm_max_iter;
  o.kmeans.restarts = c.kmeans_restarts;
  o.kmeans.threads = 1;
  return o;
}

// ---------------------------------------------------------------- sbm-region

inline Conditioning parse_conditioning(const std::string& s) {
  if (s == "all") return Conditioning::all;
  if (s == "e_bal") return Conditioning::e_bal;
  if (s == "e_plus_or_minus") return Conditioning::e_plus_or_minus;
  if (s == "e_plus_and_minus") return Conditioning::e_plus_and_minus;
  throw UsageError("unknown conditioning '" + s + "' (all, e_bal, e_plus_or_minus, e_plus_and_minus)");
}

inline RegionTarget parse_target(const std::string& s) {
  if (s == "e_g") return RegionTarget::e_g;
  if (s == "e_bal_and_vol") return RegionTarget::e_bal_and_vol;
  throw UsageError("unknown target '" + s + "' (e_g, e_bal_and_vol)");
}

struct RegionConfig {
  CommonOptions common;
  std::vector<std::size_t> ks{2, 3, 4, 5};
  std::size_t steps = 20;
  std::vector<std::string> conditionings{"all", "e_bal", "e_plus_or_minus", "e_plus_and_minus"};
  std::vector<std::string> targets{"e_g", "e_bal_and_vol"};
};

inline json to_json(const RegionConfig& c) {
  json j = common_json(c.common);
  j["command"] = "sbm-region";
  j["k"] = c.ks;
  j["steps"] = c.steps;
  j["conditioning"] = c.conditionings;
  j["target"] = c.targets;
  return j;
}

inline void run_sbm_region(const RegionConfig& cfg, std::ostream& os) {
  if (cfg.steps < 2) throw UsageError("--steps must be >= 2");
  for (auto k : cfg.ks)
    if (k < 2) throw UsageError("every k must be >= 2");
  struct Cell {
    std::size_t k;
    Conditioning cond;
    RegionTarget target;
  };
  std::vector<Cell> cells;
  for (auto k : cfg.ks)
    for (const auto& c : cfg.conditionings)
      for (const auto& t : cfg.targets) cells.push_back({k, parse_conditioning(c), parse_target(t)});

  std::vector<std::optional<RegionFraction>> results(cells.size());
  parallel_for(cells.size(), cfg.common.threads, [&](std::size_t i) {
    try {
      results[i] = region_fraction(cells[i].k, cfg.steps, cells[i].cond, cells[i].target);
    } catch (const std::domain_error&) {
      results[i] = std::nullopt;
    }
  });

  write_config_line(os, to_json(cfg));
  os << "k,steps,conditioning,target,fraction,denominator_count\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    os << cells[i].k << ',' << cfg.steps << ',' << to_string(cells[i].cond) << ',' << to_string(cells[i].target)
       << ',';
    if (results[i])
      os << fmt(results[i]->fraction) << ',' << results[i]->denominator << '\n';
    else
      os << "NA,0\n";
  }
}

// --------------------------------------------------------------- sbm-cluster

struct SbmClusterConfig {
  CommonOptions common;
  SbmParams params{2, 100, 0.08, 0.02, 0.02, 0.08};
  std::vector<std::string> methods{"SN", "BN", "AM", "GM"};
  std::size_t runs = 50;
  std::size_t ipm_max_iter = 500;
};

inline json to_json(const SbmClusterConfig& c) {
  json j = common_json(c.common);
  j["command"] = "sbm-cluster";
  j["k"] = c.params.k;
  j["cluster_size"] = c.params.cluster_size;
  j["p_in_plus"] = c.params.p_in_plus;
  j["p_out_plus"] = c.params.p_out_plus;
  j["p_in_minus"] = c.params.p_in_minus;
  j["p_out_minus"] = c.params.p_out_minus;
  j["methods"] = c.methods;
  j["runs"] = c.runs;
  j["ipm_max_iter"] = c.ipm_max_iter;
  return j;
}

struct ClusterRun {
  std::optional<double> error;
  std::size_t iterations = 0;
  bool converged = false;
  std::string status = "ok";
  double seconds = 0.0;
};

struct SbmClusterSummary {
  std::vector<std::string> methods;
  std::vector<std::optional<double>> median_error;  ///< per method, over successful runs
};

/// Seed of the graph sample used by every method in run r.
inline std::uint64_t run_seed(std::uint64_t base, std::size_t r) { return derive_seed(base, r); }

inline SbmClusterSummary run_sbm_cluster(const SbmClusterConfig& cfg, std::ostream& os) {
  try {
    cfg.params.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (cfg.runs == 0) throw UsageError("--runs must be >= 1");
  std::vector<ClusterMethod> methods;
  for (const auto& m : cfg.methods) {
    try {
      methods.push_back(parse_cluster_method(m));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  const auto truth = planted_labels(cfg.params);
  const SpectralOptions opt = spectral_options(cfg.common, cfg.ipm_max_iter);

  // One graph per run, shared by all methods.
  std::vector<SignedGraph> graphs(cfg.runs);
  parallel_for(cfg.runs, cfg.common.threads,
               [&](std::size_t r) { graphs[r] = sample(cfg.params, run_seed(cfg.common.seed, r)); });

  const std::size_t cells = methods.size() * cfg.runs;
  std::vector<ClusterRun> runs(cells);
  parallel_for(cells, cfg.common.threads, [&](std::size_t i) {
    const std::size_t mi = i / cfg.runs, r = i % cfg.runs;
    ClusterRun& out = runs[i];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const auto res = spectral_cluster(graphs[r], cfg.params.k, methods[mi], run_seed(cfg.common.seed, r), opt);
      out.error = clustering_error(res.labels.labels, truth);
      out.iterations = res.embedding.iterations;
      out.converged = res.embedding.converged;
    } catch (const std::exception& e) {
      std::string what = e.what();
      std::replace(what.begin(), what.end(), ',', ';');
      out.status = "failed: " + what;
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  });

  write_config_line(os, to_json(cfg));
  os << "method,run,seed,error,iterations,converged,status,seconds\n";
  SbmClusterSummary summary;
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    std::vector<double> errors, secs;
    for (std::size_t r = 0; r < cfg.runs; ++r) {
      const auto& run = runs[mi * cfg.runs + r];
      os << to_string(methods[mi]) << ',' << r << ',' << run_seed(cfg.common.seed, r) << ',' << fmt_or_na(run.error)
         << ',' << run.iterations << ',' << (run.converged ? 1 : 0) << ',' << run.status << ',' << fmt(run.seconds)
         << '\n';
      if (run.error) errors.push_back(*run.error);
      secs.push_back(run.seconds);
    }
    const auto med = median(errors);
    os << to_string(methods[mi]) << ",median,NA," << fmt_or_na(med) << ",NA,NA," << errors.size() << "/" << cfg.runs
       << " ok," << fmt_or_na(median(secs)) << '\n';
    summary.methods.push_back(to_string(methods[mi]));
    summary.median_error.push_back(med);
  }
  return summary;
}

// ------------------------------------------------------------------- cluster

struct ClusterConfig {
  CommonOptions common;
  std::string edges;
  std::string points;
  std::size_t k_plus = 10;
  std::size_t k_minus = 10;
  std::string symmetrization = "union";
  std::string method = "GM";
  std::size_t k = 2;
  std::string truth;
  std::string labels_out;
  std::size_t ipm_max_iter = 500;
};

inline json to_json(const ClusterConfig& c) {
  json j = common_json(c.common);
  j["command"] = "cluster";
  j["edges"] = c.edges;
  j["points"] = c.points;
  j["k_plus"] = c.k_plus;
  j["k_minus"] = c.k_minus;
  j["symmetrization"] = c.symmetrization;
  j["method"] = c.method;
  j["k"] = c.k;
  j["truth"] = c.truth;
  j["ipm_max_iter"] = c.ipm_max_iter;
  return j;
}

struct ClusterOutcome {
  ClusterLabels labels;
  std::optional<double> error;
  bool converged = false;
};

/// Loads the input graph; numeric failures propagate as exceptions.
inline SignedGraph load_cluster_graph(const ClusterConfig& cfg) {
  if (cfg.edges.empty() == cfg.points.empty()) throw UsageError("give exactly one of --edges or --points");
  if (!cfg.edges.empty()) return load_edge_list(cfg.edges).graph;
  Symmetrization sym;
  if (cfg.symmetrization == "union")
    sym = Symmetrization::union_of;
  else if (cfg.symmetrization == "intersection")
    sym = Symmetrization::intersection_of;
  else
    throw UsageError("--symmetrization must be union or intersection");
  const Points pts = load_points(cfg.points);
  if (cfg.k_plus >= pts.rows() || cfg.k_minus >= pts.rows() || cfg.k_plus == 0 || cfg.k_minus == 0)
    throw UsageError("--k-plus and --k-minus must lie in [1, number of points)");
  return SignedGraph(knn_pos_graph(pts, cfg.k_plus, sym), kfn_neg_graph(pts, cfg.k_minus, sym));
}

inline ClusterOutcome run_cluster(const ClusterConfig& cfg, std::ostream& metrics, std::ostream& labels_json) {
  ClusterMethod method;
  try {
    method = parse_cluster_method(cfg.method);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const SignedGraph g = load_cluster_graph(cfg);
  if (cfg.k < 2 || cfg.k > g.size()) throw UsageError("--k must lie in [2, number of vertices]");
  std::vector<int> truth;
  if (!cfg.truth.empty()) {
    truth = load_labels(cfg.truth);
    if (truth.size() != g.size())
      throw UsageError("truth file has " + std::to_string(truth.size()) + " labels for " + std::to_string(g.size()) +
                       " vertices");
  }

  const auto t0 = std::chrono::steady_clock::now();
  const auto res = spectral_cluster(g, cfg.k, method, cfg.common.seed, spectral_options(cfg.common, cfg.ipm_max_iter));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  ClusterOutcome out{res.labels, std::nullopt, res.embedding.converged};
  if (!truth.empty()) out.error = clustering_error(res.labels.labels, truth);

  json lj;
  lj["method"] = cfg.method;
  lj["k"] = cfg.k;
  lj["labels"] = res.labels.labels;
  lj["sizes"] = res.labels.sizes();
  lj["empty_clusters"] = res.labels.has_empty_cluster;
  lj["error"] = out.error ? json(*out.error) : json(nullptr);
  labels_json << lj.dump() << "\n";

  write_config_line(metrics, to_json(cfg));
  metrics << "method,k,n,error,iterations,converged,empty_clusters,seconds\n";
  metrics << cfg.method << ',' << cfg.k << ',' << g.size() << ',' << fmt_or_na(out.error) << ','
          << res.embedding.iterations << ',' << (out.converged ? 1 : 0) << ','
          << (res.labels.has_empty_cluster ? 1 : 0) << ',' << fmt(secs) << '\n';
  return out;
}

// --------------------------------------------------------------------- bench

struct BenchConfig {
  CommonOptions common;
  std::vector<std::size_t> ns{1000, 2000, 5000};
  double avg_degree = 50.0;
  std::vector<std::string> methods{"SN", "GM"};
  std::size_t reps = 3;
  std::size_t ipm_max_iter = 500;
};

inline json to_json(const BenchConfig& c) {
  json j = common_json(c.common);
  j["command"] = "bench";
  j["n"] = c.ns;
  j["avg_degree"] = c.avg_degree;
  j["methods"] = c.methods;
  j["reps"] = c.reps;
  j["ipm_max_iter"] = c.ipm_max_iter;
  return j;
}

/// Two equal clusters, positive edges only inside and negative edges only
/// across, each vertex expecting `avg_degree` edges in total.
inline SignedGraph two_perfect_clusters(std::size_t n, double avg_degree, std::uint64_t seed) {
  if (n < 4 || n % 2) throw UsageError("bench sizes must be even and >= 4");
  const double p = avg_degree / static_cast<double>(n);
  if (!(p > 0.0 && p <= 1.0)) throw UsageError("--avg-degree must lie in (0, n]");
  SbmParams prm{2, n / 2, p, 0.0, 0.0, p};
  return sample(prm, seed);
}

struct BenchCell {
  std::size_t n;
  std::string method;
  std::optional<double> median_seconds;
  std::size_t iterations = 0;
  std::string status = "ok";
};

inline std::vector<BenchCell> run_bench(const BenchConfig& cfg, std::ostream& os) {
  if (cfg.reps == 0) throw UsageError("--reps must be >= 1");
  if (!std::is_sorted(cfg.ns.begin(), cfg.ns.end())) throw UsageError("--n must be ascending");
  std::vector<ClusterMethod> methods;
  for (const auto& m : cfg.methods) {
    try {
      methods.push_back(parse_cluster_method(m));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  SpectralOptions opt = spectral_options(cfg.common, cfg.ipm_max_iter);
  std::vector<BenchCell> cells;
  for (std::size_t ni = 0; ni < cfg.ns.size(); ++ni) {
    const std::size_t n = cfg.ns[ni];
    const SignedGraph g = two_perfect_clusters(n, cfg.avg_degree, derive_seed(cfg.common.seed, ni));
    for (auto m : methods) {
      BenchCell cell{n, to_string(m), std::nullopt, 0, "ok"};
      std::vector<double> times;
      try {
        for (std::size_t r = 0; r < cfg.reps; ++r) {
          const auto t0 = std::chrono::steady_clock::now();
          const auto emb = spectral_embedding(g, 1, m, derive_seed(cfg.common.seed, r), opt);
          times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
          cell.iterations = emb.iterations;
          if (!emb.converged) cell.status = "unconverged";
        }
        cell.median_seconds = median(times);
      } catch (const std::bad_alloc&) {
        cell.status = "out of memory";
      } catch (const std::exception& e) {
        std::string what = e.what();
        std::replace(what.begin(), what.end(), ',', ';');
        cell.status = "failed: " + what;
      }
      cells.push_back(cell);
    }
  }
  write_config_line(os, to_json(cfg));
  os << "n,method,median_seconds,iterations,status\n";
  for (const auto& c : cells)
    os << c.n << ',' << c.method << ',' << fmt_or_na(c.median_seconds) << ',' << c.iterations << ',' << c.status
       << '\n';
  return cells;
}

} // namespace sgm::cli

#endif // SGM_TOOLS_COMMANDS_HPP
