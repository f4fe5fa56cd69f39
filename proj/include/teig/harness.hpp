#pragma once

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "teig/pairspace.hpp"
#include "teig/rng.hpp"
#include "teig/solvers.hpp"
#include "teig/symtensor.hpp"
#include "teig/tensor_io.hpp"

namespace teig {

/// One multi-start campaign: a problem tensor (benchmark example or file),
/// a B choice, the methods to compare, and the run/seed plan. Every method
/// is started from the same x0 set, so per-run comparisons are paired.
struct ExperimentSpec {
  std::optional<int> example_id;
  std::optional<std::string> tensor_file;
  int n = 0;                       // dimension for generated examples
  std::optional<double> b_param;   // example 7 scalar
  std::string b_spec = "zidentity";  // zidentity | hidentity | tensor file path
  std::vector<Method> methods;
  int runs = 1;
  std::uint64_t seed = 0;
  SolverConfig config;

  void validate() const {
    if (runs < 1) throw std::invalid_argument("ExperimentSpec: runs must be >= 1");
    if (example_id.has_value() == tensor_file.has_value())
      throw std::invalid_argument("ExperimentSpec: exactly one of example_id / tensor_file");
    if (methods.empty()) throw std::invalid_argument("ExperimentSpec: no methods requested");
    for (Method m : methods)
      if (m == Method::shopm && b_spec != "zidentity")
        throw std::invalid_argument("ExperimentSpec: shopm supports only the Z-identity B");
    config.validate();
  }
};

struct RunRecord {
  int run = 0;
  std::uint64_t stream_seed = 0;
  Vector x0;
  Method method = Method::ag;
  double lambda = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::max_iters;
  double final_dlambda = 0.0;
  double residual = 0.0;
  double wall_time = 0.0;
  std::string error;  // nonempty when the solver threw; such runs carry no lambda

  bool converged() const {
    return error.empty() &&
           (status == SolveStatus::converged_lambda || status == SolveStatus::converged_grad);
  }
};

struct SummaryRow {
  std::string method;
  double occ_pct = 0.0;      // share of runs in the extremal-lambda cluster
  double lambda = 0.0;       // extremal cluster center
  double median_iters = 0.0; // over converged runs; over all runs when none converged
  double mean_dlambda = 0.0;
  double mean_residual = 0.0;
  double mean_time_s = 0.0;
  int nonconverged = 0;
};

inline SymTensor load_problem_tensor(const ExperimentSpec& spec) {
  if (spec.tensor_file) return load_tensor_file(*spec.tensor_file);
  return generate_example(*spec.example_id, spec.n, spec.b_param);
}

inline BOperator make_b_operator(const std::string& b_spec, int order, int dim) {
  if (b_spec == "zidentity") return BOperator::z_identity(order, dim);
  if (b_spec == "hidentity") return BOperator::h_identity(order, dim);
  SymTensor b = load_tensor_file(b_spec);
  if (b.order() != order || b.dim() != dim)
    throw std::invalid_argument("make_b_operator: B tensor shape differs from A");
  return BOperator::dense(std::move(b));
}

/// Campaign parallelism bound; unset or 1 means single-threaded.
inline int env_thread_count() {
  const char* v = std::getenv("TEIG_THREADS");
  if (!v) return 1;
  int n = std::atoi(v);
  return n < 1 ? 1 : n;
}

namespace detail {

inline Vector draw_start(RandomStream& rng, int n) {
  Vector x(n);
  for (double& v : x) v = rng.symmetric();
  // all methods need unit iterates, so starts are normalized after sampling
  return normalized(x);
}

inline RunRecord run_one(const SymTensor& a, const BOperator& b, Method method, int run,
                         std::uint64_t stream_seed, const Vector& x0, const SolverConfig& cfg) {
  RunRecord rec;
  rec.run = run;
  rec.stream_seed = stream_seed;
  rec.x0 = x0;
  rec.method = method;
  try {
    SolveResult res = solve(method, a, b, x0, cfg);
    rec.lambda = res.pair.lambda;
    rec.iterations = res.iterations;
    rec.status = res.status;
    rec.final_dlambda = res.final_dlambda;
    rec.residual = res.pair.residual;
    rec.wall_time = res.wall_time;
  } catch (const std::exception& e) {
    rec.error = e.what();
    rec.lambda = std::numeric_limits<double>::quiet_NaN();
  }
  return rec;
}

}  // namespace detail

/// Runs the campaign. Results are indexed run-major, method-minor, filled
/// into preassigned slots, so thread scheduling cannot reorder or alter the
/// output; a fatal solver error is recorded on its run, never aborting the
/// campaign. Degenerate draws (all-zero x0) are retried on the same stream.
inline std::vector<RunRecord> run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const SymTensor a = load_problem_tensor(spec);
  const BOperator b = make_b_operator(spec.b_spec, a.order(), a.dim());
  const int nm = static_cast<int>(spec.methods.size());

  std::vector<RunRecord> records(static_cast<std::size_t>(spec.runs) * nm);
  auto work = [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      std::uint64_t stream_seed = derive_stream_seed(spec.seed, static_cast<std::uint64_t>(i));
      RandomStream rng(stream_seed);
      Vector x0;
      for (int attempt = 0;; ++attempt) {
        Vector raw(a.dim());
        for (double& v : raw) v = rng.symmetric();
        double nrm = norm2(raw);
        if (nrm > 0.0) {
          x0 = scaled(raw, 1.0 / nrm);
          break;
        }
        if (attempt > 8) throw std::runtime_error("run_experiment: degenerate RNG stream");
      }
      for (int mi = 0; mi < nm; ++mi)
        records[static_cast<std::size_t>(i) * nm + mi] =
            detail::run_one(a, b, spec.methods[mi], i, stream_seed, x0, spec.config);
    }
  };

  int threads = std::min(env_thread_count(), spec.runs);
  if (threads <= 1) {
    work(0, spec.runs);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    int chunk = (spec.runs + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      int lo = t * chunk, hi = std::min(spec.runs, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return records;
}

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Cluster {
  double center = 0.0;
  int count = 0;
};

// Greedy 1-D clustering of terminal lambdas: values within tol of a
// cluster's first (largest) member join it; centers are member means.
inline std::vector<Cluster> cluster_lambdas(std::vector<double> v, double tol) {
  std::sort(v.begin(), v.end(), std::greater<>());
  std::vector<Cluster> out;
  std::size_t i = 0;
  while (i < v.size()) {
    double head = v[i];
    double sum = 0.0;
    int count = 0;
    while (i < v.size() && head - v[i] <= tol) {
      sum += v[i];
      ++count;
      ++i;
    }
    out.push_back({sum / count, count});
  }
  return out;
}

}  // namespace detail

/// Aggregates a campaign into one row per method. The extremal cluster is
/// the largest center for maximization and the smallest for minimization;
/// occurrence is its share of all runs of that method. Runs that did not
/// converge still contribute their terminal lambda to the clustering (GEAP
/// at max_iters reports a meaningful lambda), but are excluded from the
/// iteration median and counted in nonconverged.
inline std::vector<SummaryRow> aggregate(const std::vector<RunRecord>& records,
                                         double lambda_cluster_tol = 1e-4,
                                         Sense sense = Sense::max) {
  if (records.empty()) throw std::invalid_argument("aggregate: no records");

  std::vector<Method> order;
  for (const RunRecord& r : records)
    if (std::find(order.begin(), order.end(), r.method) == order.end()) order.push_back(r.method);

  std::vector<SummaryRow> rows;
  for (Method m : order) {
    SummaryRow row;
    row.method = to_string(m);
    std::vector<double> lambdas, conv_iters, all_iters;
    double sum_dl = 0.0, sum_res = 0.0, sum_time = 0.0;
    int total = 0, valid = 0;
    for (const RunRecord& r : records) {
      if (r.method != m) continue;
      ++total;
      if (!r.error.empty()) {
        ++row.nonconverged;
        continue;
      }
      ++valid;
      lambdas.push_back(r.lambda);
      all_iters.push_back(r.iterations);
      if (r.converged())
        conv_iters.push_back(r.iterations);
      else
        ++row.nonconverged;
      sum_dl += r.final_dlambda;
      sum_res += r.residual;
      sum_time += r.wall_time;
    }
    if (valid > 0) {
      auto clusters = detail::cluster_lambdas(lambdas, lambda_cluster_tol);
      const detail::Cluster& extremal = sense == Sense::max ? clusters.front() : clusters.back();
      row.lambda = extremal.center;
      row.occ_pct = 100.0 * extremal.count / total;
      row.median_iters = detail::median(conv_iters.empty() ? all_iters : conv_iters);
      row.mean_dlambda = sum_dl / valid;
      row.mean_residual = sum_res / valid;
      row.mean_time_s = sum_time / valid;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace detail {

// Shortest round-trip formatting: byte-stable and exact under reparse.
inline std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string fmt(int v) { return std::to_string(v); }

}  // namespace detail

inline std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "method,occ_pct,lambda,median_iters,mean_dlambda,mean_residual,mean_time_s,nonconverged\n";
  for (const SummaryRow& r : rows) {
    out += r.method;
    out += ',' + detail::fmt(r.occ_pct);
    out += ',' + detail::fmt(r.lambda);
    out += ',' + detail::fmt(r.median_iters);
    out += ',' + detail::fmt(r.mean_dlambda);
    out += ',' + detail::fmt(r.mean_residual);
    out += ',' + detail::fmt(r.mean_time_s);
    out += ',' + detail::fmt(r.nonconverged);
    out += '\n';
  }
  return out;
}

inline std::vector<SummaryRow> parse_summary_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("parse_summary_csv: empty input");
  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    SummaryRow r;
    std::getline(ls, r.method, ',');
    auto next = [&]() {
      if (!std::getline(ls, field, ',')) throw std::invalid_argument("parse_summary_csv: short row");
      return std::stod(field);
    };
    r.occ_pct = next();
    r.lambda = next();
    r.median_iters = next();
    r.mean_dlambda = next();
    r.mean_residual = next();
    r.mean_time_s = next();
    r.nonconverged = static_cast<int>(next());
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::string runs_csv(const std::vector<RunRecord>& records) {
  std::string out = "run,method,stream_seed,lambda,iterations,status,final_dlambda,residual,time_s,error\n";
  for (const RunRecord& r : records) {
    out += detail::fmt(r.run);
    out += ',';
    out += to_string(r.method);
    out += ',' + std::to_string(r.stream_seed);
    out += ',' + detail::fmt(r.lambda);
    out += ',' + detail::fmt(r.iterations);
    out += ',';
    out += to_string(r.status);
    out += ',' + detail::fmt(r.final_dlambda);
    out += ',' + detail::fmt(r.residual);
    out += ',' + detail::fmt(r.wall_time);
    out += ',' + r.error;
    out += '\n';
  }
  return out;
}

inline std::string trace_csv(const std::vector<IterRecord>& trace) {
  std::string out = "k,lambda,f,grad_norm,alpha,backtracks,elapsed_s\n";
  for (const IterRecord& r : trace) {
    out += detail::fmt(r.k);
    out += ',' + detail::fmt(r.lambda);
    out += ',' + detail::fmt(r.f);
    out += ',' + detail::fmt(r.grad_norm);
    out += ',' + detail::fmt(r.alpha);
    out += ',' + detail::fmt(r.backtracks);
    out += ',' + detail::fmt(r.elapsed);
    out += '\n';
  }
  return out;
}

}  // namespace teig
