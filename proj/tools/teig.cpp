// teig: generalized tensor eigenpair solver and benchmark driver.
//
//   teig gen    --example K --n N [--b B] [--out FILE]
//   teig solve  (--example K | --tensor FILE) --b BSPEC --method M [--x0 ...]
//   teig bench  (--example K | --tensor FILE) --b BSPEC --methods M1,M2 --runs R
//
// BSPEC is zidentity, hidentity, or a tensor JSON file. Exit codes: 0 on
// success (including max_iters outcomes), 1 on a fatal solver error, 2 on
// bad arguments or unusable inputs.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "teig/harness.hpp"

namespace {

using namespace teig;

std::vector<double> parse_vector(const std::string& csv) {
  std::vector<double> out;
  std::istringstream in(csv);
  std::string field;
  while (std::getline(in, field, ',')) {
    std::size_t used = 0;
    out.push_back(std::stod(field, &used));
    if (used != field.size()) throw std::invalid_argument("bad vector component: " + field);
  }
  if (out.empty()) throw std::invalid_argument("empty vector");
  return out;
}

std::vector<Method> parse_methods(const std::string& csv) {
  std::vector<Method> out;
  std::istringstream in(csv);
  std::string name;
  while (std::getline(in, name, ',')) {
    auto m = method_from_string(name);
    if (!m) throw std::invalid_argument("unknown method: " + name);
    out.push_back(*m);
  }
  if (out.empty()) throw std::invalid_argument("no methods given");
  return out;
}

struct ProblemArgs {
  std::string tensor_file;
  int example = 0;
  int n = 0;
  double b_param = 0.0;
  bool has_b_param = false;
};

void add_problem_flags(CLI::App* cmd, ProblemArgs& p) {
  auto* tensor = cmd->add_option("--tensor", p.tensor_file, "tensor JSON file");
  auto* example = cmd->add_option("--example", p.example, "benchmark example id (1..7)");
  cmd->add_option("--n", p.n, "dimension for generated examples (example 1 fixes n=3)");
  auto* bp = cmd->add_option("--bparam", p.b_param, "example 7 scalar parameter b");
  tensor->excludes(example);
  example->excludes(tensor);
  bp->each([&p](const std::string&) { p.has_b_param = true; });
}

SymTensor resolve_tensor(const ProblemArgs& p) {
  if (!p.tensor_file.empty()) return load_tensor_file(p.tensor_file);
  if (p.example == 0) throw std::invalid_argument("one of --tensor / --example is required");
  int n = p.n;
  if (n == 0) {
    if (p.example == 1)
      n = 3;
    else
      throw std::invalid_argument("--n is required for examples 2..7");
  }
  std::optional<double> b;
  if (p.has_b_param) b = p.b_param;
  return generate_example(p.example, n, b);
}

struct SolverArgs {
  std::string sense = "max";
  double rho = 1e-3, tau = 1e-6, tol_lambda = 1e-10, tol_grad = 1e-8, tol_residual = 1e-6;
  int max_iters = 500;
};

void add_solver_flags(CLI::App* cmd, SolverArgs& s) {
  cmd->add_option("--sense", s.sense, "max or min")->check(CLI::IsMember({"max", "min"}));
  cmd->add_option("--rho", s.rho, "sufficient-increase parameter");
  cmd->add_option("--tau", s.tau, "GEAP definiteness tolerance");
  cmd->add_option("--tol-lambda", s.tol_lambda, "stop tolerance on |dlambda|");
  cmd->add_option("--tol-grad", s.tol_grad, "stop tolerance on |g|");
  cmd->add_option("--tol-residual", s.tol_residual, "eigenpair residual confirming a lambda stop");
  cmd->add_option("--max-iters", s.max_iters, "iteration cap");
}

SolverConfig make_config(const SolverArgs& s) {
  SolverConfig cfg;
  cfg.sense = s.sense == "min" ? Sense::min : Sense::max;
  cfg.rho = s.rho;
  cfg.tau = s.tau;
  cfg.tol_lambda = s.tol_lambda;
  cfg.tol_grad = s.tol_grad;
  cfg.tol_residual = s.tol_residual;
  cfg.max_iters = s.max_iters;
  return cfg;
}

int cmd_gen(const ProblemArgs& p, const std::string& out) {
  SymTensor t = resolve_tensor(p);
  std::string json = tensor_to_json(t);
  if (out.empty())
    std::fputs(json.c_str(), stdout);
  else
    write_file_atomic(out, json);
  return 0;
}

int cmd_solve(const ProblemArgs& p, const SolverArgs& sa, const std::string& b_spec,
              const std::string& method_name, const std::string& x0_csv, std::uint64_t seed,
              const std::string& trace_file) {
  SymTensor a = resolve_tensor(p);
  BOperator b = make_b_operator(b_spec, a.order(), a.dim());
  auto method = method_from_string(method_name);
  if (!method) throw std::invalid_argument("unknown method: " + method_name);
  Vector x0;
  if (!x0_csv.empty()) {
    x0 = parse_vector(x0_csv);
    if (static_cast<int>(x0.size()) != a.dim())
      throw std::invalid_argument("--x0 length does not match the tensor dimension");
  } else {
    RandomStream rng = run_stream(seed, 0);
    x0.resize(a.dim());
    for (double& v : x0) v = rng.symmetric();
  }
  SolverConfig cfg = make_config(sa);

  // construction is done; from here failures are solver-fatal (exit 1)
  try {
    SolveResult r = solve(*method, a, b, x0, cfg);
    std::printf("lambda = %.10g\niterations = %d\nstatus = %s\nresidual = %.6e\nwall_time_s = %.6f\n",
                r.pair.lambda, r.iterations, to_string(r.status), r.pair.residual, r.wall_time);
    if (!r.note.empty()) std::printf("note = %s\n", r.note.c_str());
    if (!trace_file.empty()) write_file_atomic(trace_file, trace_csv(r.trace));
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 1;
  }
}

int cmd_bench(const ProblemArgs& p, const SolverArgs& sa, const std::string& b_spec,
              const std::string& methods_csv, int runs, std::uint64_t seed, double cluster_tol,
              const std::string& out, const std::string& dump) {
  ExperimentSpec spec;
  if (!p.tensor_file.empty()) {
    spec.tensor_file = p.tensor_file;
  } else {
    if (p.example == 0) throw std::invalid_argument("one of --tensor / --example is required");
    spec.example_id = p.example;
    spec.n = p.n != 0 ? p.n : (p.example == 1 ? 3 : 0);
    if (spec.n == 0) throw std::invalid_argument("--n is required for examples 2..7");
    if (p.has_b_param) spec.b_param = p.b_param;
  }
  spec.b_spec = b_spec;
  spec.methods = parse_methods(methods_csv);
  spec.runs = runs;
  spec.seed = seed;
  spec.config = make_config(sa);
  spec.validate();

  auto records = run_experiment(spec);
  std::string csv = summary_csv(aggregate(records, cluster_tol, spec.config.sense));
  if (out.empty())
    std::fputs(csv.c_str(), stdout);
  else
    write_file_atomic(out, csv);
  if (!dump.empty()) write_file_atomic(dump, runs_csv(records));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"generalized tensor eigenpair solvers (S-HOPM, GEAP, adaptive gradient)"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "write a benchmark tensor as JSON");
  ProblemArgs gen_p;
  int gen_example = 0, gen_n = 0;
  double gen_b = 0.0;
  bool gen_has_b = false;
  std::string gen_out;
  gen->add_option("--example", gen_example, "benchmark example id (1..7)")->required();
  gen->add_option("--n", gen_n, "dimension (example 1 fixes n=3)");
  gen->add_option("--b", gen_b, "example 7 scalar parameter b")
      ->each([&gen_has_b](const std::string&) { gen_has_b = true; });
  gen->add_option("--out", gen_out, "output file (stdout when omitted)");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "run one solve and print the eigenpair");
  ProblemArgs solve_p;
  SolverArgs solve_s;
  std::string solve_b = "zidentity", solve_method = "ag", solve_x0, solve_trace;
  std::uint64_t solve_seed = 0;
  add_problem_flags(solve_cmd, solve_p);
  add_solver_flags(solve_cmd, solve_s);
  solve_cmd->add_option("--b", solve_b, "B operator: zidentity, hidentity, or tensor JSON file");
  solve_cmd->add_option("--method", solve_method, "shopm, geap, or ag");
  solve_cmd->add_option("--x0", solve_x0, "starting vector v1,v2,... (random when omitted)");
  solve_cmd->add_option("--seed", solve_seed, "seed for the random start");
  solve_cmd->add_option("--trace", solve_trace, "write the per-iteration trace CSV here");

  // bench
  auto* bench = app.add_subcommand("bench", "multi-start campaign with summary CSV");
  ProblemArgs bench_p;
  SolverArgs bench_s;
  std::string bench_b = "zidentity", bench_methods = "ag", bench_out, bench_dump;
  int bench_runs = 100;
  std::uint64_t bench_seed = 0;
  double bench_cluster_tol = 1e-4;
  add_problem_flags(bench, bench_p);
  add_solver_flags(bench, bench_s);
  bench->add_option("--b", bench_b, "B operator: zidentity, hidentity, or tensor JSON file");
  bench->add_option("--methods", bench_methods, "comma-separated list: shopm,geap,ag");
  bench->add_option("--runs", bench_runs, "number of random starts");
  bench->add_option("--seed", bench_seed, "campaign seed");
  bench->add_option("--cluster-tol", bench_cluster_tol, "lambda clustering tolerance");
  bench->add_option("--out", bench_out, "summary CSV file (stdout when omitted)");
  bench->add_option("--dump", bench_dump, "per-run CSV file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) {
      gen_p.example = gen_example;
      gen_p.n = gen_n;
      gen_p.b_param = gen_b;
      gen_p.has_b_param = gen_has_b;
      return cmd_gen(gen_p, gen_out);
    }
    if (solve_cmd->parsed())
      return cmd_solve(solve_p, solve_s, solve_b, solve_method, solve_x0, solve_seed, solve_trace);
    if (bench->parsed())
      return cmd_bench(bench_p, bench_s, bench_b, bench_methods, bench_runs, bench_seed,
                       bench_cluster_tol, bench_out, bench_dump);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
