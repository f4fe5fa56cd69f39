#include <catch2/catch.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "teig/harness.hpp"

using namespace teig;

namespace {

ExperimentSpec base_spec(int ex, int n, const char* b, std::vector<Method> ms, int runs,
                         std::uint64_t seed) {
  ExperimentSpec s;
  s.example_id = ex;
  s.n = n;
  s.b_spec = b;
  s.methods = std::move(ms);
  s.runs = runs;
  s.seed = seed;
  return s;
}

bool records_equal_ignoring_time(const std::vector<RunRecord>& a, const std::vector<RunRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].run != b[i].run || a[i].method != b[i].method || a[i].x0 != b[i].x0 ||
        a[i].lambda != b[i].lambda || a[i].iterations != b[i].iterations ||
        a[i].status != b[i].status || a[i].final_dlambda != b[i].final_dlambda ||
        a[i].residual != b[i].residual || a[i].error != b[i].error)
      return false;
  }
  return true;
}

std::string mask_time_column(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  bool header = true;
  while (std::getline(in, line)) {
    if (!header) {
      // time_s is the 7th comma-separated field
      std::size_t pos = 0;
      for (int c = 0; c < 6; ++c) pos = line.find(',', pos) + 1;
      std::size_t end = line.find(',', pos);
      line = line.substr(0, pos) + "T" + line.substr(end);
    }
    header = false;
    out += line + "\n";
  }
  return out;
}

}  // namespace

TEST_CASE("run_experiment pairs methods on identical starts") {
  auto spec = base_spec(1, 3, "zidentity", {Method::ag, Method::geap}, 10, 42);
  auto recs = run_experiment(spec);
  REQUIRE(recs.size() == 20);
  for (int i = 0; i < 10; ++i) {
    CHECK(recs[2 * i].method == Method::ag);
    CHECK(recs[2 * i + 1].method == Method::geap);
    CHECK(recs[2 * i].run == i);
    CHECK(recs[2 * i].x0 == recs[2 * i + 1].x0);  // same start, bitwise
    CHECK(std::abs(norm2(recs[2 * i].x0) - 1.0) <= 1e-12);
  }
}

TEST_CASE("run_experiment is deterministic") {
  auto spec = base_spec(2, 5, "zidentity", {Method::ag}, 8, 7);
  auto r1 = run_experiment(spec);
  auto r2 = run_experiment(spec);
  CHECK(records_equal_ignoring_time(r1, r2));
}

TEST_CASE("run_experiment is deterministic under campaign parallelism") {
  auto spec = base_spec(3, 5, "zidentity", {Method::ag, Method::geap}, 12, 9);
  auto serial = run_experiment(spec);
#ifdef _WIN32
  _putenv_s("TEIG_THREADS", "2");
#else
  setenv("TEIG_THREADS", "2", 1);
#endif
  auto threaded = run_experiment(spec);
#ifdef _WIN32
  _putenv_s("TEIG_THREADS", "");
#else
  unsetenv("TEIG_THREADS");
#endif
  CHECK(records_equal_ignoring_time(serial, threaded));
}

TEST_CASE("geap campaign on example 5 mostly hits the iteration cap") {
  auto spec = base_spec(5, 5, "hidentity", {Method::geap}, 30, 42);
  auto recs = run_experiment(spec);
  int capped = 0;
  for (const auto& r : recs)
    if (r.status == SolveStatus::max_iters) ++capped;
  CHECK(capped >= 24);
}

TEST_CASE("run_experiment validation") {
  ExperimentSpec s;
  CHECK_THROWS_AS(run_experiment(s), std::invalid_argument);  // no problem selected
  s = base_spec(1, 3, "hidentity", {Method::shopm}, 1, 0);
  CHECK_THROWS_AS(run_experiment(s), std::invalid_argument);  // shopm needs Z
  s = base_spec(1, 3, "zidentity", {Method::ag}, 0, 0);
  CHECK_THROWS_AS(run_experiment(s), std::invalid_argument);  // runs >= 1
}

TEST_CASE("aggregate") {
  auto rec = [](double lam, int iters, SolveStatus st) {
    RunRecord r;
    r.method = Method::ag;
    r.lambda = lam;
    r.iterations = iters;
    r.status = st;
    r.final_dlambda = 1e-11;
    r.residual = 1e-8;
    r.wall_time = 0.001;
    return r;
  };

  SECTION("all runs at one lambda") {
    std::vector<RunRecord> recs(10, rec(0.8, 10, SolveStatus::converged_lambda));
    auto rows = aggregate(recs);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].occ_pct == 100.0);
    CHECK(rows[0].lambda == Approx(0.8));
    CHECK(rows[0].median_iters == 10.0);
    CHECK(rows[0].nonconverged == 0);
  }
  SECTION("two clusters count correctly") {
    std::vector<RunRecord> recs;
    for (int i = 0; i < 600; ++i) recs.push_back(rec(1.0 + 1e-6 * (i % 3), 5, SolveStatus::converged_lambda));
    for (int i = 0; i < 400; ++i) recs.push_back(rec(0.5, 7, SolveStatus::converged_lambda));
    auto rows = aggregate(recs);
    CHECK(rows[0].occ_pct == Approx(60.0));
    CHECK(rows[0].lambda == Approx(1.0).margin(1e-5));
    // occurrence count is an integer number of runs
    double count = rows[0].occ_pct * 1000 / 100.0;
    CHECK(count == Approx(std::round(count)).margin(1e-9));
  }
  SECTION("min sense picks the smallest cluster center") {
    std::vector<RunRecord> recs;
    for (int i = 0; i < 3; ++i) recs.push_back(rec(-8.8463, 9, SolveStatus::converged_lambda));
    for (int i = 0; i < 7; ++i) recs.push_back(rec(-3.9204, 9, SolveStatus::converged_lambda));
    auto rows = aggregate(recs, 1e-4, Sense::min);
    CHECK(rows[0].lambda == Approx(-8.8463));
    CHECK(rows[0].occ_pct == Approx(30.0));
  }
  SECTION("non-converged runs count but keep their lambda in the clustering") {
    std::vector<RunRecord> recs;
    for (int i = 0; i < 8; ++i) recs.push_back(rec(0.8, 500, SolveStatus::max_iters));
    for (int i = 0; i < 2; ++i) recs.push_back(rec(0.8, 20, SolveStatus::converged_lambda));
    auto rows = aggregate(recs);
    CHECK(rows[0].occ_pct == 100.0);
    CHECK(rows[0].nonconverged == 8);
    CHECK(rows[0].median_iters == 20.0);  // median over converged runs only
  }
  SECTION("no converged runs: median falls back to all runs") {
    std::vector<RunRecord> recs(5, rec(0.8, 500, SolveStatus::max_iters));
    auto rows = aggregate(recs);
    CHECK(rows[0].median_iters == 500.0);
    CHECK(rows[0].nonconverged == 5);
  }
}

TEST_CASE("summary csv round-trips") {
  auto spec = base_spec(1, 3, "zidentity", {Method::ag, Method::geap}, 12, 11);
  auto rows = aggregate(run_experiment(spec));
  std::string csv = summary_csv(rows);
  auto back = parse_summary_csv(csv);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].method == rows[i].method);
    CHECK(back[i].occ_pct == rows[i].occ_pct);
    CHECK(back[i].lambda == rows[i].lambda);
    CHECK(back[i].median_iters == rows[i].median_iters);
    CHECK(back[i].mean_dlambda == rows[i].mean_dlambda);
    CHECK(back[i].mean_residual == rows[i].mean_residual);
    CHECK(back[i].mean_time_s == rows[i].mean_time_s);
    CHECK(back[i].nonconverged == rows[i].nonconverged);
  }
  CHECK(csv.rfind("method,occ_pct,lambda,median_iters,mean_dlambda,mean_residual,mean_time_s,nonconverged\n",
                  0) == 0);
}

TEST_CASE("summary csv bytes are stable across repeats, wall time aside") {
  auto spec = base_spec(6, 5, "hidentity", {Method::ag}, 20, 13);
  std::string c1 = summary_csv(aggregate(run_experiment(spec)));
  std::string c2 = summary_csv(aggregate(run_experiment(spec)));
  CHECK(mask_time_column(c1) == mask_time_column(c2));
}

TEST_CASE("trace csv schema") {
  SymTensor a = generate_example(1, 3);
  SolveResult r = ag(a, BOperator::z_identity(4, 3), {0.0417, -0.5618, 0.6848});
  std::string csv = trace_csv(r.trace);
  CHECK(csv.rfind("k,lambda,f,grad_norm,alpha,backtracks,elapsed_s\n", 0) == 0);
  // one line per record plus header
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(r.trace.size()) + 1);
}

TEST_CASE("solver errors are recorded per run, campaign continues") {
  namespace fs = std::filesystem;
  // dense B that is not positive definite (zero tensor entries except one tiny)
  SymTensor bad_b = SymTensor::from_entries(4, 3, {{{0, 0, 0, 0}, 1e-30}});
  fs::path p = fs::temp_directory_path() / "teig_bad_b.json";
  save_tensor_file(p.string(), bad_b);
  ExperimentSpec s;
  s.example_id = 1;
  s.n = 3;
  s.b_spec = p.string();
  s.methods = {Method::ag};
  s.runs = 4;
  auto recs = run_experiment(s);
  REQUIRE(recs.size() == 4);
  for (const auto& r : recs) CHECK(!r.error.empty());
  auto rows = aggregate(recs);
  CHECK(rows[0].nonconverged == 4);
  fs::remove(p);
}
