#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "teig/jacobi.hpp"
#include "teig/pairspace.hpp"
#include "teig/symtensor.hpp"

namespace teig {

enum class Method { shopm, geap, ag };
enum class Sense { max, min };
enum class SolveStatus { converged_lambda, converged_grad, max_iters, linesearch_failed };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::shopm: return "shopm";
    case Method::geap: return "geap";
    case Method::ag: return "ag";
  }
  return "?";
}

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged_lambda: return "converged_lambda";
    case SolveStatus::converged_grad: return "converged_grad";
    case SolveStatus::max_iters: return "max_iters";
    case SolveStatus::linesearch_failed: return "linesearch_failed";
  }
  return "?";
}

inline std::optional<Method> method_from_string(const std::string& s) {
  if (s == "shopm") return Method::shopm;
  if (s == "geap") return Method::geap;
  if (s == "ag") return Method::ag;
  return std::nullopt;
}

struct IterRecord {
  int k = 0;
  double lambda = 0.0;
  double f = 0.0;
  double grad_norm = 0.0;
  double alpha = 0.0;  // AG stepsize, GEAP shift; 0 for S-HOPM
  int backtracks = 0;
  double elapsed = 0.0;  // seconds since solve start
};

struct SolverConfig {
  Sense sense = Sense::max;
  double rho = 1e-3;           // curvilinear sufficient-increase parameter
  double tau = 1e-6;           // GEAP definiteness tolerance
  double tol_lambda = 1e-10;   // stop on |lambda_{k+1} - lambda_k| ...
  double tol_residual = 1e-6;  // ... but only once |Ax^{m-1} - lambda Bx^{m-1}| confirms stationarity
  double tol_grad = 1e-8;      // stop on |g(x_k)|
  int max_iters = 500;
  double backtrack_factor = 0.5;
  int max_backtracks = 50;

  /// Diagnostic hook, called after every trace record (including k = 0)
  /// with the iterate that produced it. AG minimization runs report the
  /// internal maximization values here; sign flips happen at exit.
  std::function<void(const Vector& x, const IterRecord&)> observer;

  void validate() const {
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("SolverConfig: rho must be in (0,1)");
    if (!(tau > 0.0)) throw std::invalid_argument("SolverConfig: tau must be positive");
    if (!(tol_lambda > 0.0)) throw std::invalid_argument("SolverConfig: tol_lambda must be positive");
    if (!(tol_residual > 0.0)) throw std::invalid_argument("SolverConfig: tol_residual must be positive");
    if (!(tol_grad > 0.0)) throw std::invalid_argument("SolverConfig: tol_grad must be positive");
    if (max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
      throw std::invalid_argument("SolverConfig: backtrack_factor must be in (0,1)");
    if (max_backtracks < 1) throw std::invalid_argument("SolverConfig: max_backtracks must be >= 1");
  }
};

struct SolveResult {
  EigenPair pair;
  SolveStatus status = SolveStatus::max_iters;
  int iterations = 0;  // update steps taken; trace.size() == iterations + 1
  std::vector<IterRecord> trace;
  double wall_time = 0.0;
  double final_dlambda = 0.0;  // |lambda change| of the last step, 0 if none
  std::string note;            // diagnostic for degenerate terminations
};

/// Point on the curvilinear path x(alpha) = sqrt(1 - alpha^2 |g|^2) x + alpha g.
/// With x unit and g tangent (x.g = 0) the result is unit by construction.
/// alpha = 1/|g| lands on g/|g|, the power-method-like endpoint.
inline Vector curvilinear_point(const Vector& x, const Vector& g, double alpha) {
  double g2 = dot(g, g);
  double radicand = 1.0 - alpha * alpha * g2;
  if (radicand < -16.0 * std::numeric_limits<double>::epsilon())
    throw std::domain_error("curvilinear_point: alpha exceeds 1/|g|");
  Vector out = scaled(x, std::sqrt(std::max(radicand, 0.0)));
  axpy(alpha, g, out);
  return out;
}

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct EvalState {
  Vector x;
  PairContractions c;
  double f = 0.0;
  Vector g;
  double gnorm = 0.0;
};

inline EvalState make_state(const SymTensor& a, const BOperator& b, Vector x) {
  EvalState st;
  st.x = unitize(std::move(x));
  st.c = contract_pair(a, b, st.x);
  st.f = st.c.axm / st.c.bxm;
  st.g = pair_gradient(a.order(), st.c, st.f);
  st.gnorm = norm2(st.g);
  return st;
}

inline EigenPair terminal_pair(const BOperator& b, const EvalState& st) {
  Vector r = st.c.axm1;
  axpy(-st.f, st.c.bxm1, r);
  return EigenPair{st.f, st.x, norm2(r), b.pair_kind()};
}

// |Ax^{m-1} - lambda Bx^{m-1}|, computed directly so it matches the residual
// reported on the terminal pair bit for bit. Equals (Bx^m / m) |g| by the
// gradient formula.
inline double residual_of(const EvalState& st, int) {
  Vector r = st.c.axm1;
  axpy(-st.f, st.c.bxm1, r);
  return norm2(r);
}

// A lambda plateau counts as convergence only when the residual confirms a
// stationary point; otherwise the iterate is crawling past a saddle or a
// degenerate flat and the iteration must go on.
inline bool lambda_converged(const SolverConfig& cfg, double dlambda, const EvalState& st, int m) {
  return dlambda <= cfg.tol_lambda && residual_of(st, m) <= cfg.tol_residual;
}

inline void push_record(SolveResult& res, const SolverConfig& cfg, const EvalState& st, int k,
                        double alpha, int backtracks, Clock::time_point t0) {
  IterRecord rec{k, st.f, st.f, st.gnorm, alpha, backtracks, seconds_since(t0)};
  res.trace.push_back(rec);
  if (cfg.observer) cfg.observer(st.x, rec);
}

}  // namespace detail

/// S-HOPM, the symmetric higher-order power method: the Z-eigenpair
/// baseline. Iterates x <- Ax^{m-1}/|Ax^{m-1}| and stops on |dlambda| or
/// max_iters; it carries no convergence guarantee, so hitting max_iters is
/// an ordinary outcome. A vanishing power step surfaces as a status, not an
/// exception.
inline SolveResult shopm(const SymTensor& a, const Vector& x0, const SolverConfig& cfg = {}) {
  cfg.validate();
  const auto t0 = detail::Clock::now();
  const BOperator b = BOperator::z_identity(a.order(), a.dim());

  SolveResult res;
  detail::EvalState st = detail::make_state(a, b, normalized(x0));
  double lambda = st.f;
  detail::push_record(res, cfg, st, 0, 0.0, 0, t0);

  for (int k = 1; k <= cfg.max_iters; ++k) {
    Vector xhat = st.c.axm1;
    double nx = norm2(xhat);
    if (nx == 0.0) {
      res.status = SolveStatus::linesearch_failed;
      res.note = "power step vanished (Ax^{m-1} = 0)";
      break;
    }
    st = detail::make_state(a, b, scaled(xhat, 1.0 / nx));
    res.final_dlambda = std::abs(st.f - lambda);
    lambda = st.f;
    res.iterations = k;
    detail::push_record(res, cfg, st, k, 0.0, 0, t0);
    if (detail::lambda_converged(cfg, res.final_dlambda, st, a.order())) {
      res.status = SolveStatus::converged_lambda;
      break;
    }
  }

  res.pair = detail::terminal_pair(b, st);
  res.wall_time = detail::seconds_since(t0);
  return res;
}

/// GEAP, the adaptive shifted power method. Per iteration it
/// precomputes the pair contractions, forms the Hessian of f, picks the
/// shift alpha_k = beta max{0, (tau - lambda_min(beta H_k))/m}, and updates
///   xhat = beta (Ax^{m-1} - lambda Bx^{m-1} + (alpha_k + lambda) Bx^m x).
/// beta = +1 seeks maxima, -1 minima.
inline SolveResult geap(const SymTensor& a, const BOperator& b, const Vector& x0,
                        const SolverConfig& cfg = {}) {
  cfg.validate();
  detail::check_pair(a, b);
  const auto t0 = detail::Clock::now();
  const double beta = cfg.sense == Sense::max ? 1.0 : -1.0;
  const double m = a.order();

  SolveResult res;
  detail::EvalState st = detail::make_state(a, b, normalized(x0));
  double lambda = st.f;
  detail::push_record(res, cfg, st, 0, 0.0, 0, t0);

  for (int k = 1; k <= cfg.max_iters; ++k) {
    SymMatrix h = pair_hessian(a, b, st.x, st.c);
    h.scale(beta);
    double shift = beta * std::max(0.0, (cfg.tau - lambda_min(h)) / m);

    Vector xhat(st.x.size());
    for (std::size_t i = 0; i < xhat.size(); ++i)
      xhat[i] = beta * (st.c.axm1[i] - lambda * st.c.bxm1[i] + (shift + lambda) * st.c.bxm * st.x[i]);
    double nx = norm2(xhat);
    if (nx == 0.0) {
      res.status = SolveStatus::linesearch_failed;
      res.note = "degenerate update (xhat = 0)";
      break;
    }
    st = detail::make_state(a, b, scaled(xhat, 1.0 / nx));
    res.final_dlambda = std::abs(st.f - lambda);
    lambda = st.f;
    res.iterations = k;
    detail::push_record(res, cfg, st, k, shift, 0, t0);
    if (detail::lambda_converged(cfg, res.final_dlambda, st, a.order())) {
      res.status = SolveStatus::converged_lambda;
      break;
    }
  }

  res.pair = detail::terminal_pair(b, st);
  res.wall_time = detail::seconds_since(t0);
  return res;
}

namespace detail {

// AG in maximization form; the sense wrapper below handles minimization.
inline SolveResult ag_max(const SymTensor& a, const BOperator& b, const Vector& x0,
                          const SolverConfig& cfg) {
  const auto t0 = Clock::now();
  const int m = a.order();
  SolveResult res;
  EvalState st = make_state(a, b, normalized(x0));
  double lambda = st.f;
  push_record(res, cfg, st, 0, 0.0, 0, t0);

  if (st.gnorm <= cfg.tol_grad) {
    // already stationary; a zero gradient is convergence, not an error
    res.status = SolveStatus::converged_grad;
    res.pair = terminal_pair(b, st);
    res.wall_time = seconds_since(t0);
    return res;
  }

  // Consecutive lambda-plateau steps away from stationarity before the next
  // trial jumps to the full curvilinear step. Plateaus like this mean the
  // iterate is creeping along a saddle or a degenerate stationary flat, where
  // the sufficient-increase test stays satisfiable at ever-smaller steps; the
  // full step carries the iterate across.
  constexpr int kStallPersistence = 2;

  std::optional<Vector> prev_x, prev_g;
  int stall_steps = 0;
  for (int k = 1; k <= cfg.max_iters; ++k) {
    const double cap = 1.0 / st.gnorm;
    double alpha;
    if (stall_steps >= kStallPersistence) {
      alpha = cap;
      stall_steps = 0;
    } else if (prev_x) {
      // trial stepsize min(1/|g_k|, |dx|/|dg|)
      double dgn = norm2(subtracted(st.g, *prev_g));
      alpha = dgn > 0.0 ? std::min(cap, norm2(subtracted(st.x, *prev_x)) / dgn) : cap;
    } else {
      // No history yet. A full-length 1/|g_0| trial is the power-method
      // endpoint and routinely leaves the ascent basin of x_0, so the first
      // trial starts one backtrack in.
      alpha = cfg.backtrack_factor * cap;
    }

    const double floor_f = st.f;
    const double gain = cfg.rho * st.gnorm * st.gnorm;
    EvalState trial;
    int backtracks = 0;
    bool accepted = false;
    while (true) {
      trial = make_state(a, b, curvilinear_point(st.x, st.g, alpha));
      if (trial.f >= floor_f + alpha * gain) {
        accepted = true;
        break;
      }
      if (++backtracks > cfg.max_backtracks) break;
      alpha *= cfg.backtrack_factor;
    }
    if (!accepted) {
      res.status = SolveStatus::linesearch_failed;
      res.note = "curvilinear search exhausted " + std::to_string(cfg.max_backtracks) + " backtracks";
      break;
    }

    prev_x = std::move(st.x);
    prev_g = std::move(st.g);
    st = std::move(trial);
    res.final_dlambda = std::abs(st.f - lambda);
    lambda = st.f;
    res.iterations = k;
    push_record(res, cfg, st, k, alpha, backtracks, t0);

    if (st.gnorm <= cfg.tol_grad) {
      res.status = SolveStatus::converged_grad;
      break;
    }
    if (lambda_converged(cfg, res.final_dlambda, st, m)) {
      res.status = SolveStatus::converged_lambda;
      break;
    }
    // Stagnation wherever lambda changes fall to noise scale: 1e-7 relative,
    // or 1000x the requested lambda tolerance when that is looser. Plateaus
    // near an acceptable stationary point (small residual, or gradient within
    // two decades of the gradient stop) are ordinary convergence tails, not
    // crawls, and are left to the BB steps.
    double plateau_tol = std::max(1e3 * cfg.tol_lambda, 1e-7) * std::max(1.0, std::abs(lambda));
    bool plateau = res.final_dlambda <= plateau_tol && residual_of(st, m) > cfg.tol_residual &&
                   st.gnorm > 1e2 * cfg.tol_grad;
    stall_steps = plateau ? stall_steps + 1 : 0;
  }

  res.pair = terminal_pair(b, st);
  res.wall_time = seconds_since(t0);
  return res;
}

}  // namespace detail

/// The adaptive gradient (AG) method. Walks the curvilinear path
///   x(alpha) = sqrt(1 - alpha^2 |g|^2) x + alpha g
/// with trial stepsize min(1/|g_k|, |dx_k|/|dg_k|), halving it until
///   f(x(alpha)) >= f(x_k) + rho alpha |g_k|^2.
/// Stops on |g| <= tol_grad, on a residual-confirmed lambda plateau, on
/// max_iters, or on an exhausted line search. A plateau without a small
/// residual instead switches the search to the longest acceptable step,
/// which carries the iterate across saddles and degenerate flats (the
/// diagonal-plus-coupling H-problems live on these). Minimization runs on
/// -A and negates lambda (and the trace) on the way out.
inline SolveResult ag(const SymTensor& a, const BOperator& b, const Vector& x0,
                      const SolverConfig& cfg = {}) {
  cfg.validate();
  detail::check_pair(a, b);
  if (cfg.sense == Sense::min) {
    SolveResult res = detail::ag_max(a.negated(), b, x0, cfg);
    res.pair.lambda = -res.pair.lambda;
    for (IterRecord& r : res.trace) {
      r.lambda = -r.lambda;
      r.f = -r.f;
    }
    return res;
  }
  return detail::ag_max(a, b, x0, cfg);
}

/// Dispatch by method tag. S-HOPM is a Z-only baseline and rejects other B.
inline SolveResult solve(Method method, const SymTensor& a, const BOperator& b, const Vector& x0,
                         const SolverConfig& cfg = {}) {
  switch (method) {
    case Method::shopm:
      if (b.kind() != BOperator::Kind::z_identity)
        throw std::invalid_argument("solve: shopm supports only the Z-identity B");
      return shopm(a, x0, cfg);
    case Method::geap:
      return geap(a, b, x0, cfg);
    case Method::ag:
      return ag(a, b, x0, cfg);
  }
  throw std::invalid_argument("solve: unknown method");
}

}  // namespace teig
