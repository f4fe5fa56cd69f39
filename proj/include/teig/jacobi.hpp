#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "teig/vecmat.hpp"

namespace teig {

struct JacobiOptions {
  double tol = 1e-12;   // relative to ||M||_F
  int max_sweeps = 100;
};

namespace detail {

inline double offdiag_norm(const SymMatrix& m) {
  double s = 0.0;
  for (int i = 0; i < m.dim(); ++i)
    for (int j = i + 1; j < m.dim(); ++j) s += 2.0 * m(i, j) * m(i, j);
  return std::sqrt(s);
}

}  // namespace detail

/// Full spectrum of a dense symmetric matrix, ascending, by cyclic-by-row
/// Jacobi rotations. Sweeps stop once the off-diagonal Frobenius mass falls
/// below tol * ||M||_F. Intended for the small matrices (n up to a few
/// dozen) this library works with. offdiag_history, when given, receives the
/// off-diagonal Frobenius norm before each sweep (diagnostic).
inline std::vector<double> jacobi_eigenvalues(SymMatrix m, JacobiOptions opt = {},
                                              std::vector<double>* offdiag_history = nullptr) {
  if (!m.all_finite()) throw std::invalid_argument("jacobi_eigenvalues: non-finite entry");
  const int n = m.dim();
  if (n == 1) return {m(0, 0)};

  const double scale = m.frobenius();
  const double threshold = opt.tol * scale;
  if (scale > 0.0) {
    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
      double off = detail::offdiag_norm(m);
      if (offdiag_history) offdiag_history->push_back(off);
      if (off <= threshold) break;
      for (int p = 0; p < n - 1; ++p) {
        for (int q = p + 1; q < n; ++q) {
          double apq = m(p, q);
          if (std::abs(apq) <= threshold / (n * n)) continue;
          double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
          double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          double c = 1.0 / std::sqrt(t * t + 1.0);
          double s = t * c;
          double app = m(p, p), aqq = m(q, q);
          m.set(p, p, app - t * apq);
          m.set(q, q, aqq + t * apq);
          m.set(p, q, 0.0);
          for (int k = 0; k < n; ++k) {
            if (k == p || k == q) continue;
            double akp = m(k, p), akq = m(k, q);
            m.set(k, p, c * akp - s * akq);
            m.set(k, q, s * akp + c * akq);
          }
        }
      }
    }
  }

  std::vector<double> eig(n);
  for (int i = 0; i < n; ++i) eig[i] = m(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

inline double lambda_min(const SymMatrix& m, double tol = 1e-12) {
  return jacobi_eigenvalues(m, {tol, 100}).front();
}

inline double lambda_max(const SymMatrix& m, double tol = 1e-12) {
  return jacobi_eigenvalues(m, {tol, 100}).back();
}

}  // namespace teig
