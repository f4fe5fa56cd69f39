#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace teig {

using Vector = std::vector<double>;

inline double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

inline Vector scaled(const Vector& a, double c) {
  Vector out(a);
  for (double& v : out) v *= c;
  return out;
}

// y += c * x
inline void axpy(double c, const Vector& x, Vector& y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

inline Vector subtracted(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("subtracted: size mismatch");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline Vector normalized(const Vector& a) {
  double n = norm2(a);
  if (n == 0.0) throw std::invalid_argument("normalized: zero vector");
  return scaled(a, 1.0 / n);
}

/// Dense symmetric matrix with full row-major storage; both triangles are
/// kept in sync through set/add, so M == M^T holds exactly.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {
    if (n <= 0) throw std::invalid_argument("SymMatrix: dimension must be positive");
  }

  int dim() const { return n_; }

  double operator()(int i, int j) const { return a_[idx(i, j)]; }

  void set(int i, int j, double v) {
    a_[idx(i, j)] = v;
    a_[idx(j, i)] = v;
  }

  void add(int i, int j, double v) {
    a_[idx(i, j)] += v;
    if (i != j) a_[idx(j, i)] += v;
  }

  void scale(double c) {
    for (double& v : a_) v *= c;
  }

  // M += c * N
  void add_scaled(const SymMatrix& other, double c) {
    if (other.n_ != n_) throw std::invalid_argument("SymMatrix::add_scaled: dimension mismatch");
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += c * other.a_[k];
  }

  // M += c * (u v^T + v u^T)
  void add_outer_sym(const Vector& u, const Vector& v, double c) {
    if (static_cast<int>(u.size()) != n_ || static_cast<int>(v.size()) != n_)
      throw std::invalid_argument("SymMatrix::add_outer_sym: dimension mismatch");
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) a_[idx(i, j)] += c * (u[i] * v[j] + v[i] * u[j]);
  }

  Vector apply(const Vector& x) const {
    if (static_cast<int>(x.size()) != n_) throw std::invalid_argument("SymMatrix::apply: dimension mismatch");
    Vector out(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
      double s = 0.0;
      for (int j = 0; j < n_; ++j) s += a_[idx(i, j)] * x[j];
      out[i] = s;
    }
    return out;
  }

  double quad_form(const Vector& x) const { return dot(x, apply(x)); }

  double frobenius() const {
    double s = 0.0;
    for (double v : a_) s += v * v;
    return std::sqrt(s);
  }

  double trace() const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += a_[idx(i, i)];
    return s;
  }

  bool all_finite() const {
    for (double v : a_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  static SymMatrix identity(int n) {
    SymMatrix m(n);
    for (int i = 0; i < n; ++i) m.set(i, i, 1.0);
    return m;
  }

 private:
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }

  int n_ = 0;
  std::vector<double> a_;
};

}  // namespace teig
