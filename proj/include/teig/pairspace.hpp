#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "teig/symtensor.hpp"
#include "teig/vecmat.hpp"

namespace teig {

/// Guard on Bx^m: the pair objective assumes B positive definite, so any
/// evaluation with Bx^m at or below this floor is treated as fatal.
inline constexpr double kBPositivityFloor = 1e-12;

/// Evaluation failure along a trajectory (B not positive definite at x).
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PairKind { generalized, z, h };

inline const char* to_string(PairKind k) {
  switch (k) {
    case PairKind::generalized: return "generalized";
    case PairKind::z: return "Z";
    case PairKind::h: return "H";
  }
  return "?";
}

/// The B side of the pair (A, B): a dense symmetric tensor, the Z-identity
/// tensor with Bx^{m-1} = |x|^{m-2} x, or the H-identity with
/// (Bx^{m-1})_i = x_i^{m-1}. The identity variants use closed forms and
/// never materialize a tensor.
class BOperator {
 public:
  enum class Kind { dense, z_identity, h_identity };

  static BOperator z_identity(int order, int dim) { return BOperator(Kind::z_identity, order, dim, std::nullopt); }
  static BOperator h_identity(int order, int dim) { return BOperator(Kind::h_identity, order, dim, std::nullopt); }
  static BOperator dense(SymTensor b) {
    int order = b.order(), dim = b.dim();
    return BOperator(Kind::dense, order, dim, std::move(b));
  }

  Kind kind() const { return kind_; }
  int order() const { return order_; }
  int dim() const { return dim_; }

  PairKind pair_kind() const {
    switch (kind_) {
      case Kind::z_identity: return PairKind::z;
      case Kind::h_identity: return PairKind::h;
      default: return PairKind::generalized;
    }
  }

  // Bx^m
  double value(const Vector& x) const {
    check(x);
    switch (kind_) {
      case Kind::z_identity:
        return std::pow(dot(x, x), order_ / 2.0);
      case Kind::h_identity: {
        double s = 0.0;
        for (double v : x) s += std::pow(v, order_);
        return s;
      }
      default:
        return tensor_->value(x);
    }
  }

  // Bx^{m-1}
  Vector apply_m1(const Vector& x) const {
    check(x);
    switch (kind_) {
      case Kind::z_identity: {
        double nx2 = dot(x, x);
        return scaled(x, std::pow(nx2, (order_ - 2) / 2.0));
      }
      case Kind::h_identity: {
        Vector out(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::pow(x[i], order_ - 1);
        return out;
      }
      default:
        return tensor_->apply_m1(x);
    }
  }

  // Bx^{m-2}. The Z-identity form follows from the symmetric-tensor Jacobian
  // identity (m-1) Bx^{m-2} = d(Bx^{m-1})/dx, which avoids materializing the
  // dense identity tensor:
  //   Bx^{m-2} = ((m-2)|x|^{m-4} x x^T + |x|^{m-2} I) / (m-1)
  SymMatrix apply_m2(const Vector& x) const {
    check(x);
    const int m = order_;
    switch (kind_) {
      case Kind::z_identity: {
        double nx2 = dot(x, x);
        if (nx2 == 0.0) throw std::invalid_argument("BOperator::apply_m2: zero vector for Z-identity");
        SymMatrix out(dim_);
        double c1 = (m - 2) * std::pow(nx2, (m - 4) / 2.0) / (m - 1);
        double c2 = std::pow(nx2, (m - 2) / 2.0) / (m - 1);
        for (int i = 0; i < dim_; ++i) {
          for (int j = i; j < dim_; ++j) {
            double v = c1 * x[i] * x[j];
            if (i == j) v += c2;
            out.set(i, j, v);
          }
        }
        return out;
      }
      case Kind::h_identity: {
        SymMatrix out(dim_);
        for (int i = 0; i < dim_; ++i) out.set(i, i, std::pow(x[i], m - 2));
        return out;
      }
      default:
        return tensor_->apply_m2(x);
    }
  }

 private:
  BOperator(Kind kind, int order, int dim, std::optional<SymTensor> tensor)
      : kind_(kind), order_(order), dim_(dim), tensor_(std::move(tensor)) {
    if (order <= 0 || order % 2 != 0) throw std::invalid_argument("BOperator: order must be positive and even");
    if (dim <= 0) throw std::invalid_argument("BOperator: dimension must be positive");
  }

  void check(const Vector& x) const {
    if (static_cast<int>(x.size()) != dim_)
      throw std::invalid_argument("BOperator: vector length != dimension");
  }

  Kind kind_;
  int order_;
  int dim_;
  std::optional<SymTensor> tensor_;
};

struct EigenPair {
  double lambda = 0.0;
  Vector x;
  double residual = 0.0;  // |Ax^{m-1} - lambda Bx^{m-1}|_2
  PairKind kind = PairKind::generalized;
};

/// The contractions every iteration needs once.
struct PairContractions {
  Vector axm1;
  Vector bxm1;
  double axm = 0.0;
  double bxm = 0.0;
};

/// Objective bundle at a unit vector: the Rayleigh quotient f (= lambda),
/// its gradient, optionally the Hessian, and the eigenpair residual.
struct ObjectiveEval {
  Vector x;
  double f = 0.0;
  Vector g;
  std::optional<SymMatrix> hessian;
  double residual = 0.0;
};

namespace detail {

inline void check_pair(const SymTensor& a, const BOperator& b) {
  if (a.order() != b.order() || a.dim() != b.dim())
    throw std::invalid_argument("pair evaluation: A and B shapes differ");
}

// Normalizes defensively: long solver runs accumulate unit-norm drift.
inline Vector unitize(Vector x) {
  double n = norm2(x);
  if (n == 0.0) throw std::invalid_argument("pair evaluation: zero vector");
  if (std::abs(n - 1.0) > 1e-12) x = scaled(x, 1.0 / n);
  return x;
}

inline PairContractions contract_pair(const SymTensor& a, const BOperator& b, const Vector& x) {
  PairContractions c;
  c.axm1 = a.apply_m1(x);
  c.bxm1 = b.apply_m1(x);
  c.axm = dot(x, c.axm1);
  c.bxm = b.value(x);
  if (!(c.bxm > kBPositivityFloor))
    throw EvalError("pair evaluation: Bx^m <= " + std::to_string(kBPositivityFloor) +
                    " (B not positive definite along x)");
  return c;
}

inline Vector pair_gradient(int m, const PairContractions& c, double f) {
  Vector g(c.axm1.size());
  double s = m / c.bxm;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = s * (c.axm1[i] - f * c.bxm1[i]);
  return g;
}

}  // namespace detail

/// Hessian of f(x) = Ax^m / Bx^m:
///   H = m(m-1) Ax^{m-2} / Bx^m
///     - [ m(m-1) Ax^m Bx^{m-2} + m^2 (Ax^{m-1} o Bx^{m-1}) ] / (Bx^m)^2
///     + m^2 Ax^m (Bx^{m-1} o Bx^{m-1}) / (Bx^m)^3
/// with u o v = u v^T + v u^T.
inline SymMatrix pair_hessian(const SymTensor& a, const BOperator& b, const Vector& x,
                              const PairContractions& c) {
  const double m = a.order();
  const double bm = c.bxm;
  SymMatrix h = a.apply_m2(x);
  h.scale(m * (m - 1) / bm);
  h.add_scaled(b.apply_m2(x), -m * (m - 1) * c.axm / (bm * bm));
  h.add_outer_sym(c.axm1, c.bxm1, -m * m / (bm * bm));
  h.add_outer_sym(c.bxm1, c.bxm1, m * m * c.axm / (bm * bm * bm));
  return h;
}

inline ObjectiveEval eval_objective(const SymTensor& a, const BOperator& b, Vector x,
                                    bool want_hessian = false) {
  detail::check_pair(a, b);
  ObjectiveEval ev;
  ev.x = detail::unitize(std::move(x));
  PairContractions c = detail::contract_pair(a, b, ev.x);
  ev.f = c.axm / c.bxm;
  ev.g = detail::pair_gradient(a.order(), c, ev.f);
  Vector r = c.axm1;
  axpy(-ev.f, c.bxm1, r);
  ev.residual = norm2(r);
  if (want_hessian) ev.hessian = pair_hessian(a, b, ev.x, c);
  return ev;
}

/// A vanishing gradient of the Rayleigh quotient makes (f(x), x) a
/// generalized eigenpair. Returns the pair when |g(x)| <= tol, empty
/// otherwise.
inline std::optional<EigenPair> check_eigenpair(const SymTensor& a, const BOperator& b,
                                                const Vector& x, double tol) {
  ObjectiveEval ev = eval_objective(a, b, x);
  if (norm2(ev.g) > tol) return std::nullopt;
  return EigenPair{ev.f, ev.x, ev.residual, b.pair_kind()};
}

}  // namespace teig
